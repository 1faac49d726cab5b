"""Seeded Monte Carlo simulation of toss paths and empirical-vs-exact checks.

Determinism contract: run ``i`` of a batch draws its tosses from a fresh
Mersenne Twister generator seeded with ``derive_seed(master_seed, i)``, so
aggregate results depend only on (rule, tosses, runs, master_seed), never on
execution order or the number of workers.

Sampling converts the exact event probabilities to cumulative double
thresholds in the fixed event order (EE roll, EO even face, EO odd face,
OO roll); one uniform draw per toss picks the first bracket containing it.
"""

from __future__ import annotations

import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import sqrt

from .core import (
    DieConfig,
    MutationRule,
    Parity,
    all_configs,
    initial_config,
    is_frozen,
    roll_events,
)
from .enumeration import PathDistribution

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15

SEQUENCE_TRACKING_CAP = 12


def derive_seed(master_seed: int, index: int) -> int:
    """Per-run seed: SplitMix64 output function on the index-th stream state.

    Distinct (master_seed, index) pairs map to well-scattered 64-bit values;
    this mixing is part of the public batch contract.
    """
    if index < 0:
        raise ValueError(f"run index must be nonnegative, got {index}")
    z = (master_seed + (index + 1) * _SPLITMIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@lru_cache(maxsize=None)
def _sampler_tables(
    rule: MutationRule,
) -> dict[DieConfig, tuple[tuple[float, ...], tuple[tuple[Parity, DieConfig], ...], bool]]:
    """Per-configuration cumulative thresholds, results and frozen flags.

    Thresholds are floats of exact partial sums, so the final threshold is
    exactly 1.0 and every uniform draw in [0, 1) lands in some bracket.
    """
    tables = {}
    for config in all_configs():
        events = roll_events(config, rule)
        running = Fraction(0)
        thresholds = []
        for event in events:
            running += event.probability
            thresholds.append(float(running))
        tables[config] = (
            tuple(thresholds),
            tuple((event.outcome, event.state) for event in events),
            is_frozen(config, rule),
        )
    return tables


@dataclass(frozen=True)
class SimulationRun:
    rule: MutationRule
    seed: int
    tosses: tuple[Parity, ...]
    trajectory: tuple[DieConfig, ...]

    def sequence(self) -> str:
        return "".join(parity.char for parity in self.tosses)

    def even_count(self) -> int:
        return sum(parity is Parity.EVEN for parity in self.tosses)


@dataclass(frozen=True)
class BatchSummary:
    """Order-insensitive tallies over independent simulation runs.

    ``sequences`` is populated only when the toss count is small enough to
    track full paths (see ``SEQUENCE_TRACKING_CAP``).
    """

    rule: MutationRule
    tosses: int
    runs: int
    master_seed: int
    even_counts: dict[int, int]
    final_configs: dict[DieConfig, int]
    frozen_runs: int
    sequences: dict[str, int] | None

    def even_count_mean(self) -> float:
        return sum(k * c for k, c in self.even_counts.items()) / self.runs

    def even_count_sd(self) -> float:
        """Sample standard deviation (n - 1 denominator) of the even count."""
        mean = self.even_count_mean()
        total = sum(c * (k - mean) ** 2 for k, c in self.even_counts.items())
        return sqrt(total / (self.runs - 1)) if self.runs > 1 else 0.0

    def sequence_frequencies(self) -> dict[str, float]:
        if self.sequences is None:
            raise ValueError(
                f"sequences are not tracked for {self.tosses} tosses"
            )
        return {seq: count / self.runs for seq, count in sorted(self.sequences.items())}

    def to_jsonable(self) -> dict:
        return {
            "rule": self.rule.value,
            "tosses": self.tosses,
            "runs": self.runs,
            "master_seed": self.master_seed,
            "even_counts": {str(k): c for k, c in sorted(self.even_counts.items())},
            "final_configs": {
                "".join(map(str, config)): count
                for config, count in sorted(self.final_configs.items())
            },
            "frozen_runs": self.frozen_runs,
            "sequences": (
                dict(sorted(self.sequences.items()))
                if self.sequences is not None
                else None
            ),
        }


def simulate_path(rule: MutationRule, tosses: int, seed: int) -> SimulationRun:
    """Sample a toss path; deterministic given (rule, tosses, seed)."""
    if tosses < 0:
        raise ValueError(f"toss count must be nonnegative, got {tosses}")
    tables = _sampler_tables(rule)
    rng = random.Random(seed)
    config = initial_config()
    outcomes: list[Parity] = []
    trajectory = [config]
    for _ in range(tosses):
        thresholds, results, _ = tables[config]
        draw = rng.random()
        k = 0
        while draw >= thresholds[k]:
            k += 1
        outcome, config = results[k]
        outcomes.append(outcome)
        trajectory.append(config)
    return SimulationRun(
        rule=rule, seed=seed, tosses=tuple(outcomes), trajectory=tuple(trajectory)
    )


def _run_tallies(rule, tosses, seed, track):
    """(even count, final config, frozen flag, sequence) of one run.

    Consumes draws exactly like ``simulate_path``.
    """
    tables = _sampler_tables(rule)
    uniform = random.Random(seed).random
    config = initial_config()
    evens = 0
    chars: list[str] | None = [] if track else None
    for _ in range(tosses):
        thresholds, results, _ = tables[config]
        draw = uniform()
        k = 0
        while draw >= thresholds[k]:
            k += 1
        outcome, config = results[k]
        if outcome is Parity.EVEN:
            evens += 1
        if chars is not None:
            chars.append(outcome.char)
    frozen = tables[config][2]
    return evens, config, frozen, "".join(chars) if chars is not None else None


def batch(
    rule: MutationRule,
    tosses: int,
    runs: int,
    master_seed: int,
    workers: int = 1,
    track_sequences: bool | None = None,
) -> BatchSummary:
    """Aggregate ``runs`` independent simulation runs.

    ``track_sequences=None`` tracks full paths automatically when ``tosses``
    is at most ``SEQUENCE_TRACKING_CAP``.  Aggregation is pure counting, so
    the summary is identical for any ``workers`` value.
    """
    if runs < 1:
        raise ValueError(f"run count must be at least 1, got {runs}")
    if tosses < 0:
        raise ValueError(f"toss count must be nonnegative, got {tosses}")
    if workers < 1:
        raise ValueError(f"worker count must be at least 1, got {workers}")
    if track_sequences is None:
        track_sequences = tosses <= SEQUENCE_TRACKING_CAP

    def tally_range(indices: range) -> tuple[Counter, Counter, int, Counter | None]:
        even_counts: Counter = Counter()
        final_configs: Counter = Counter()
        sequences: Counter | None = Counter() if track_sequences else None
        frozen = 0
        for i in indices:
            evens, config, is_frozen_end, sequence = _run_tallies(
                rule, tosses, derive_seed(master_seed, i), track_sequences
            )
            even_counts[evens] += 1
            final_configs[config] += 1
            frozen += is_frozen_end
            if sequences is not None:
                sequences[sequence] += 1
        return even_counts, final_configs, frozen, sequences

    if workers == 1:
        parts = [tally_range(range(runs))]
    else:
        chunk = -(-runs // workers)
        ranges = [range(lo, min(lo + chunk, runs)) for lo in range(0, runs, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(tally_range, ranges))

    even_counts: Counter = Counter()
    final_configs: Counter = Counter()
    sequences: Counter | None = Counter() if track_sequences else None
    frozen_runs = 0
    for part_evens, part_finals, part_frozen, part_sequences in parts:
        even_counts += part_evens
        final_configs += part_finals
        frozen_runs += part_frozen
        if sequences is not None and part_sequences is not None:
            sequences += part_sequences

    return BatchSummary(
        rule=rule,
        tosses=tosses,
        runs=runs,
        master_seed=master_seed,
        even_counts=dict(even_counts),
        final_configs=dict(final_configs),
        frozen_runs=frozen_runs,
        sequences=dict(sequences) if sequences is not None else None,
    )


@dataclass(frozen=True)
class AbsorptionSample:
    """Monte Carlo tallies of which frozen configuration each run reached."""

    rule: MutationRule
    runs: int
    master_seed: int
    counts: dict[DieConfig, int]
    unabsorbed: int
    total_steps: int

    def frequency_of(self, state: DieConfig) -> float:
        return self.counts.get(DieConfig(*state), 0) / self.runs

    def mean_steps(self) -> float:
        absorbed = self.runs - self.unabsorbed
        return self.total_steps / absorbed if absorbed else float("nan")


def absorption_frequencies(
    rule: MutationRule, runs: int, master_seed: int, max_steps: int = 10_000
) -> AbsorptionSample:
    """Simulate each run until the configuration freezes, tallying endpoints.

    Runs still unfrozen after ``max_steps`` tosses are counted as unabsorbed
    (always the case for rules with no frozen configuration).
    """
    if runs < 1:
        raise ValueError(f"run count must be at least 1, got {runs}")
    tables = _sampler_tables(rule)
    counts: Counter = Counter()
    unabsorbed = 0
    total_steps = 0
    start = initial_config()
    for i in range(runs):
        uniform = random.Random(derive_seed(master_seed, i)).random
        config = start
        steps = 0
        while not tables[config][2]:
            if steps >= max_steps:
                break
            thresholds, results, _ = tables[config]
            draw = uniform()
            k = 0
            while draw >= thresholds[k]:
                k += 1
            _, config = results[k]
            steps += 1
        if tables[config][2]:
            counts[config] += 1
            total_steps += steps
        else:
            unabsorbed += 1
    return AbsorptionSample(
        rule=rule,
        runs=runs,
        master_seed=master_seed,
        counts=dict(counts),
        unabsorbed=unabsorbed,
        total_steps=total_steps,
    )


def path_chi_square(summary: BatchSummary, exact: PathDistribution) -> tuple[float, int]:
    """Pearson goodness-of-fit statistic against the exact path distribution.

    Returns (statistic, degrees of freedom); the summary must have tracked
    sequences of the same length as the distribution's depth.
    """
    observed = _observed_sequences(summary, exact)
    statistic = 0.0
    for sequence, probability in exact.entries.items():
        expected = summary.runs * float(probability)
        statistic += (observed.get(sequence, 0) - expected) ** 2 / expected
    return statistic, len(exact.entries) - 1


def max_multinomial_deviation(summary: BatchSummary, exact: PathDistribution) -> float:
    """Largest per-sequence |observed - expected| in binomial standard deviations."""
    observed = _observed_sequences(summary, exact)
    worst = 0.0
    for sequence, probability in exact.entries.items():
        p = float(probability)
        spread = sqrt(summary.runs * p * (1 - p))
        deviation = abs(observed.get(sequence, 0) - summary.runs * p) / spread
        worst = max(worst, deviation)
    return worst


def _observed_sequences(summary: BatchSummary, exact: PathDistribution) -> dict[str, int]:
    if summary.sequences is None:
        raise ValueError("summary did not track sequences")
    if summary.tosses != exact.depth:
        raise ValueError(
            f"summary tracks {summary.tosses} tosses but the distribution depth is {exact.depth}"
        )
    if summary.rule is not exact.rule:
        raise ValueError("summary and distribution use different rules")
    return summary.sequences
