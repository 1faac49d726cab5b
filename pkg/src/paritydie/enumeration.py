"""Exact enumeration of toss-path and configuration distributions.

Everything here expands the one-roll transition relation from the initial
configuration in exact rational arithmetic.  Path enumeration is exponential
in depth (every parity sequence is a key), so it is guarded by ``max_depth``;
the configuration and even-count queries merge states per step and stay
polynomial.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    DieConfig,
    MutationRule,
    Parity,
    initial_config,
    parity_probability,
    transitions,
)
from .serialize import fraction_fields

MAX_DEPTH = 20


class DepthRangeError(ValueError):
    """Requested depth falls outside the supported range."""


def _check_depth(depth: int, max_depth: int, minimum: int) -> None:
    if not minimum <= depth <= max_depth:
        raise DepthRangeError(
            f"depth must be between {minimum} and {max_depth}, got {depth}"
        )


@dataclass(frozen=True)
class PathDistribution:
    """Exact probability of every parity sequence of a fixed length.

    Keys are strings over 'E'/'O' of length ``depth``; values are positive
    rationals summing exactly to 1.
    """

    rule: MutationRule
    depth: int
    entries: dict[str, Fraction]

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    def to_jsonable(self) -> dict:
        return {
            "rule": self.rule.value,
            "depth": self.depth,
            "entries": [
                {"sequence": sequence, **fraction_fields(probability)}
                for sequence, probability in sorted(self.entries.items())
            ],
        }


@dataclass(frozen=True)
class ConfigDistribution:
    """Exact distribution over canonical configurations after ``step`` rolls."""

    rule: MutationRule
    step: int
    entries: dict[DieConfig, Fraction]

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))


def path_distribution(
    rule: MutationRule, depth: int, max_depth: int = MAX_DEPTH
) -> PathDistribution:
    """Exact distribution over parity sequences of length ``depth``.

    Expands the transition tree from the initial configuration, merging
    identical die states under each prefix.  Cost and result size grow as
    2**depth, hence the ``max_depth`` guard; pass a larger ``max_depth``
    explicitly to go deeper.
    """
    _check_depth(depth, max_depth, minimum=1)
    entries: dict[str, Fraction] = {}

    def expand(prefix: str, weights: dict[DieConfig, Fraction]) -> None:
        if len(prefix) == depth:
            entries[prefix] = sum(weights.values(), Fraction(0))
            return
        for parity in (Parity.EVEN, Parity.ODD):
            branch: dict[DieConfig, Fraction] = defaultdict(Fraction)
            for config, weight in weights.items():
                for outcome, state, probability in transitions(config, rule):
                    if outcome is parity:
                        branch[state] += weight * probability
            if branch:
                expand(prefix + parity.char, dict(branch))

    expand("", {initial_config(): Fraction(1)})
    return PathDistribution(rule=rule, depth=depth, entries=entries)


def config_distribution(
    rule: MutationRule, steps: int, max_depth: int = MAX_DEPTH
) -> ConfigDistribution:
    """Exact distribution over configurations after ``steps`` rolls."""
    _check_depth(steps, max_depth, minimum=0)
    weights: dict[DieConfig, Fraction] = {initial_config(): Fraction(1)}
    for _ in range(steps):
        merged: dict[DieConfig, Fraction] = defaultdict(Fraction)
        for config, weight in weights.items():
            for _, state, probability in transitions(config, rule):
                merged[state] += weight * probability
        weights = dict(merged)
    return ConfigDistribution(rule=rule, step=steps, entries=weights)


def imbalance_distribution(
    rule: MutationRule, steps: int, max_depth: int = MAX_DEPTH
) -> dict[int, Fraction]:
    """Exact distribution of the even-toss count among the first ``steps`` tosses.

    Merges on (even count, configuration) per step, so the cost stays
    polynomial in ``steps`` even though the full path distribution does not.
    """
    _check_depth(steps, max_depth, minimum=1)
    weights: dict[tuple[int, DieConfig], Fraction] = {
        (0, initial_config()): Fraction(1)
    }
    for _ in range(steps):
        merged: dict[tuple[int, DieConfig], Fraction] = defaultdict(Fraction)
        for (evens, config), weight in weights.items():
            for outcome, state, probability in transitions(config, rule):
                merged[evens + (outcome is Parity.EVEN), state] += weight * probability
        weights = dict(merged)
    marginal: dict[int, Fraction] = defaultdict(Fraction)
    for (evens, _), weight in weights.items():
        marginal[evens] += weight
    return dict(sorted(marginal.items()))


def next_even_probability(distribution: ConfigDistribution) -> Fraction:
    """Chance that the next toss is even, given a configuration distribution."""
    return sum(
        (
            weight * parity_probability(config, Parity.EVEN)
            for config, weight in distribution.entries.items()
        ),
        Fraction(0),
    )
