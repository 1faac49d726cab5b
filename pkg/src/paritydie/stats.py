"""Binomial test arithmetic, run probabilities, and order-sensitive testing.

Point statistics (moments, z-scores, normal CDF) are floating point; tail
and run probabilities are exact rationals.  The sequential report replays a
toss stream prefix by prefix, which is where order starts to matter: streams
with identical totals can part ways long before the final count is in.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, erfc, sqrt
from typing import Sequence

from .core import Parity
from .serialize import fraction_fields

TossSequence = list[Parity]

HALF = Fraction(1, 2)
DEFAULT_RUN_LEVEL = Fraction(1, 1000)


def binomial_moments(n: int, p: float | Fraction) -> tuple[float, float]:
    """Mean and standard deviation of the even count in n independent tosses."""
    if n < 0:
        raise ValueError(f"toss count must be nonnegative, got {n}")
    if not 0 <= p <= 1:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    p = float(p)
    return n * p, sqrt(n * p * (1 - p))


def z_score(even_count: int, n: int, p0: float | Fraction) -> float:
    """Standardized deviation of the observed even count under the null p0."""
    if n < 1:
        raise ValueError(f"toss count must be at least 1, got {n}")
    p0 = float(p0)
    if not 0 < p0 < 1:
        raise ValueError(f"null probability must lie strictly in (0, 1), got {p0}")
    return (even_count - n * p0) / sqrt(n * p0 * (1 - p0))


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function.

    Phi(z) = erfc(-z / sqrt(2)) / 2; absolute error is far below 1e-7.
    """
    return 0.5 * erfc(-z / sqrt(2))


def normal_quantile(q: float) -> float:
    """Inverse standard normal CDF by bisection (the CDF is strictly monotone)."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile argument must lie strictly in (0, 1), got {q}")
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def exact_binomial_tail(n: int, k: int, p: float | Fraction) -> Fraction:
    """P(X >= k) for X ~ Binomial(n, p), by direct summation, exactly.

    Note: a float ``p`` is converted to the rational it exactly represents;
    pass a Fraction for round decimal nulls like 1/10.
    """
    if not 0 <= k <= n:
        raise ValueError(f"threshold must lie in [0, {n}], got {k}")
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    q = 1 - p
    return sum(
        (comb(n, j) * p**j * q ** (n - j) for j in range(k, n + 1)),
        Fraction(0),
    )


def run_probability(length: int, p: float | Fraction) -> Fraction:
    """Chance of a specific same-parity run of the given length: p**length."""
    if length < 1:
        raise ValueError(f"run length must be at least 1, got {length}")
    return Fraction(p) ** length


def default_run_threshold(
    p0: float | Fraction, level: Fraction = DEFAULT_RUN_LEVEL
) -> int:
    """Shortest run length whose chance under the null falls below ``level``."""
    p0 = Fraction(p0)
    if not 0 < p0 < 1:
        raise ValueError(f"null probability must lie strictly in (0, 1), got {p0}")
    length = 1
    while p0**length >= level:
        length += 1
    return length


def proportion_after(sequence: Sequence[Parity]) -> float:
    """Fraction of even outcomes in a nonempty toss sequence."""
    if not sequence:
        raise ValueError("toss sequence is empty")
    return sum(p is Parity.EVEN for p in sequence) / len(sequence)


def scenario(scenario_id: int) -> TossSequence:
    """Three 100-toss orderings that share 58 even outcomes.

    1: 58 evens then 42 odds; 2: 42 evens, 42 odds, 16 evens; 3: 42
    even-odd pairs then 16 evens.  Same totals, very different histories.
    """
    E, O = Parity.EVEN, Parity.ODD
    if scenario_id == 1:
        return [E] * 58 + [O] * 42
    if scenario_id == 2:
        return [E] * 42 + [O] * 42 + [E] * 16
    if scenario_id == 3:
        return [E, O] * 42 + [E] * 16
    raise ValueError(f"scenario id must be 1, 2 or 3, got {scenario_id}")


@dataclass(frozen=True)
class TestReport:
    """Fixed-sample verdict on a complete toss sequence."""

    n: int
    even_count: int
    p0: Fraction
    alpha: float
    z: float
    p_value_one_sided: float
    p_value_exact: Fraction | None
    reject: bool

    def to_jsonable(self) -> dict:
        return {
            "n": self.n,
            "even_count": self.even_count,
            "p0": fraction_fields(self.p0),
            "alpha": self.alpha,
            "z": self.z,
            "p_value_one_sided": self.p_value_one_sided,
            "p_value_exact": (
                fraction_fields(self.p_value_exact)
                if self.p_value_exact is not None
                else None
            ),
            "reject": self.reject,
        }


def fairness_report(
    sequence: Sequence[Parity],
    p0: float | Fraction = HALF,
    alpha: float = 0.05,
    exact: bool = True,
) -> TestReport:
    """Two-sided z-test of the even count, with the exact upper tail attached.

    ``p_value_one_sided`` is the normal upper-tail exceedance 1 - Phi(z);
    ``p_value_exact`` is the exact binomial P(X >= even_count).
    """
    if not sequence:
        raise ValueError("toss sequence is empty")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie strictly in (0, 1), got {alpha}")
    p0 = Fraction(p0)
    n = len(sequence)
    evens = sum(p is Parity.EVEN for p in sequence)
    z = z_score(evens, n, p0)
    return TestReport(
        n=n,
        even_count=evens,
        p0=p0,
        alpha=alpha,
        z=z,
        p_value_one_sided=1.0 - normal_cdf(z),
        p_value_exact=exact_binomial_tail(n, evens, p0) if exact else None,
        reject=abs(z) >= normal_quantile(1 - alpha / 2),
    )


@dataclass(frozen=True)
class PrefixRecord:
    t: int
    even_count: int
    z: float
    z_flag: bool
    run_flag: bool

    @property
    def flagged(self) -> bool:
        return self.z_flag or self.run_flag


@dataclass(frozen=True)
class RunEvent:
    """A maximal same-parity run that reached the detector threshold."""

    start: int
    length: int
    parity: Parity


@dataclass(frozen=True)
class SequentialReport:
    """Prefix-by-prefix replay of a toss stream.

    ``records`` covers every prefix from ``t_min`` on; ``first_rejection``
    is the earliest prefix where either the z-test or the run detector
    fired, or None.
    """

    p0: Fraction
    alpha: float
    t_min: int
    run_threshold: int
    two_sided: bool
    bonferroni: bool
    records: tuple[PrefixRecord, ...]
    run_events: tuple[RunEvent, ...]
    first_rejection: int | None

    def to_jsonable(self) -> dict:
        return {
            "p0": fraction_fields(self.p0),
            "alpha": self.alpha,
            "t_min": self.t_min,
            "run_threshold": self.run_threshold,
            "two_sided": self.two_sided,
            "bonferroni": self.bonferroni,
            "first_rejection": self.first_rejection,
            "run_events": [
                {"start": e.start, "length": e.length, "parity": e.parity.char}
                for e in self.run_events
            ],
            "records": [
                {
                    "t": r.t,
                    "even_count": r.even_count,
                    "z": r.z,
                    "z_flag": r.z_flag,
                    "run_flag": r.run_flag,
                }
                for r in self.records
            ],
        }


def sequential_report(
    sequence: Sequence[Parity],
    p0: float | Fraction = HALF,
    alpha: float = 0.05,
    t_min: int = 10,
    run_threshold: int | None = None,
    two_sided: bool = True,
    bonferroni: bool = False,
) -> SequentialReport:
    """Replay the stream, flagging z exceedances and over-long runs.

    Both detectors are evaluated from prefix ``t_min`` onward (the z
    approximation is meaningless on tiny prefixes).  The z threshold is the
    normal quantile for ``alpha``, split two ways unless ``two_sided`` is
    False and divided by the number of prefixes tested when ``bonferroni``
    is set.  The run flag raises when the current same-parity run length has
    reached ``run_threshold``, which defaults to the shortest run rarer than
    1 in 1000 under the null.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie strictly in (0, 1), got {alpha}")
    if t_min < 1:
        raise ValueError(f"t_min must be at least 1, got {t_min}")
    p0 = Fraction(p0)
    if run_threshold is None:
        run_threshold = default_run_threshold(p0)
    if run_threshold < 1:
        raise ValueError(f"run threshold must be at least 1, got {run_threshold}")

    tests = max(len(sequence) - t_min + 1, 1)
    level = alpha / tests if bonferroni else alpha
    critical = normal_quantile(1 - level / 2) if two_sided else normal_quantile(1 - level)

    records = []
    run_events = []
    first_rejection: int | None = None
    evens = 0
    run_length = 0
    run_start = 1
    previous: Parity | None = None
    for t, parity in enumerate(sequence, start=1):
        evens += parity is Parity.EVEN
        if parity is previous:
            run_length += 1
        else:
            if previous is not None and run_length >= run_threshold:
                run_events.append(RunEvent(run_start, run_length, previous))
            run_start = t
            run_length = 1
            previous = parity
        if t < t_min:
            continue
        z = z_score(evens, t, p0)
        z_flag = (abs(z) >= critical) if two_sided else (z >= critical)
        run_flag = run_length >= run_threshold
        records.append(PrefixRecord(t, evens, z, z_flag, run_flag))
        if first_rejection is None and (z_flag or run_flag):
            first_rejection = t
    if previous is not None and run_length >= run_threshold:
        run_events.append(RunEvent(run_start, run_length, previous))

    return SequentialReport(
        p0=p0,
        alpha=alpha,
        t_min=t_min,
        run_threshold=run_threshold,
        two_sided=two_sided,
        bonferroni=bonferroni,
        records=tuple(records),
        run_events=tuple(run_events),
        first_rejection=first_rejection,
    )
