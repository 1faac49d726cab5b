"""Die configurations, mutation rules, and single-roll transition semantics.

The die is tracked as three opposite-face pairs classified by parity, so a
configuration is the count triple (ee, eo, oo) with ee + eo + oo = 3.  Face
identity never influences the dynamics, which collapses the 2**6 raw parity
assignments to 10 canonical states without changing any probability.  All
probabilities are exact rationals.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import NamedTuple

PAIR_COUNT = 3
FACE_COUNT = 6


class Parity(Enum):
    """Outcome alphabet of a toss: the rolled face is even or odd."""

    EVEN = "E"
    ODD = "O"

    @property
    def char(self) -> str:
        return self.value

    def flip(self) -> "Parity":
        return Parity.ODD if self is Parity.EVEN else Parity.EVEN

    @classmethod
    def from_char(cls, symbol: str) -> "Parity":
        try:
            return cls(symbol.upper())
        except ValueError:
            raise ValueError(f"not a parity symbol: {symbol!r}") from None


class MutationRule(Enum):
    """How a roll rewrites the hidden face opposite the rolled one.

    NO_MUTATION leaves the die alone (the standard die).  PARITY_COPY sets
    the hidden face's parity equal to the rolled face's, so every roll
    reinforces itself.  INCREMENT adds one dot to the hidden face, flipping
    its parity unconditionally.
    """

    NO_MUTATION = "none"
    PARITY_COPY = "copy"
    INCREMENT = "increment"

    @classmethod
    def from_name(cls, name: str) -> "MutationRule":
        try:
            return cls(name.lower())
        except ValueError:
            choices = ", ".join(rule.value for rule in cls)
            raise ValueError(f"unknown mutation rule {name!r} (choose from {choices})") from None


class DieConfig(NamedTuple):
    """Counts of EE, EO and OO opposite-face pairs; compares equal to a plain triple."""

    ee: int
    eo: int
    oo: int

    def validate(self) -> "DieConfig":
        if min(self) < 0 or sum(self) != PAIR_COUNT:
            raise ValueError(f"not a valid pair-count triple: {tuple(self)}")
        return self

    @property
    def even_faces(self) -> int:
        return 2 * self.ee + self.eo

    @property
    def odd_faces(self) -> int:
        return 2 * self.oo + self.eo

    def flipped(self) -> "DieConfig":
        """Swap even and odd everywhere; an involution."""
        return DieConfig(self.oo, self.eo, self.ee)


class RollResult(NamedTuple):
    outcome: Parity
    state: DieConfig
    probability: Fraction


def initial_config() -> DieConfig:
    """The standard die: every opposite-face pair holds one even and one odd face."""
    return DieConfig(0, PAIR_COUNT, 0)


def all_configs() -> list[DieConfig]:
    """All 10 canonical configurations, ordered lexicographically by (ee, eo, oo)."""
    return [
        DieConfig(ee, eo, PAIR_COUNT - ee - eo)
        for ee in range(PAIR_COUNT + 1)
        for eo in range(PAIR_COUNT + 1 - ee)
    ]


def parity_probability(config: DieConfig, parity: Parity) -> Fraction:
    """Chance that a single roll of ``config`` shows ``parity``."""
    config.validate()
    faces = config.even_faces if parity is Parity.EVEN else config.odd_faces
    return Fraction(faces, FACE_COUNT)


def roll_events(config: DieConfig, rule: MutationRule) -> list[RollResult]:
    """Unmerged single-roll events in fixed order.

    The order is: EE-face roll, EO-pair even face, EO-pair odd face, OO-face
    roll.  Zero-probability events are dropped but the relative order of the
    rest is preserved; the Monte Carlo sampler relies on this ordering.
    """
    config.validate()
    ee, eo, oo = config
    if rule is MutationRule.NO_MUTATION:
        after_ee = after_eo_even = after_eo_odd = after_oo = config
    elif rule is MutationRule.PARITY_COPY:
        after_ee = config
        after_eo_even = DieConfig(ee + 1, eo - 1, oo)
        after_eo_odd = DieConfig(ee, eo - 1, oo + 1)
        after_oo = config
    else:
        after_ee = DieConfig(ee - 1, eo + 1, oo)
        after_eo_even = DieConfig(ee + 1, eo - 1, oo)
        after_eo_odd = DieConfig(ee, eo - 1, oo + 1)
        after_oo = DieConfig(ee, eo + 1, oo - 1)
    events = [
        RollResult(Parity.EVEN, after_ee, Fraction(2 * ee, FACE_COUNT)),
        RollResult(Parity.EVEN, after_eo_even, Fraction(eo, FACE_COUNT)),
        RollResult(Parity.ODD, after_eo_odd, Fraction(eo, FACE_COUNT)),
        RollResult(Parity.ODD, after_oo, Fraction(2 * oo, FACE_COUNT)),
    ]
    return [event for event in events if event.probability > 0]


def transitions(config: DieConfig, rule: MutationRule) -> list[RollResult]:
    """Single-roll transitions with identical (outcome, state) events merged.

    Probabilities are positive rationals summing exactly to 1; order is
    deterministic (first occurrence in the fixed event order).
    """
    merged: dict[tuple[Parity, DieConfig], Fraction] = {}
    for outcome, state, probability in roll_events(config, rule):
        key = (outcome, state)
        merged[key] = merged.get(key, Fraction(0)) + probability
    return [RollResult(outcome, state, p) for (outcome, state), p in merged.items()]


def is_frozen(config: DieConfig, rule: MutationRule) -> bool:
    """True when no roll can change the configuration."""
    return all(result.state == config for result in transitions(config, rule))


def flip_parities(config: DieConfig) -> DieConfig:
    """Swap the roles of even and odd in a configuration."""
    return config.validate().flipped()
