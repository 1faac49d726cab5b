"""Markov chain over die configurations: construction, classification, absorption.

States are the canonical configurations reachable from the initial die; the
transition matrix sums single-roll probabilities over outcomes.  The chain
has at most ten states, so everything is computed exactly: communicating
classes are strongly connected components of the positive-probability graph,
a class is closed (equivalently, recurrent in a finite chain) when no edge
leaves it, and the linear systems for absorption probabilities, expected
absorption times and stationary distributions are solved by Gauss-Jordan
elimination over rationals.

Ergodicity is taken to mean irreducibility of the reachable chain: a single
closed communicating class, i.e. every configuration can reach every other
by positive-probability rolls.  Periodicity is reported alongside but does
not affect the verdict.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable

from .core import (
    DieConfig,
    MutationRule,
    Parity,
    initial_config,
    parity_probability,
    transitions,
)
from .serialize import fraction_fields, fraction_pair


@dataclass(frozen=True)
class ChainModel:
    """Reachable states and the exact row-stochastic transition matrix."""

    rule: MutationRule
    states: tuple[DieConfig, ...]
    matrix: tuple[tuple[Fraction, ...], ...]

    def index(self, state: DieConfig) -> int:
        return self.states.index(state)

    def to_jsonable(self) -> dict:
        return {
            "rule": self.rule.value,
            "states": [list(state) for state in self.states],
            "matrix": [[fraction_pair(p) for p in row] for row in self.matrix],
        }


@dataclass(frozen=True)
class ChainClassification:
    """Communicating classes with closure, recurrence and absorption labels.

    ``classes`` partitions the state indices; ``closed`` is per class;
    ``recurrent`` and ``class_of`` are per state; ``absorbing`` lists the
    indices of closed singletons.
    """

    classes: tuple[tuple[int, ...], ...]
    closed: tuple[bool, ...]
    recurrent: tuple[bool, ...]
    class_of: tuple[int, ...]
    absorbing: tuple[int, ...]


@dataclass(frozen=True)
class ErgodicityVerdict:
    ergodic: bool
    aperiodic: bool
    witness: tuple[DieConfig, DieConfig] | None
    explanation: str


@dataclass(frozen=True)
class AbsorptionEntry:
    """One closed class: entry probability, conditional entry time, even share."""

    states: tuple[DieConfig, ...]
    probability: Fraction
    expected_steps: Fraction | None
    even_share: Fraction


@dataclass(frozen=True)
class AbsorptionReport:
    rule: MutationRule
    initial: DieConfig
    entries: tuple[AbsorptionEntry, ...]
    expected_steps: Fraction

    def probability_of(self, state: DieConfig) -> Fraction:
        """Entry probability of the closed class containing ``state``."""
        for entry in self.entries:
            if state in entry.states:
                return entry.probability
        raise KeyError(f"{tuple(state)} is not in any closed class")


def build_chain(rule: MutationRule) -> ChainModel:
    """Breadth-first closure of the transition relation from the initial die."""
    start = initial_config()
    states: list[DieConfig] = [start]
    position: dict[DieConfig, int] = {start: 0}
    cursor = 0
    while cursor < len(states):
        for result in transitions(states[cursor], rule):
            if result.state not in position:
                position[result.state] = len(states)
                states.append(result.state)
        cursor += 1
    rows = []
    for state in states:
        row = [Fraction(0)] * len(states)
        for result in transitions(state, rule):
            row[position[result.state]] += result.probability
        rows.append(tuple(row))
    return ChainModel(rule=rule, states=tuple(states), matrix=tuple(rows))


def _successors(chain: ChainModel) -> list[list[int]]:
    return [
        [j for j, probability in enumerate(row) if probability > 0]
        for row in chain.matrix
    ]


def classify(chain: ChainModel) -> ChainClassification:
    """Partition the states into communicating classes and label each.

    Classes are strongly connected components (Tarjan); a class is closed
    when no positive-probability transition leaves it, recurrent exactly
    when closed, and absorbing when it is a closed singleton.
    """
    successors = _successors(chain)
    n = len(chain.states)
    order: list[int | None] = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = itertools.count()
    components: list[tuple[int, ...]] = []

    def connect(v: int) -> None:
        order[v] = low[v] = next(counter)
        stack.append(v)
        on_stack[v] = True
        for w in successors[v]:
            if order[w] is None:
                connect(w)
                low[v] = min(low[v], low[w])
            elif on_stack[w]:
                low[v] = min(low[v], order[w])
        if low[v] == order[v]:
            component = []
            while True:
                w = stack.pop()
                on_stack[w] = False
                component.append(w)
                if w == v:
                    break
            components.append(tuple(sorted(component)))

    for v in range(n):
        if order[v] is None:
            connect(v)
    components.sort(key=min)

    class_of = [0] * n
    for c, members in enumerate(components):
        for v in members:
            class_of[v] = c
    closed = tuple(
        all(class_of[w] == c for v in members for w in successors[v])
        for c, members in enumerate(components)
    )
    recurrent = tuple(closed[class_of[v]] for v in range(n))
    absorbing = tuple(
        members[0]
        for c, members in enumerate(components)
        if closed[c] and len(members) == 1
    )
    return ChainClassification(
        classes=tuple(components),
        closed=closed,
        recurrent=recurrent,
        class_of=tuple(class_of),
        absorbing=absorbing,
    )


def _class_period(chain: ChainModel, members: tuple[int, ...]) -> int:
    """gcd of cycle lengths within one communicating class (BFS level method)."""
    inside = set(members)
    successors = _successors(chain)
    root = members[0]
    level = {root: 0}
    queue = deque([root])
    period = 0
    while queue:
        v = queue.popleft()
        for w in successors[v]:
            if w not in inside:
                continue
            if w not in level:
                level[w] = level[v] + 1
                queue.append(w)
            else:
                period = gcd(period, level[v] + 1 - level[w])
    return period


def is_ergodic(chain: ChainModel) -> ErgodicityVerdict:
    """Decide irreducibility of the reachable chain, with a witness when false."""
    classification = classify(chain)
    aperiodic = all(
        _class_period(chain, members) == 1
        for members, closed in zip(classification.classes, classification.closed)
        if closed
    )
    if len(classification.classes) == 1:
        return ErgodicityVerdict(
            ergodic=True,
            aperiodic=aperiodic,
            witness=None,
            explanation=(
                "the single reachable configuration communicates with itself"
                if len(chain.states) == 1
                else f"all {len(chain.states)} reachable configurations communicate"
            ),
        )
    closed_classes = [
        members
        for members, closed in zip(classification.classes, classification.closed)
        if closed
    ]
    if len(closed_classes) >= 2:
        # states in distinct closed classes are mutually unreachable
        u = chain.states[closed_classes[0][0]]
        v = chain.states[closed_classes[-1][0]]
    else:
        u = chain.states[closed_classes[0][0]]
        v = next(
            state
            for i, state in enumerate(chain.states)
            if i not in closed_classes[0]
        )
    return ErgodicityVerdict(
        ergodic=False,
        aperiodic=aperiodic,
        witness=(u, v),
        explanation=f"{tuple(u)} cannot reach {tuple(v)}",
    )


def _solve(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Exact Gauss-Jordan elimination; raises on a singular system."""
    n = len(matrix)
    rows = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            raise ArithmeticError("singular linear system")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        scale = rows[col][col]
        rows[col] = [x / scale for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
    return [rows[i][n] for i in range(n)]


def _stationary(chain: ChainModel, members: tuple[int, ...]) -> dict[int, Fraction]:
    """Exact stationary distribution of one closed class."""
    m = len(members)
    lookup = {v: i for i, v in enumerate(members)}
    # pi (P - I) = 0 transposed, with the last equation replaced by sum(pi) = 1
    matrix = [
        [
            chain.matrix[members[i]][members[j]] - (1 if i == j else 0)
            for i in range(m)
        ]
        for j in range(m)
    ]
    matrix[m - 1] = [Fraction(1)] * m
    rhs = [Fraction(0)] * (m - 1) + [Fraction(1)]
    solution = _solve(matrix, rhs)
    return {v: solution[lookup[v]] for v in members}


def _class_even_share(chain: ChainModel, members: tuple[int, ...]) -> Fraction:
    if len(members) == 1:
        return parity_probability(chain.states[members[0]], Parity.EVEN)
    stationary = _stationary(chain, members)
    return sum(
        (
            weight * parity_probability(chain.states[v], Parity.EVEN)
            for v, weight in stationary.items()
        ),
        Fraction(0),
    )


def absorption(chain: ChainModel) -> AbsorptionReport:
    """First-step analysis of eventual entry into each closed class.

    For each closed class C the entry probabilities h solve (I - Q) h = r,
    where Q is the transient-to-transient block and r the one-step mass into
    C.  Conditional expected entry times come from the same factorization
    via E[T | enter C] = E[T * 1{enter C}] / P(enter C); the unconditional
    expected time solves (I - Q) u = 1.
    """
    classification = classify(chain)
    n = len(chain.states)
    transient = [v for v in range(n) if not classification.recurrent[v]]
    t_index = {v: i for i, v in enumerate(transient)}
    identity_minus_q = [
        [
            Fraction(1 if i == j else 0) - chain.matrix[v][w]
            for j, w in enumerate(transient)
        ]
        for i, v in enumerate(transient)
    ]

    start = chain.index(initial_config())
    closed_classes = [
        members
        for members, closed in zip(classification.classes, classification.closed)
        if closed
    ]

    if transient:
        ones = [Fraction(1)] * len(transient)
        steps = _solve(identity_minus_q, ones)
    else:
        steps = []
    expected_steps = steps[t_index[start]] if start in t_index else Fraction(0)

    entries = []
    for members in closed_classes:
        inside = set(members)
        if transient:
            one_step = [
                sum((chain.matrix[v][w] for w in members), Fraction(0))
                for v in transient
            ]
            hitting = _solve(identity_minus_q, one_step)
        else:
            hitting = []

        def h(v: int) -> Fraction:
            if v in inside:
                return Fraction(1)
            if classification.recurrent[v]:
                return Fraction(0)
            return hitting[t_index[v]]

        if start in t_index:
            probability = hitting[t_index[start]]
        else:
            probability = Fraction(1 if start in inside else 0)

        if start in t_index and probability > 0:
            # E[T * 1{enter C}] solves (I - Q) w = P h restricted to transients
            weighted = [
                sum(
                    (chain.matrix[v][w] * h(w) for w in range(n)),
                    Fraction(0),
                )
                for v in transient
            ]
            conditional = _solve(identity_minus_q, weighted)[t_index[start]] / probability
        elif probability > 0:
            conditional = Fraction(0)
        else:
            conditional = None

        entries.append(
            AbsorptionEntry(
                states=tuple(chain.states[v] for v in members),
                probability=probability,
                expected_steps=conditional,
                even_share=_class_even_share(chain, members),
            )
        )

    return AbsorptionReport(
        rule=chain.rule,
        initial=chain.states[start],
        entries=tuple(entries),
        expected_steps=expected_steps,
    )


def long_run_share(
    chain: ChainModel, class_states: DieConfig | Iterable[DieConfig]
) -> Fraction:
    """Long-run share of even outcomes inside a closed class.

    ``class_states`` may be a single configuration (an absorbing state) or
    the full membership of a closed class; anything that is not a closed
    class of the chain is rejected.
    """
    states = tuple(class_states)
    if len(states) == 3 and all(isinstance(x, int) for x in states):
        wanted = {DieConfig(*states)}
    else:
        wanted = {DieConfig(*state) for state in states}
    classification = classify(chain)
    for members, closed in zip(classification.classes, classification.closed):
        if {chain.states[v] for v in members} == wanted:
            if not closed:
                raise ValueError(f"class {sorted(map(tuple, wanted))} is not closed")
            return _class_even_share(chain, members)
    raise ValueError(f"{sorted(map(tuple, wanted))} is not a communicating class")


def chain_report(rule: MutationRule) -> dict:
    """Full JSON-ready report: states, matrix, classes, verdict, absorption."""
    chain = build_chain(rule)
    classification = classify(chain)
    verdict = is_ergodic(chain)
    report = absorption(chain)
    return {
        **chain.to_jsonable(),
        "classes": [
            {
                "states": [list(chain.states[v]) for v in members],
                "closed": classification.closed[c],
                "absorbing": classification.closed[c] and len(members) == 1,
            }
            for c, members in enumerate(classification.classes)
        ],
        "verdict": {
            "ergodic": verdict.ergodic,
            "aperiodic": verdict.aperiodic,
            "witness": (
                [list(verdict.witness[0]), list(verdict.witness[1])]
                if verdict.witness
                else None
            ),
            "explanation": verdict.explanation,
        },
        "absorption": {
            "initial": list(report.initial),
            "expected_steps": fraction_fields(report.expected_steps),
            "entries": [
                {
                    "states": [list(state) for state in entry.states],
                    "probability": fraction_fields(entry.probability),
                    "expected_steps": (
                        fraction_fields(entry.expected_steps)
                        if entry.expected_steps is not None
                        else None
                    ),
                    "even_share": fraction_fields(entry.even_share),
                }
                for entry in report.entries
            ],
        },
    }
