"""Monte Carlo behaviour: determinism, seed mixing, and statistical agreement.

Statistical assertions use 4-standard-deviation (or 99.99% quantile) bounds,
so each carries a false-failure chance of order 1e-4 under the fixed seeds
baked in here; the seeds make the suite deterministic in practice.
"""

from fractions import Fraction
from math import sqrt

import pytest

from paritydie import (
    MutationRule,
    absorption_frequencies,
    batch,
    derive_seed,
    max_multinomial_deviation,
    path_chi_square,
    path_distribution,
    simulate_path,
    transitions,
)

COPY = MutationRule.PARITY_COPY
NONE = MutationRule.NO_MUTATION

# chi-square 99.99% quantiles by degrees of freedom
CHI2_9999 = {3: 21.107513466160444, 7: 29.87750390922517, 15: 44.26322494417528}


def test_derive_seed_is_stable_and_scattered():
    assert derive_seed(0, 0) == derive_seed(0, 0)
    seeds = {derive_seed(m, i) for m in (0, 1, 2**64 - 1) for i in range(100)}
    assert len(seeds) == 300
    assert all(0 <= s < 2**64 for s in seeds)
    with pytest.raises(ValueError):
        derive_seed(0, -1)


def test_empty_simulation():
    run = simulate_path(NONE, 0, 1234)
    assert run.tosses == ()
    assert run.trajectory == ((0, 3, 0),)
    with pytest.raises(ValueError):
        simulate_path(NONE, -1, 0)


def test_simulation_is_deterministic():
    a = simulate_path(COPY, 50, 99)
    b = simulate_path(COPY, 50, 99)
    assert a == b
    assert simulate_path(COPY, 50, 100) != a


@pytest.mark.parametrize("rule", list(MutationRule))
def test_trajectory_follows_transition_relation(rule):
    run = simulate_path(rule, 40, 7)
    assert run.trajectory[0] == (0, 3, 0)
    for toss, before, after in zip(run.tosses, run.trajectory, run.trajectory[1:]):
        legal = {
            (r.outcome, r.state): r.probability for r in transitions(before, rule)
        }
        assert legal.get((toss, after), 0) > 0


def test_monopoly_locks_the_sequence():
    # find a path that freezes at the all-even monopoly, then check it stays even
    for seed in range(200):
        run = simulate_path(COPY, 60, seed)
        if (3, 0, 0) in run.trajectory:
            hit = run.trajectory.index((3, 0, 0))
            assert all(t.char == "E" for t in run.tosses[hit:])
            break
    else:
        pytest.fail("no run reached the all-even monopoly in 200 seeds")


def test_batch_matches_individual_runs():
    summary = batch(COPY, 5, 40, master_seed=11)
    sequences = [simulate_path(COPY, 5, derive_seed(11, i)).sequence() for i in range(40)]
    for sequence in set(sequences):
        assert summary.sequences[sequence] == sequences.count(sequence)
    assert summary.runs == 40
    assert sum(summary.even_counts.values()) == 40
    assert sum(summary.final_configs.values()) == 40


def test_batch_is_parallelism_independent():
    serial = batch(COPY, 4, 1000, master_seed=5, workers=1)
    threaded = batch(COPY, 4, 1000, master_seed=5, workers=4)
    assert serial == threaded


def test_batch_argument_validation():
    with pytest.raises(ValueError):
        batch(COPY, 3, 0, 0)
    with pytest.raises(ValueError):
        batch(COPY, -1, 10, 0)
    with pytest.raises(ValueError):
        batch(COPY, 3, 10, 0, workers=0)


def test_sequence_tracking_cap():
    assert batch(COPY, 3, 10, 0).sequences is not None
    assert batch(COPY, 13, 10, 0).sequences is None
    assert batch(COPY, 13, 10, 0, track_sequences=True).sequences is not None
    with pytest.raises(ValueError):
        batch(COPY, 13, 10, 0).sequence_frequencies()


def test_single_toss_frequency_is_balanced():
    runs = 20_000
    summary = batch(COPY, 1, runs, master_seed=3)
    frequency = summary.sequences.get("E", 0) / runs
    assert abs(frequency - 0.5) <= 4 * sqrt(0.25 / runs)


def test_standard_die_moments():
    runs = 4000
    summary = batch(NONE, 100, runs, master_seed=17)
    assert abs(summary.even_count_mean() - 50) <= 4 * 5 / sqrt(runs)
    assert abs(summary.even_count_sd() - 5) <= 0.5


def test_long_copy_runs_end_frozen():
    summary = batch(COPY, 60, 500, master_seed=23)
    assert summary.frozen_runs == 500
    assert set(map(tuple, summary.final_configs)) <= {
        (3, 0, 0),
        (2, 0, 1),
        (1, 0, 2),
        (0, 0, 3),
    }


@pytest.mark.parametrize("rule", list(MutationRule))
def test_depth_three_chi_square(rule):
    summary = batch(rule, 3, 100_000, master_seed=41)
    statistic, dof = path_chi_square(summary, path_distribution(rule, 3))
    assert statistic < CHI2_9999[dof]


def test_depth_four_deviations():
    summary = batch(COPY, 4, 100_000, master_seed=43)
    exact = path_distribution(COPY, 4)
    assert max_multinomial_deviation(summary, exact) <= 4
    statistic, dof = path_chi_square(summary, exact)
    assert statistic < CHI2_9999[dof]


def test_chi_square_input_validation():
    summary = batch(COPY, 3, 100, master_seed=1)
    with pytest.raises(ValueError):
        path_chi_square(summary, path_distribution(COPY, 4))
    with pytest.raises(ValueError):
        path_chi_square(summary, path_distribution(NONE, 3))
    untracked = batch(COPY, 13, 10, master_seed=1)
    with pytest.raises(ValueError):
        path_chi_square(untracked, path_distribution(COPY, 3))


def test_absorption_frequencies_small():
    sample = absorption_frequencies(COPY, 20_000, master_seed=29)
    assert sample.unabsorbed == 0
    assert sum(sample.counts.values()) == 20_000
    for state, exact in {
        (3, 0, 0): 0.125,
        (2, 0, 1): 0.375,
        (1, 0, 2): 0.375,
        (0, 0, 3): 0.125,
    }.items():
        se = sqrt(exact * (1 - exact) / 20_000)
        assert abs(sample.frequency_of(state) - exact) <= 4 * se
    assert abs(sample.mean_steps() - 5.5) < 0.2
    again = absorption_frequencies(COPY, 20_000, master_seed=29)
    assert again == sample


def test_absorption_frequencies_without_frozen_states():
    sample = absorption_frequencies(MutationRule.INCREMENT, 5, 0, max_steps=50)
    assert sample.unabsorbed == 5
    assert sample.counts == {}


def test_no_mutation_absorbs_immediately():
    sample = absorption_frequencies(NONE, 10, 0)
    assert sample.counts == {(0, 3, 0): 10}
    assert sample.mean_steps() == 0


def test_batch_summary_jsonable():
    payload = batch(COPY, 2, 50, master_seed=9).to_jsonable()
    assert payload["rule"] == "copy"
    assert sum(payload["even_counts"].values()) == 50
    assert sum(payload["sequences"].values()) == 50
    assert sum(payload["final_configs"].values()) == 50
