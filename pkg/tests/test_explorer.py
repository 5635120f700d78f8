from math import comb

import numpy as np
import pytest

from policyscape.explorer import (
    CandidateSet,
    GoalSpec,
    fraction_meeting_goal,
    intensity_norm,
    mean_active_intensity,
    rank_smallest_meeting_goal,
    sample_k_active,
)
from policyscape.policy import POLICY_NAMES


def attach_fake_predictions(candidates, means):
    candidates.predictions["cumulative_infections"] = {
        "mean": np.asarray(means, dtype=float)}
    return candidates


def test_sample_k_active_structure():
    cs = sample_k_active(1, 5, seed=0)
    assert cs.n == 5 * 10
    assert ((cs.values != 0).sum(axis=1) == 1).all()
    assert (cs.active_mask.sum(axis=1) == 1).all()

    cs3 = sample_k_active(3, 2, seed=0)
    assert cs3.n == 2 * comb(10, 3)
    assert (cs3.active_mask.sum(axis=1) == 3).all()
    # inactive coordinates exactly zero
    assert (cs3.values[~cs3.active_mask] == 0.0).all()

    cs10 = sample_k_active(10, 50, seed=1)
    assert cs10.n == 50
    with pytest.raises(ValueError):
        sample_k_active(0, 5)
    with pytest.raises(ValueError):
        sample_k_active(11, 5)


def test_sample_k_active_deterministic():
    a = sample_k_active(2, 4, seed=9)
    b = sample_k_active(2, 4, seed=9)
    np.testing.assert_array_equal(a.values, b.values)


def test_fraction_meeting_goal_bounds():
    cs = sample_k_active(2, 10, seed=0)
    attach_fake_predictions(cs, np.linspace(0.1, 0.9, cs.n))
    assert fraction_meeting_goal(cs, GoalSpec(threshold=np.inf)) == 1.0
    assert fraction_meeting_goal(cs, GoalSpec(threshold=0.05)) == 0.0
    mid = fraction_meeting_goal(cs, GoalSpec(threshold=0.5))
    assert 0.0 < mid < 1.0


def test_constraints_shrink_fraction():
    cs = sample_k_active(10, 500, seed=3)
    attach_fake_predictions(cs, np.full(cs.n, 0.1))
    free = fraction_meeting_goal(cs, GoalSpec(threshold=0.2))
    constrained = fraction_meeting_goal(
        cs, GoalSpec(threshold=0.2,
                     constraints={"ct_capacity": 0.5, "mask_adherence": 0.5}))
    assert free == 1.0
    assert constrained < free
    # monotone in threshold
    low = fraction_meeting_goal(cs, GoalSpec(threshold=0.05))
    assert low <= free


def test_intensity_norm_values_and_brute_force():
    assert intensity_norm(np.zeros(10)) == 0.0
    e = np.zeros(10)
    e[4] = 1.0
    assert intensity_norm(e) == 1.0
    two = np.zeros(10)
    two[1] = two[7] = 0.5
    assert intensity_norm(two) == pytest.approx(0.5, rel=1e-15)

    rng = np.random.default_rng(0)
    for _ in range(1000):
        x = rng.uniform(size=10)
        brute = sum(float(v) ** 2 for v in x)
        assert intensity_norm(x) == pytest.approx(brute, rel=1e-12)
    assert intensity_norm(np.ones(10)) <= 10.0


def test_mean_active_intensity():
    x = np.zeros(10)
    mask = np.zeros(10, dtype=bool)
    x[2], x[5] = 0.2, 0.6
    mask[2] = mask[5] = True
    assert mean_active_intensity(x, mask) == pytest.approx(0.4)
    assert mean_active_intensity(np.ones(10), np.ones(10, bool)) == 1.0
    single = np.zeros(10)
    single[3] = 0.7
    m = np.zeros(10, bool)
    m[3] = True
    assert mean_active_intensity(single, m) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        mean_active_intensity(x, np.zeros(10, bool))


def test_rank_smallest_ordering_and_ties():
    values = np.zeros((4, 10))
    values[0, 0] = 0.7   # norm 0.49
    values[1, 1] = 0.3   # norm 0.09 -> first
    values[2, 2] = 0.7   # norm 0.49 tie with row 0 -> row 0 wins by id
    values[3, 3] = 0.9   # norm 0.81, excluded by prediction
    cs = CandidateSet(values=values, active_mask=values > 0)
    attach_fake_predictions(cs, [0.1, 0.1, 0.1, 0.9])
    result = rank_smallest_meeting_goal(cs, GoalSpec(threshold=0.5), count=3)
    assert [w.row_id for w in result.winners] == [1, 0, 2]
    assert result.warning is None

    short = rank_smallest_meeting_goal(cs, GoalSpec(threshold=0.5), count=10)
    assert len(short.winners) == 3
    assert "3 candidates" in short.warning

    none = rank_smallest_meeting_goal(cs, GoalSpec(threshold=0.01), count=2)
    assert none.winners == []
    assert none.warning is not None


def test_rank_respects_constraints():
    rng = np.random.default_rng(2)
    cs = sample_k_active(10, 1000, seed=5)
    attach_fake_predictions(cs, rng.uniform(0, 0.2, cs.n))
    goal = GoalSpec(threshold=0.15,
                    constraints={"ct_capacity": 0.5, "mask_adherence": 0.5})
    result = rank_smallest_meeting_goal(cs, goal, count=10)
    j_ct = POLICY_NAMES.index("ct_capacity")
    j_mask = POLICY_NAMES.index("mask_adherence")
    for w in result.winners:
        assert w.normalized[j_ct] <= 0.5
        assert w.normalized[j_mask] <= 0.5
        # Table-1 units: ct <= 33000-equivalent, adherence <= 0.1
        assert w.policy.ct_capacity <= 33000
        assert w.policy.mask_adherence <= 0.1


def test_rank_rerun_is_identical():
    rng = np.random.default_rng(4)
    cs = sample_k_active(3, 20, seed=7)
    attach_fake_predictions(cs, rng.uniform(0, 1, cs.n))
    a = rank_smallest_meeting_goal(cs, GoalSpec(threshold=0.6), count=5)
    b = rank_smallest_meeting_goal(cs, GoalSpec(threshold=0.6), count=5)
    assert [w.row_id for w in a.winners] == [w.row_id for w in b.winners]


def test_empty_candidate_set_rejected():
    cs = CandidateSet(values=np.zeros((0, 10)),
                      active_mask=np.zeros((0, 10), dtype=bool))
    with pytest.raises(ValueError):
        fraction_meeting_goal(cs, GoalSpec())


def test_goal_spec_validation():
    with pytest.raises(ValueError):
        GoalSpec(outcome="deaths")
    with pytest.raises(ValueError):
        GoalSpec(constraints={"nonexistent": 0.5})
    with pytest.raises(ValueError):
        GoalSpec(constraints={"ct_capacity": 1.5})
