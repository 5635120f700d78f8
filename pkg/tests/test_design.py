import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from policyscape.design import (
    DesignMatrix,
    augment,
    default_augmentation,
    lhs_sample,
    scale_to_policy,
)
from policyscape.policy import POLICY_NAMES, POLICY_RANGES, PolicyVector


def test_single_point():
    d = lhs_sample(1, 10, seed=0)
    assert d.values.shape == (1, 10)
    assert (d.values >= 0).all() and (d.values < 1).all()


@pytest.mark.parametrize("n", [10, 100, 1500])
def test_stratification_property(n):
    d = lhs_sample(n, 10, seed=3)
    for j in range(10):
        strata = np.floor(n * d.values[:, j]).astype(int)
        assert np.array_equal(np.sort(strata), np.arange(n))


def test_seed_reproducibility():
    a = lhs_sample(100, 10, seed=42)
    b = lhs_sample(100, 10, seed=42)
    np.testing.assert_array_equal(a.values, b.values)
    c = lhs_sample(100, 10, seed=43)
    assert not np.array_equal(a.values, c.values)


def test_column_span():
    d = lhs_sample(20, 10, seed=5)
    assert (d.values.min(axis=0) <= 0.05).all()
    assert (d.values.max(axis=0) >= 0.95).all()


def test_augment_to_headline_design():
    d = lhs_sample(1489, 10, seed=1)
    full = augment(d, default_augmentation())
    assert full.n == 1500
    np.testing.assert_array_equal(full.values[1489], np.zeros(10))
    np.testing.assert_array_equal(full.values[-1], np.eye(10)[-1])


def test_augment_empty_is_identity():
    d = lhs_sample(5, 10, seed=1)
    assert augment(d, []) is d


def test_augment_dimension_mismatch():
    d = lhs_sample(5, 10, seed=1)
    with pytest.raises(ValueError):
        augment(d, np.zeros((1, 3)))


def test_scale_baseline_and_extremes():
    base = scale_to_policy(np.zeros(10))
    assert base == PolicyVector.baseline()
    assert base.pcr_mult == 1.0
    assert base.ct_capacity == 6000
    assert base.symptomatic_or == 10.0
    assert base.quarantine_test_or == 1.0
    assert base.quarantine_adherence_ct == 0.7
    assert base.mask_duration_ct == 0
    assert base.mask_adherence == 0.0

    j_mask = POLICY_NAMES.index("mask_adherence")
    top = scale_to_policy(np.eye(10)[j_mask])
    assert top.mask_adherence == pytest.approx(0.2)

    j_dur = POLICY_NAMES.index("mask_duration_ct")
    mid = np.zeros(10)
    mid[j_dur] = 0.5
    assert scale_to_policy(mid).mask_duration_ct == 7


@settings(max_examples=50)
@given(st.lists(st.floats(0, 1), min_size=10, max_size=10))
def test_normalize_scale_round_trip(point):
    x = np.array(point)
    pol = scale_to_policy(x)
    back = pol.normalize()
    for j, name in enumerate(POLICY_NAMES):
        lo, hi, integer = POLICY_RANGES[name]
        tol = 0.5 / (hi - lo) + 1e-12 if integer else 1e-12
        assert abs(back[j] - x[j]) <= tol


def test_policy_validation():
    p = PolicyVector.baseline()
    p.pcr_mult = 11.0
    with pytest.raises(ValueError, match="pcr_mult"):
        p.validate()


def test_csv_round_trip(tmp_path):
    d = lhs_sample(25, 10, seed=9)
    path = tmp_path / "design.csv"
    d.to_csv(path)
    loaded = DesignMatrix.from_csv(path)
    np.testing.assert_array_equal(loaded.values, d.values)
    assert loaded.labels == POLICY_NAMES

    scaled_path = tmp_path / "scaled.csv"
    d.to_csv(scaled_path, scaled=True)
    import csv as _csv
    with open(scaled_path) as f:
        rows = list(_csv.reader(f))
    assert rows[0] == ["row_id", *POLICY_NAMES]
    assert float(rows[1][1]) >= 1.0  # pcr_mult in Table-1 units
