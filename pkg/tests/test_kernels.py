import math

import numpy as np
import pytest

from policyscape.emulator import matern52, matern52_cross


def reference_matern52(x, y, ls, sv):
    """Independent closed-form evaluation in pure Python."""
    r = math.sqrt(sum(((a - b) / l) ** 2 for a, b, l in zip(x, y, ls)))
    u = math.sqrt(5.0) * r
    return sv * (1.0 + u + u * u / 3.0) * math.exp(-u)


def test_kernel_at_zero_distance():
    x = np.array([0.3, 0.7])
    assert matern52(x, x, [1.0, 1.0], 2.5) == pytest.approx(2.5, rel=1e-15)


def test_kernel_decay():
    near = matern52([0.0], [0.1], [1.0], 1.0)
    far = matern52([0.0], [50.0], [1.0], 1.0)
    assert far < 1e-10
    assert near > far


def test_unit_distance_closed_form():
    expected = (1.0 + math.sqrt(5.0) + 5.0 / 3.0) * math.exp(-math.sqrt(5.0))
    got = matern52([0.0], [1.0], [1.0], 1.0)
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(0.52399, abs=1e-5)


def test_kernel_oracle_1000_random_pairs():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        p = rng.integers(1, 11)
        x = rng.uniform(-2, 2, p)
        y = rng.uniform(-2, 2, p)
        ls = rng.uniform(0.05, 5.0, p)
        sv = rng.uniform(0.1, 10.0)
        expected = reference_matern52(x, y, ls, sv)
        assert matern52(x, y, ls, sv) == pytest.approx(expected, rel=1e-12)


def test_cross_matrix_matches_pointwise():
    rng = np.random.default_rng(1)
    X = rng.uniform(size=(7, 3))
    Y = rng.uniform(size=(5, 3))
    ls = np.array([0.5, 1.0, 2.0])
    K = matern52_cross(X, Y, ls, 1.7)
    for i in range(7):
        for j in range(5):
            assert K[i, j] == pytest.approx(
                reference_matern52(X[i], Y[j], ls, 1.7), rel=1e-10, abs=1e-300)


def test_symmetry_and_psd():
    rng = np.random.default_rng(2)
    X = rng.uniform(size=(30, 4))
    K = matern52_cross(X, X, np.full(4, 0.8), 1.0)
    assert np.allclose(K, K.T, atol=1e-12)
    w = np.linalg.eigvalsh((K + K.T) / 2)
    assert w.min() > -1e-8
