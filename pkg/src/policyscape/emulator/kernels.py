"""Matern nu=5/2 covariance with per-dimension lengthscales."""

from __future__ import annotations

import numpy as np

SQRT5 = np.sqrt(5.0)


def matern52(x, y, lengthscales, signal_variance):
    """Covariance between two points.

    With r the lengthscale-weighted Euclidean distance, returns
    sigma^2 * (1 + sqrt(5) r + 5 r^2 / 3) * exp(-sqrt(5) r).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    ls = np.broadcast_to(np.asarray(lengthscales, dtype=float), x.shape)
    r = np.sqrt(np.sum(((x - y) / ls) ** 2))
    u = SQRT5 * r
    return signal_variance * (1.0 + u + u * u / 3.0) * np.exp(-u)


def _scaled_sqdist(X, Y, lengthscales):
    A = X / lengthscales
    B = Y / lengthscales
    d2 = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def matern52_cross(X, Y, lengthscales, signal_variance):
    """Cross-covariance matrix between row sets X (n,p) and Y (m,p)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    u = SQRT5 * np.sqrt(_scaled_sqdist(X, Y, np.asarray(lengthscales, dtype=float)))
    K = (1.0 + u + u * u / 3.0) * np.exp(-u)
    K *= signal_variance
    return K


def matern52_self(X, lengthscales, signal_variance):
    """Symmetric covariance of X against itself, exact sigma^2 diagonal."""
    K = matern52_cross(X, X, lengthscales, signal_variance)
    np.fill_diagonal(K, signal_variance)
    return K


def matern52_grad_factor(X, lengthscales, signal_variance):
    """Shared factor of dK/dlog(lengthscale_j).

    dK/dlog(l_j) = factor * sqdiff_j with factor = sigma^2 (5/3)(1+u)exp(-u)
    and sqdiff_j = (x_ij - x_kj)^2 / l_j^2, so callers contract per dimension.
    """
    u = SQRT5 * np.sqrt(_scaled_sqdist(X, X, lengthscales))
    return signal_variance * (5.0 / 3.0) * (1.0 + u) * np.exp(-u)
