"""Gaussian process regression on replicated simulator output.

Replicate spread at each design location provides a moment-based local noise
estimate; the log variances are smoothed by an internal zero-mean GP, and the
smoothed noise enters the main covariance as diag(noise / replicates).
Hyperparameters are chosen by multi-start maximum likelihood with analytic
gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import minimize

from .kernels import matern52_cross, matern52_self, matern52_grad_factor

LENGTHSCALE_BOUNDS = (1e-2, 1e2)
SIGNAL_VARIANCE_BOUNDS_REL = (1e-6, 1e2)   # relative to var(y)
JITTER_LADDER = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4)  # times signal variance
LOG2PI = np.log(2.0 * np.pi)


def _build_cov(X, lengthscales, signal_variance, noise_diag, jitter=0.0):
    K = matern52_self(X, lengthscales, signal_variance)
    idx = np.diag_indices_from(K)
    K[idx] += noise_diag + jitter
    return K


def _chol_with_ladder(X, lengthscales, signal_variance, noise_diag):
    """Lower Cholesky factor, escalating jitter until the matrix factors."""
    for rung in (0.0,) + JITTER_LADDER:
        K = _build_cov(X, lengthscales, signal_variance, noise_diag,
                       jitter=rung * signal_variance)
        try:
            return cholesky(K, lower=True), rung * signal_variance
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError(
        "covariance matrix not positive definite after jitter retries")


def log_marginal_likelihood(X, y, lengthscales, signal_variance, noise_diag,
                            jitter=0.0):
    """Gaussian log marginal likelihood with K = K_kernel + diag(noise)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    K = _build_cov(X, lengthscales, signal_variance,
                   np.asarray(noise_diag, dtype=float), jitter)
    L = cholesky(K, lower=True)
    alpha = solve_triangular(L.T, solve_triangular(L, y, lower=True), lower=False)
    return float(
        -0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * y.size * LOG2PI)


def log_marginal_likelihood_grad(X, y, lengthscales, signal_variance, noise_diag,
                                 jitter=0.0):
    """Likelihood and its gradient wrt (log lengthscales..., log signal variance)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    ls = np.asarray(lengthscales, dtype=float)
    noise_diag = np.asarray(noise_diag, dtype=float)
    n = y.size

    K = _build_cov(X, ls, signal_variance, noise_diag, jitter)
    L = cholesky(K, lower=True)
    alpha = solve_triangular(L.T, solve_triangular(L, y, lower=True), lower=False)
    ll = float(-0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * LOG2PI)

    Linv = solve_triangular(L, np.eye(n), lower=True)
    Kinv = Linv.T @ Linv
    W = np.outer(alpha, alpha) - Kinv

    # lengthscale gradients share one factor; contract (W * factor) against the
    # per-dimension squared differences via a single matrix product
    M = W * matern52_grad_factor(X, ls, signal_variance)
    Xs = X / ls
    s = M.sum(axis=1)
    MX = M @ Xs
    grad_ls = s @ (Xs * Xs) - np.sum(Xs * MX, axis=0)

    kernel_diag_removed = K.copy()
    idx = np.diag_indices_from(kernel_diag_removed)
    kernel_diag_removed[idx] -= noise_diag + jitter
    grad_sv = 0.5 * np.sum(W * kernel_diag_removed)

    return ll, np.append(grad_ls, grad_sv)


def fit_gp_mle(X, y, noise_diag, seed=0, n_restarts=8, maxiter=120):
    """Multi-start MLE over anisotropic lengthscales and signal variance.

    The first start uses a mid-range heuristic, the rest are log-uniform draws
    within the bound box; noise_diag stays fixed throughout.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    noise_diag = np.broadcast_to(np.asarray(noise_diag, dtype=float), y.shape)
    p = X.shape[1]

    var_y = float(np.var(y))
    if var_y < 1e-300:
        return np.ones(p), max(var_y, 1e-300)

    lo = np.log(np.array([LENGTHSCALE_BOUNDS[0]] * p
                         + [SIGNAL_VARIANCE_BOUNDS_REL[0] * var_y]))
    hi = np.log(np.array([LENGTHSCALE_BOUNDS[1]] * p
                         + [SIGNAL_VARIANCE_BOUNDS_REL[1] * var_y]))

    def objective(theta):
        ls = np.exp(theta[:p])
        sv = np.exp(theta[p])
        for rung in (0.0,) + JITTER_LADDER:
            try:
                ll, grad = log_marginal_likelihood_grad(
                    X, y, ls, sv, noise_diag, jitter=rung * sv)
                return -ll, -grad
            except np.linalg.LinAlgError:
                continue
        return np.inf, np.zeros(p + 1)

    rng = np.random.default_rng(seed)
    starts = [np.append(np.log(np.full(p, 0.5)), np.log(var_y))]
    for _ in range(max(0, n_restarts - 1)):
        starts.append(rng.uniform(lo, hi))

    best = None
    for x0 in starts:
        res = minimize(objective, np.clip(x0, lo, hi), jac=True,
                       method="L-BFGS-B", bounds=list(zip(lo, hi)),
                       options={"maxiter": maxiter})
        if best is None or res.fun < best.fun:
            best = res
    ls = np.exp(best.x[:p])
    sv = float(np.exp(best.x[p]))
    return ls, sv


def smooth_log_variances(X, variances, counts, seed=0, n_restarts=4):
    """Fit the internal zero-mean GP on centered log replicate variances.

    Known observation noise 2/(r-1) comes from the sampling distribution of a
    log sample variance with r replicates.
    """
    variances = np.asarray(variances, dtype=float)
    counts = np.asarray(counts)
    floor = max(float(variances.max(initial=0.0)) * 1e-9, 1e-30)
    v = np.log(np.maximum(variances, floor))
    vbar = float(v.mean())
    resid = v - vbar
    noise = 2.0 / np.maximum(counts - 1, 1)
    ls, sv = fit_gp_mle(X, resid, noise, seed=seed, n_restarts=n_restarts)
    L, jitter = _chol_with_ladder(X, ls, sv, noise)
    alpha = solve_triangular(L.T, solve_triangular(L, resid, lower=True), lower=False)
    return {
        "lengthscales": ls,
        "signal_variance": sv,
        "alpha": alpha,
        "vbar": vbar,
        "log_clip": (float(v.min()) - 3.0, float(v.max()) + 3.0),
        "floor": floor,
    }


def _predict_noise(noise_gp, X_train, Xnew):
    Ks = matern52_cross(Xnew, X_train, noise_gp["lengthscales"],
                        noise_gp["signal_variance"])
    logv = noise_gp["vbar"] + Ks @ noise_gp["alpha"]
    lo, hi = noise_gp["log_clip"]
    return np.exp(np.clip(logv, lo, hi))


@dataclass
class GPModel:
    """Fitted zero-mean GP over unique design locations; immutable after fit."""

    X: np.ndarray
    y: np.ndarray
    lengthscales: np.ndarray
    signal_variance: float
    noise_variance_per_point: np.ndarray
    replicate_counts: np.ndarray
    mean_mode: str = "zero"
    noise_mode: str = "heteroskedastic"
    noise_gp: dict | None = None
    jitter: float = 0.0
    L: np.ndarray = field(default=None, repr=False)
    alpha: np.ndarray = field(default=None, repr=False)

    @property
    def n(self):
        return self.y.size

    @property
    def p(self):
        return self.X.shape[1]

    def refactorize(self):
        noise_diag = self.noise_variance_per_point / np.maximum(self.replicate_counts, 1)
        self.L, self.jitter = _chol_with_ladder(
            self.X, self.lengthscales, self.signal_variance, noise_diag)
        self.alpha = solve_triangular(
            self.L.T, solve_triangular(self.L, self.y, lower=True), lower=False)
        return self

    def predict_noise(self, Xnew):
        Xnew = np.atleast_2d(np.asarray(Xnew, dtype=float))
        if self.noise_gp is not None:
            return _predict_noise(self.noise_gp, self.X, Xnew)
        return np.full(Xnew.shape[0], float(np.mean(self.noise_variance_per_point)))

    def predict(self, Xnew, include_noise=True, chunk=16384):
        """Posterior mean and predictive variance at new unit-cube points."""
        if self.L is None:
            raise RuntimeError("model not factorized; call refactorize() first")
        Xnew = np.atleast_2d(np.asarray(Xnew, dtype=float))
        m = Xnew.shape[0]
        mean = np.empty(m)
        var = np.empty(m)
        for start in range(0, m, chunk):
            sl = slice(start, min(start + chunk, m))
            Ks = matern52_cross(Xnew[sl], self.X, self.lengthscales,
                                self.signal_variance)
            mean[sl] = Ks @ self.alpha
            V = solve_triangular(self.L, Ks.T, lower=True)
            var[sl] = np.maximum(self.signal_variance - np.sum(V * V, axis=0), 0.0)
        if include_noise:
            var = var + self.predict_noise(Xnew)
        return mean, var

    def predict_mean(self, Xnew, chunk=65536):
        """Mean-only fast path (no triangular solve)."""
        if self.alpha is None:
            raise RuntimeError("model not factorized; call refactorize() first")
        Xnew = np.atleast_2d(np.asarray(Xnew, dtype=float))
        m = Xnew.shape[0]
        mean = np.empty(m)
        for start in range(0, m, chunk):
            sl = slice(start, min(start + chunk, m))
            Ks = matern52_cross(Xnew[sl], self.X, self.lengthscales,
                                self.signal_variance)
            mean[sl] = Ks @ self.alpha
        return mean

    def log_likelihood(self):
        noise_diag = self.noise_variance_per_point / np.maximum(self.replicate_counts, 1)
        return log_marginal_likelihood(
            self.X, self.y, self.lengthscales, self.signal_variance,
            noise_diag, jitter=self.jitter)

    def to_dict(self):
        d = {
            "X": self.X.tolist(),
            "y": self.y.tolist(),
            "lengthscales": self.lengthscales.tolist(),
            "signal_variance": self.signal_variance,
            "noise_variance_per_point": self.noise_variance_per_point.tolist(),
            "replicate_counts": np.asarray(self.replicate_counts).tolist(),
            "mean_mode": self.mean_mode,
            "noise_mode": self.noise_mode,
        }
        if self.noise_gp is not None:
            d["noise_gp"] = {
                "lengthscales": self.noise_gp["lengthscales"].tolist(),
                "signal_variance": self.noise_gp["signal_variance"],
                "alpha": self.noise_gp["alpha"].tolist(),
                "vbar": self.noise_gp["vbar"],
                "log_clip": list(self.noise_gp["log_clip"]),
                "floor": self.noise_gp["floor"],
            }
        return d

    @classmethod
    def from_dict(cls, d):
        noise_gp = None
        if d.get("noise_gp") is not None:
            g = d["noise_gp"]
            noise_gp = {
                "lengthscales": np.asarray(g["lengthscales"], dtype=float),
                "signal_variance": float(g["signal_variance"]),
                "alpha": np.asarray(g["alpha"], dtype=float),
                "vbar": float(g["vbar"]),
                "log_clip": tuple(g["log_clip"]),
                "floor": float(g["floor"]),
            }
        model = cls(
            X=np.asarray(d["X"], dtype=float),
            y=np.asarray(d["y"], dtype=float),
            lengthscales=np.asarray(d["lengthscales"], dtype=float),
            signal_variance=float(d["signal_variance"]),
            noise_variance_per_point=np.asarray(d["noise_variance_per_point"], dtype=float),
            replicate_counts=np.asarray(d["replicate_counts"]),
            mean_mode=d.get("mean_mode", "zero"),
            noise_mode=d.get("noise_mode", "heteroskedastic"),
            noise_gp=noise_gp,
        )
        return model.refactorize()


def fit_hetgp(X, means, variances, counts, noise_mode="heteroskedastic",
              mean_mode="zero", seed=0, n_restarts=8):
    """Fit the replicate-aware GP: smoothed local noise, then hyperparameter MLE."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    means = np.asarray(means, dtype=float)
    variances = np.asarray(variances, dtype=float)
    counts = np.asarray(counts)
    if X.shape[0] != means.size or means.size != variances.size:
        raise ValueError("X, means and variances must align")
    if noise_mode == "heteroskedastic":
        if np.any(counts < 2):
            raise ValueError(
                "heteroskedastic fits need >= 2 replicates per design point")
        noise_gp = smooth_log_variances(X, variances, counts, seed=seed)
        noise_per_point = _predict_noise(noise_gp, X, X)
    elif noise_mode == "homoskedastic":
        noise_gp = None
        noise_per_point = np.full(means.size, max(float(variances.mean()), 1e-30))
    else:
        raise ValueError(f"unknown noise_mode {noise_mode!r}")

    ls, sv = fit_gp_mle(X, means, noise_per_point / np.maximum(counts, 1),
                        seed=seed + 1, n_restarts=n_restarts)
    model = GPModel(
        X=X, y=means, lengthscales=ls, signal_variance=sv,
        noise_variance_per_point=noise_per_point, replicate_counts=counts,
        mean_mode=mean_mode, noise_mode=noise_mode, noise_gp=noise_gp,
    )
    return model.refactorize()
