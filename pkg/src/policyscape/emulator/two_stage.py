"""Two-stage emulation: boosted-tree mean plus GP residual, with 90% intervals."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .gbm import TreeEnsemble, fit_gbm
from .gp import GPModel, fit_hetgp

MODEL_SCHEMA_VERSION = 1

Z90 = 1.6449  # two-sided 90% Gaussian quantile


@dataclass
class Prediction:
    mean: float
    sd: float
    lo90: float
    hi90: float


def _interval(mean, sd):
    return mean - Z90 * sd, mean + Z90 * sd


@dataclass
class OutcomeEmulator:
    """Optional tree-ensemble mean with a GP over what the trees leave behind."""

    gp: GPModel
    gbm: TreeEnsemble | None = None

    def predict_arrays(self, X, include_noise=True):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        mean, var = self.gp.predict(X, include_noise=include_noise)
        if self.gbm is not None:
            mean = mean + self.gbm.predict(X)
        sd = np.sqrt(var)
        lo, hi = _interval(mean, sd)
        return mean, sd, lo, hi

    def predict_mean(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        mean = self.gp.predict_mean(X)
        if self.gbm is not None:
            mean = mean + self.gbm.predict(X)
        return mean

    def predict_one(self, x) -> Prediction:
        mean, sd, lo, hi = self.predict_arrays(np.atleast_2d(x))
        return Prediction(float(mean[0]), float(sd[0]), float(lo[0]), float(hi[0]))

    def to_dict(self):
        d = {"gp": self.gp.to_dict()}
        if self.gbm is not None:
            d["gbm"] = self.gbm.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            gp=GPModel.from_dict(d["gp"]),
            gbm=TreeEnsemble.from_dict(d["gbm"]) if "gbm" in d else None,
        )


def summarize_replicates(row_ids, values):
    """Per-design-point mean, sample variance (ddof=1) and replicate count."""
    row_ids = np.asarray(row_ids)
    values = np.asarray(values, dtype=float)
    unique, inverse = np.unique(row_ids, return_inverse=True)
    counts = np.bincount(inverse)
    sums = np.bincount(inverse, weights=values)
    means = sums / counts
    sq = np.bincount(inverse, weights=(values - means[inverse]) ** 2)
    variances = sq / np.maximum(counts - 1, 1)
    return unique, means, variances, counts


def fit_outcome_emulator(X, means, variances, counts, use_gbm=True,
                         noise_mode="heteroskedastic", folds=10, seed=0,
                         n_restarts=8, max_trees=300, gbm_grid=None):
    """Fit one outcome: GBM on replicate means (optional), hetGP on the rest."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    means = np.asarray(means, dtype=float)
    gbm = None
    targets = means
    if use_gbm:
        gbm = fit_gbm(X, means, folds=folds, seed=seed, max_trees=max_trees,
                      grid=gbm_grid)
        targets = means - gbm.predict(X)
    gp = fit_hetgp(X, targets, variances, counts, noise_mode=noise_mode,
                   mean_mode="external" if use_gbm else "zero",
                   seed=seed, n_restarts=n_restarts)
    return OutcomeEmulator(gp=gp, gbm=gbm)


@dataclass
class EmulatorModel:
    """Per-outcome emulators plus the metadata needed to interpret them."""

    outcomes: dict
    metadata: dict

    def predict(self, X, outcome_names=None, include_noise=True):
        names = outcome_names or list(self.outcomes)
        out = {}
        for name in names:
            if name not in self.outcomes:
                raise KeyError(f"no emulator for outcome {name!r}")
            mean, sd, lo, hi = self.outcomes[name].predict_arrays(
                X, include_noise=include_noise)
            out[name] = {"mean": mean, "sd": sd, "lo90": lo, "hi90": hi}
        return out

    def save(self, path):
        doc = {
            "schema_version": MODEL_SCHEMA_VERSION,
            "metadata": self.metadata,
            "outcomes": {k: v.to_dict() for k, v in self.outcomes.items()},
        }
        with open(path, "w") as f:
            json.dump(doc, f)

    @classmethod
    def load(cls, path):
        with open(path) as f:
            doc = json.load(f)
        version = doc.get("schema_version")
        if version is None or version > MODEL_SCHEMA_VERSION:
            raise ValueError(f"unsupported model schema_version {version!r}")
        return cls(
            outcomes={k: OutcomeEmulator.from_dict(v)
                      for k, v in doc["outcomes"].items()},
            metadata=doc.get("metadata", {}),
        )


def validate_emulator(emulator: OutcomeEmulator, X_heldout, sim_means):
    """Coverage report of held-out simulator means against 90% intervals."""
    X_heldout = np.atleast_2d(np.asarray(X_heldout, dtype=float))
    sim_means = np.asarray(sim_means, dtype=float)
    if X_heldout.shape[0] == 0:
        raise ValueError("held-out set is empty")
    if X_heldout.shape[0] != sim_means.size:
        raise ValueError("held-out inputs and outcomes must align")
    mean, sd, lo, hi = emulator.predict_arrays(X_heldout)
    inside = (sim_means >= lo) & (sim_means <= hi)
    return {
        "n": int(sim_means.size),
        "rmse": float(np.sqrt(np.mean((mean - sim_means) ** 2))),
        "mean_interval_width": float(np.mean(hi - lo)),
        "coverage90": float(np.mean(inside)),
    }


def write_predictions_csv(path, means, sds, los, his, row_ids=None):
    n = len(means)
    row_ids = row_ids if row_ids is not None else range(n)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["row_id", "mean", "sd", "lo90", "hi90"])
        for i, m, s, lo, hi in zip(row_ids, means, sds, los, his):
            w.writerow([i, repr(float(m)), repr(float(s)),
                        repr(float(lo)), repr(float(hi))])
