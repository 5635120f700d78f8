"""Latin hypercube designs over the unit cube, with augmentation and policy scaling."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .policy import POLICY_NAMES, PolicyVector


@dataclass
class DesignMatrix:
    values: np.ndarray                     # (n, p) in [0, 1]
    labels: tuple = POLICY_NAMES

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if len(self.labels) != self.values.shape[1]:
            raise ValueError("label count must match design dimension")
        if self.values.size and (self.values.min() < 0 or self.values.max() > 1):
            raise ValueError("design entries must lie in [0, 1]")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    def to_csv(self, path, scaled=False):
        """Write rows with a leading row_id column; scaled=True denormalizes policies."""
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["row_id", *self.labels])
            for i, row in enumerate(self.values):
                if scaled:
                    row = PolicyVector.from_normalized(row).as_array()
                w.writerow([i, *[repr(float(v)) for v in row]])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as f:
            r = csv.reader(f)
            header = next(r)
            if header[0] != "row_id":
                raise ValueError(f"{path}: expected leading row_id column")
            labels = tuple(header[1:])
            rows = []
            for line_no, row in enumerate(r, start=2):
                if len(row) != len(header):
                    raise ValueError(f"{path}: line {line_no}: expected {len(header)} fields")
                rows.append([float(v) for v in row[1:]])
        return cls(values=np.asarray(rows), labels=labels)


def lhs_sample(n: int, p: int, seed: int, labels=None) -> DesignMatrix:
    """Plain Latin hypercube: one uniformly jittered point per stratum per dimension."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be >= 1")
    rng = np.random.default_rng(seed)
    values = np.empty((n, p))
    for j in range(p):
        perm = rng.permutation(n)
        values[:, j] = (perm + rng.uniform(size=n)) / n
    if labels is None:
        labels = POLICY_NAMES if p == len(POLICY_NAMES) else tuple(f"x{j}" for j in range(p))
    return DesignMatrix(values=values, labels=labels)


def default_augmentation(p: int = len(POLICY_NAMES)):
    """Baseline point plus one point per dimension at its maximum."""
    return np.vstack([np.zeros(p), np.eye(p)])


def augment(design: DesignMatrix, extra_points) -> DesignMatrix:
    extra = np.atleast_2d(np.asarray(extra_points, dtype=float))
    if extra.size == 0:
        return design
    if extra.shape[1] != design.p:
        raise ValueError(
            f"augmentation points have {extra.shape[1]} dims, design has {design.p}")
    return DesignMatrix(values=np.vstack([design.values, extra]), labels=design.labels)


def scale_to_policy(row) -> PolicyVector:
    """Affine map of a unit-cube point onto the ten policy ranges."""
    return PolicyVector.from_normalized(row)
