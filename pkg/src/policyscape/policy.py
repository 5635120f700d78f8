"""The ten intervention levers and their canonical unit-cube normalization.

Lever ranges run from baseline (lower bound, the status quo) to a massive
increase (upper bound). Absolute quantities (contact-tracing capacity) are
expressed in full-scale units for a 2.4M-agent region and rescaled by the
engine to the simulated population size.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

FULL_SCALE_POPULATION = 2_400_000

# name -> (low, high, integer-valued)
POLICY_RANGES = {
    "pcr_mult": (1.0, 10.0, False),
    "antigen_mult": (1.0, 10.0, False),
    "vaccine_threshold": (0.0, 0.75, False),
    "booster_threshold": (0.0, 0.5, False),
    "ct_capacity": (6000.0, 60000.0, True),
    "symptomatic_or": (10.0, 100.0, False),
    "quarantine_test_or": (1.0, 100.0, False),
    "quarantine_adherence_ct": (0.7, 1.0, False),
    "mask_duration_ct": (0.0, 14.0, True),
    "mask_adherence": (0.0, 0.2, False),
}

POLICY_NAMES = tuple(POLICY_RANGES)

POLICY_DESCRIPTIONS = {
    "pcr_mult": "PCR tests per day, multiplier from baseline",
    "antigen_mult": "Antigen tests per day, multiplier from baseline",
    "vaccine_threshold": "Minimum share of each age group (5+) vaccinated",
    "booster_threshold": "Minimum share of each age group (5+) boosted",
    "ct_capacity": "Contacts traced per day (full-scale units)",
    "symptomatic_or": "Odds ratio to test symptomatic agents",
    "quarantine_test_or": "Odds ratio to test quarantined agents",
    "quarantine_adherence_ct": "Quarantine adherence when contact traced",
    "mask_duration_ct": "Days masked after being contact traced",
    "mask_adherence": "Population-wide multiplier on mask efficacy",
}


@dataclass
class PolicyVector:
    pcr_mult: float = 1.0
    antigen_mult: float = 1.0
    vaccine_threshold: float = 0.0
    booster_threshold: float = 0.0
    ct_capacity: int = 6000
    symptomatic_or: float = 10.0
    quarantine_test_or: float = 1.0
    quarantine_adherence_ct: float = 0.7
    mask_duration_ct: int = 0
    mask_adherence: float = 0.0

    @classmethod
    def baseline(cls):
        return cls()

    def validate(self):
        for name, (lo, hi, _) in POLICY_RANGES.items():
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ValueError(
                    f"policy {name}={v} outside allowed range [{lo:g}, {hi:g}]")

    def as_array(self):
        return np.array([float(getattr(self, f.name)) for f in fields(self)])

    def normalize(self):
        """Map each lever affinely onto [0, 1] with 0 at the baseline bound."""
        out = np.empty(len(POLICY_NAMES))
        for j, name in enumerate(POLICY_NAMES):
            lo, hi, _ = POLICY_RANGES[name]
            out[j] = (getattr(self, name) - lo) / (hi - lo)
        return out

    @classmethod
    def from_normalized(cls, point):
        """Inverse of normalize(); integer levers rounded to nearest value."""
        point = np.asarray(point, dtype=float)
        if point.shape != (len(POLICY_NAMES),):
            raise ValueError(f"expected {len(POLICY_NAMES)} coordinates, got {point.shape}")
        if np.any(point < 0) or np.any(point > 1):
            raise ValueError("normalized policy coordinates must lie in [0, 1]")
        kwargs = {}
        for j, name in enumerate(POLICY_NAMES):
            lo, hi, integer = POLICY_RANGES[name]
            v = lo + point[j] * (hi - lo)
            kwargs[name] = int(round(v)) if integer else v
        return cls(**kwargs)

    def to_dict(self):
        return {name: getattr(self, name) for name in POLICY_NAMES}

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(POLICY_NAMES)
        if unknown:
            raise ValueError(f"unknown policy fields: {sorted(unknown)}")
        merged = {**cls.baseline().to_dict(), **d}
        for name in ("ct_capacity", "mask_duration_ct"):
            merged[name] = int(round(merged[name]))
        return cls(**merged)


def scale_rows_to_policies(rows):
    """Denormalize a batch of unit-cube rows into PolicyVector objects."""
    return [PolicyVector.from_normalized(r) for r in np.atleast_2d(rows)]
