"""Synthetic desk-scale population: tracts with SVI, households, schools, workplaces."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np

SCHEMA_VERSION = 1

AGE_GROUPS = ("0-4", "5-17", "18-49", "50-64", "65+")
AGE_SHARES = (0.06, 0.17, 0.42, 0.19, 0.16)

# vaccine-eligible age groups (5-17 and older)
ELIGIBLE_AGE_GROUPS = (1, 2, 3, 4)

SVI_BIN_LABELS = ("0-0.25", "0.25-0.5", "0.5-0.75", "0.75-1.0")


def quarantine_probability(adherence, svi):
    """Probability an agent quarantines on symptoms or a positive test.

    Blends behavioral adherence with the social vulnerability of the home
    tract: more vulnerable tracts (svi near 1) are less able to quarantine.
    """
    return 0.5 * adherence + 0.5 * (1.0 - svi)


def svi_bin(svi):
    """Quartile bin index 0..3 for an SVI value; bins half-open, top closed."""
    if np.isscalar(svi):
        if svi >= 0.75:
            return 3
        return int(svi / 0.25)
    svi = np.asarray(svi)
    return np.minimum((svi / 0.25).astype(np.int64), 3)


@dataclass
class PopulationConfig:
    n_agents: int = 20000
    n_tracts: int = 40
    mean_household_size: float = 2.5
    school_size: int = 150
    workplace_size: int = 20
    svi_distribution: str = "uniform"  # or "empirical-weights"
    quarantine_adherence: float = 0.8
    seed: int = 0

    def validate(self):
        if self.n_tracts < 4:
            raise ValueError(
                "n_tracts must be >= 4: populations are stratified into four "
                "SVI quartile bins and each bin needs at least one tract"
            )
        if self.n_agents < self.n_tracts:
            raise ValueError("n_agents must be >= n_tracts")
        if self.mean_household_size < 1 or self.school_size < 1 or self.workplace_size < 1:
            raise ValueError("household/school/workplace sizes must be >= 1")
        if self.svi_distribution not in ("uniform", "empirical-weights"):
            raise ValueError(f"unknown svi_distribution {self.svi_distribution!r}")
        if not 0.0 <= self.quarantine_adherence <= 1.0:
            raise ValueError("quarantine_adherence must be in [0, 1]")


@dataclass
class Population:
    """Column-oriented agent population, immutable once generated."""

    config: PopulationConfig
    tract_svi: np.ndarray        # (n_tracts,) float
    home_tract: np.ndarray       # (n,) int32
    age_group: np.ndarray        # (n,) int8, index into AGE_GROUPS
    household: np.ndarray        # (n,) int32
    venue: np.ndarray            # (n,) int32, -1 when no school/workplace
    quarantine_prob: np.ndarray  # (n,) float
    n_households: int = 0
    n_venues: int = 0

    @property
    def n_agents(self):
        return self.home_tract.shape[0]

    @property
    def n_tracts(self):
        return self.tract_svi.shape[0]

    def tract_agent_counts(self):
        return np.bincount(self.home_tract, minlength=self.n_tracts)

    def agent_svi(self):
        return self.tract_svi[self.home_tract]

    def tract_svi_bins(self):
        return svi_bin(self.tract_svi)

    def content_hash(self):
        h = hashlib.sha256()
        h.update(json.dumps(asdict(self.config), sort_keys=True).encode())
        for arr in (self.tract_svi, self.home_tract, self.age_group,
                    self.household, self.venue, self.quarantine_prob):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()

    def to_json_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "config": asdict(self.config),
            "seed": self.config.seed,
            "tracts": [
                {"id": i, "svi": float(self.tract_svi[i]), "agent_count": int(c)}
                for i, c in enumerate(self.tract_agent_counts())
            ],
            "agents": {
                "id": list(range(self.n_agents)),
                "age_group": self.age_group.tolist(),
                "home_tract": self.home_tract.tolist(),
                "household": self.household.tolist(),
                "venue": self.venue.tolist(),
                "quarantine_prob": self.quarantine_prob.tolist(),
            },
        }

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f)

    @classmethod
    def from_json_dict(cls, d):
        version = d.get("schema_version")
        if version is None or version > SCHEMA_VERSION:
            raise ValueError(f"unsupported population schema_version {version!r}")
        config = PopulationConfig(**d["config"])
        agents = d["agents"]
        svi = np.array([t["svi"] for t in sorted(d["tracts"], key=lambda t: t["id"])])
        return cls(
            config=config,
            tract_svi=svi,
            home_tract=np.asarray(agents["home_tract"], dtype=np.int32),
            age_group=np.asarray(agents["age_group"], dtype=np.int8),
            household=np.asarray(agents["household"], dtype=np.int32),
            venue=np.asarray(agents["venue"], dtype=np.int32),
            quarantine_prob=np.asarray(agents["quarantine_prob"], dtype=float),
            n_households=int(np.max(agents["household"])) + 1,
            n_venues=int(max(np.max(agents["venue"]) + 1, 0)),
        )

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_json_dict(json.load(f))


def _draw_tract_svi(rng, n_tracts, distribution):
    """Tract SVI values with all four quartile bins guaranteed occupied.

    The first four tracts are stratified one per bin; the rest follow the
    requested distribution.
    """
    stratified = np.array([rng.uniform(0.25 * b, 0.25 * (b + 1)) for b in range(4)])
    rest = n_tracts - 4
    if distribution == "uniform":
        tail = rng.uniform(0.0, 1.0, size=rest)
    else:
        # mildly right-shifted stand-in for an empirically weighted SVI profile
        tail = rng.beta(1.6, 1.2, size=rest)
    return np.concatenate([stratified, tail])


def _draw_tract_sizes(rng, n_agents, n_tracts):
    """Tract populations near n_agents/n_tracts, all within +/-20% of the mean."""
    mean = n_agents / n_tracts
    weights = rng.uniform(0.92, 1.08, size=n_tracts)
    sizes = np.maximum(1, np.round(n_agents * weights / weights.sum()).astype(int))
    # fix rounding drift one agent at a time, staying inside the +/-20% band
    lo, hi = int(np.ceil(mean * 0.8)), int(np.floor(mean * 1.2))
    diff = n_agents - sizes.sum()
    order = rng.permutation(n_tracts)
    i = 0
    while diff != 0:
        t = order[i % n_tracts]
        if diff > 0 and sizes[t] < hi:
            sizes[t] += 1
            diff -= 1
        elif diff < 0 and sizes[t] > max(1, lo):
            sizes[t] -= 1
            diff += 1
        i += 1
    return sizes


def _build_households(rng, tract_sizes, mean_household_size):
    """Partition each tract's agents into households, Poisson-ish sizes clipped to [1, 8]."""
    home_tract = []
    household = []
    next_household = 0
    for tract, size in enumerate(tract_sizes):
        remaining = int(size)
        while remaining > 0:
            hh = 1 + int(rng.poisson(mean_household_size - 1.0))
            hh = min(max(hh, 1), 8, remaining)
            home_tract.extend([tract] * hh)
            household.extend([next_household] * hh)
            next_household += 1
            remaining -= hh
    return (np.asarray(home_tract, dtype=np.int32),
            np.asarray(household, dtype=np.int32),
            next_household)


def generate_population(config: PopulationConfig) -> Population:
    """Generate a reproducible synthetic population for the given config."""
    config.validate()
    rng = np.random.default_rng(config.seed)

    tract_svi = _draw_tract_svi(rng, config.n_tracts, config.svi_distribution)
    tract_sizes = _draw_tract_sizes(rng, config.n_agents, config.n_tracts)
    home_tract, household, n_households = _build_households(
        rng, tract_sizes, config.mean_household_size)

    n = config.n_agents
    age_group = rng.choice(len(AGE_GROUPS), size=n, p=AGE_SHARES).astype(np.int8)

    venue = np.full(n, -1, dtype=np.int32)
    next_venue = 0

    # schools: 5-17 agents grouped within their home tract
    for tract in range(config.n_tracts):
        kids = np.flatnonzero((home_tract == tract) & (age_group == 1))
        kids = rng.permutation(kids)
        for start in range(0, kids.size, config.school_size):
            chunk = kids[start:start + config.school_size]
            venue[chunk] = next_venue
            next_venue += 1

    # workplaces: 18-64 agents pooled across tracts, 60% participation
    workers = np.flatnonzero((age_group == 2) | (age_group == 3))
    workers = rng.permutation(workers)[: int(round(0.6 * workers.size))]
    for start in range(0, workers.size, config.workplace_size):
        chunk = workers[start:start + config.workplace_size]
        venue[chunk] = next_venue
        next_venue += 1

    quarantine_prob = quarantine_probability(
        config.quarantine_adherence, tract_svi[home_tract])

    return Population(
        config=config,
        tract_svi=tract_svi,
        home_tract=home_tract,
        age_group=age_group,
        household=household,
        venue=venue,
        quarantine_prob=quarantine_prob,
        n_households=n_households,
        n_venues=next_venue,
    )
