"""Baseline calibration targets, two-parameter sensitivity surfaces, and the
index-case secondary-infection experiment."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .abm import DiseaseParams, SimOutcome, simulate_index_case
from .design import lhs_sample
from .emulator import fit_hetgp, summarize_replicates
from .policy import PolicyVector
from .population import Population
from .studies import resolve_jobs

# the five core parameters probed in sensitivity analysis, with desk ranges
CORE_PARAM_RANGES = {
    "base_transmission_rate": (0.03, 0.12),
    "presymptomatic_fraction": (0.4, 0.8),
    "initial_infection_multiplier": (0.5, 2.0),
    "symptomatic_or": (10.0, 100.0),
    "quarantine_adherence": (0.5, 1.0),
}

CORE_PARAM_BASELINES = {
    "base_transmission_rate": 0.055,
    "presymptomatic_fraction": 0.65,
    "initial_infection_multiplier": 1.0,
    "symptomatic_or": 10.0,
    "quarantine_adherence": 0.8,
}


@dataclass
class CalibrationTargets:
    underreport_ratio: float
    daily_diagnoses_curve: np.ndarray
    positivity_curve: np.ndarray  # NaN where no tests ran that day
    zero_diagnoses: bool = False


def compute_targets(outcome: SimOutcome) -> CalibrationTargets:
    """Underreporting ratio plus the confirmed-case and positivity curves."""
    zero = outcome.cumulative_diagnoses == 0
    ratio = outcome.cumulative_infections / max(1, outcome.cumulative_diagnoses)
    with np.errstate(divide="ignore", invalid="ignore"):
        positivity = np.where(
            outcome.daily_tests > 0,
            outcome.daily_diagnoses / np.maximum(outcome.daily_tests, 1),
            np.nan,
        )
    return CalibrationTargets(
        underreport_ratio=float(max(ratio, 1.0)),
        daily_diagnoses_curve=outcome.daily_diagnoses.astype(float),
        positivity_curve=positivity,
        zero_diagnoses=bool(zero),
    )


def load_observed_targets(path):
    """External target curves from a CSV with columns day, diagnoses, tests."""
    with open(path, newline="") as f:
        r = csv.DictReader(f)
        needed = {"day", "diagnoses", "tests"}
        if r.fieldnames is None or not needed <= set(r.fieldnames):
            raise ValueError(f"{path}: expected columns day, diagnoses, tests")
        rows = sorted(((int(x["day"]), float(x["diagnoses"]), float(x["tests"]))
                       for x in r))
    diagnoses = np.array([x[1] for x in rows])
    tests = np.array([x[2] for x in rows])
    with np.errstate(divide="ignore", invalid="ignore"):
        positivity = np.where(tests > 0, diagnoses / np.maximum(tests, 1), np.nan)
    return {"daily_diagnoses": diagnoses, "daily_tests": tests,
            "positivity": positivity}


@dataclass
class SensitivityConfig:
    param_pair: tuple
    lhs_n: int = 500
    reps: int = 10
    grid_resolution: int = 25
    ranges: dict = field(default_factory=lambda: dict(CORE_PARAM_RANGES))

    def __post_init__(self):
        a, b = self.param_pair
        if a == b or a not in CORE_PARAM_RANGES or b not in CORE_PARAM_RANGES:
            raise ValueError(
                f"param_pair must be two distinct names from "
                f"{sorted(CORE_PARAM_RANGES)}")


def apply_core_params(disease: DiseaseParams, policy: PolicyVector, values: dict):
    """Override the five calibration knobs onto (disease, policy) copies."""
    disease_kw = {}
    if "base_transmission_rate" in values:
        disease_kw["base_transmission_rate"] = values["base_transmission_rate"]
    if "presymptomatic_fraction" in values:
        p = values["presymptomatic_fraction"]
        disease_kw["presymptomatic_fraction"] = p
        disease_kw["asymptomatic_fraction"] = 1.0 - p
    if "initial_infection_multiplier" in values:
        disease_kw["initial_infection_multiplier"] = values["initial_infection_multiplier"]
    if "quarantine_adherence" in values:
        disease_kw["quarantine_adherence_baseline"] = values["quarantine_adherence"]
    disease = replace(disease, **disease_kw)
    policy = PolicyVector.from_dict(policy.to_dict())
    if "symptomatic_or" in values:
        policy.symptomatic_or = values["symptomatic_or"]
    return disease, policy


def _scale_core(row, names, ranges):
    return {name: ranges[name][0] + row[j] * (ranges[name][1] - ranges[name][0])
            for j, name in enumerate(names)}


def sensitivity_surface(pop: Population, config: SensitivityConfig,
                        disease: DiseaseParams | None = None, seed: int = 0,
                        n_jobs: int = 1, n_restarts: int = 4):
    """Emulated ratio/infections/diagnoses over a grid of one parameter pair.

    Runs an LHS over all five core parameters, fits a GP per outcome, then
    sweeps the chosen pair with the remaining three fixed at baseline.
    """
    disease = disease or DiseaseParams()
    names = list(CORE_PARAM_RANGES)
    design = lhs_sample(config.lhs_n, len(names), seed=seed,
                        labels=tuple(names))

    sims = _run_core_design(pop, disease, design.values, names, config,
                            seed, n_jobs)

    emulators = {}
    for outcome in ("underreport_ratio", "cumulative_infections",
                    "cumulative_diagnoses"):
        vals = sims[outcome]
        row_ids = sims["row_id"]
        _, means, variances, counts = summarize_replicates(row_ids, vals)
        offset = float(means.mean())
        gp = fit_hetgp(design.values, means - offset, variances, counts,
                       seed=seed, n_restarts=n_restarts)
        emulators[outcome] = (gp, offset)

    ia, ib = names.index(config.param_pair[0]), names.index(config.param_pair[1])
    axis = np.linspace(0.0, 1.0, config.grid_resolution)
    baseline_norm = np.array([
        (CORE_PARAM_BASELINES[n] - config.ranges[n][0])
        / (config.ranges[n][1] - config.ranges[n][0]) for n in names])
    grid = np.tile(baseline_norm, (config.grid_resolution ** 2, 1))
    mesh_a, mesh_b = np.meshgrid(axis, axis, indexing="ij")
    grid[:, ia] = mesh_a.ravel()
    grid[:, ib] = mesh_b.ravel()

    result = {
        "param_pair": tuple(config.param_pair),
        "grid_normalized": grid[:, [ia, ib]],
        "baseline_point": baseline_norm[[ia, ib]],
        "rows": [],
    }
    preds = {}
    for outcome, (gp, offset) in emulators.items():
        mean, _ = gp.predict(grid)
        preds[outcome] = mean + offset
    ra, rb = config.ranges[config.param_pair[0]], config.ranges[config.param_pair[1]]
    for i in range(grid.shape[0]):
        result["rows"].append({
            config.param_pair[0]: ra[0] + grid[i, ia] * (ra[1] - ra[0]),
            config.param_pair[1]: rb[0] + grid[i, ib] * (rb[1] - rb[0]),
            "underreport_ratio": float(preds["underreport_ratio"][i]),
            "cumulative_infections": float(preds["cumulative_infections"][i]),
            "cumulative_diagnoses": float(preds["cumulative_diagnoses"][i]),
        })
    result["emulators"] = emulators
    result["design"] = design
    return result


_CORE_WORKER = {}


def _init_core_worker(pop, disease):
    _CORE_WORKER["pop"] = pop
    _CORE_WORKER["disease"] = disease


def _run_core_point(args):
    from .abm import run_simulation
    i, values, reps, seed = args
    pop, disease = _CORE_WORKER["pop"], _CORE_WORKER["disease"]
    d_i, p_i = apply_core_params(disease, PolicyVector.baseline(), values)
    out_rows = []
    for rep in range(reps):
        out = run_simulation(pop, d_i, p_i, seed=seed + i * reps + rep)
        out_rows.append((i, compute_targets(out).underreport_ratio,
                         out.cumulative_infections, out.cumulative_diagnoses))
    return out_rows


def _run_core_design(pop, disease, design_values, names, config, seed, n_jobs):
    """Simulate the 5-parameter LHS; returns flat per-replicate outcome arrays."""
    tasks = [(i, _scale_core(row, names, config.ranges), config.reps, seed)
             for i, row in enumerate(design_values)]
    n_jobs = resolve_jobs(n_jobs)
    flat = []
    if n_jobs == 1 or len(tasks) == 1:
        _init_core_worker(pop, disease)
        for t in tasks:
            flat.extend(_run_core_point(t))
    else:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=n_jobs,
                                 initializer=_init_core_worker,
                                 initargs=(pop, disease)) as pool:
            for chunk in pool.map(_run_core_point, tasks, chunksize=4):
                flat.extend(chunk)
    return {
        "row_id": np.asarray([r[0] for r in flat]),
        "underreport_ratio": np.asarray([r[1] for r in flat], dtype=float),
        "cumulative_infections": np.asarray([r[2] for r in flat], dtype=float),
        "cumulative_diagnoses": np.asarray([r[3] for r in flat], dtype=float),
    }


def write_surface_csv(path, surface):
    rows = surface["rows"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        names = list(rows[0])
        w.writerow(names)
        for r in rows:
            w.writerow([repr(float(r[k])) for k in names])


def r0_experiment(pop: Population, disease: DiseaseParams | None = None,
                  base_transmission_rate: float | None = None,
                  n_sims: int = 10000, seed: int = 0):
    """Secondary-infection distribution from one index case, interventions off."""
    if n_sims < 1:
        raise ValueError("n_sims must be >= 1")
    disease = disease or DiseaseParams()
    if base_transmission_rate is not None:
        disease = replace(disease,
                          base_transmission_rate=base_transmission_rate)
    rng = np.random.default_rng(seed)
    counts = np.array([simulate_index_case(pop, disease, rng)
                       for _ in range(n_sims)], dtype=float)
    return {
        "base_transmission_rate": disease.base_transmission_rate,
        "n_sims": n_sims,
        "counts": counts,
        "mean": float(counts.mean()),
        "p25": float(np.percentile(counts, 25)),
        "p75": float(np.percentile(counts, 75)),
        "variance": float(counts.var(ddof=1)) if n_sims > 1 else 0.0,
    }
