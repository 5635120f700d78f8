"""Batch simulation runs: replicated designs with optional process parallelism.

Replicates are embarrassingly parallel; each gets seed = base_seed +
row_index * reps + replicate, so results never depend on scheduling order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .abm import DiseaseParams, N_DAYS, run_simulation
from .policy import PolicyVector
from .population import Population
from .runstore import OutcomeTable

_WORKER = {}


def _init_worker(pop, disease, days):
    _WORKER["pop"] = pop
    _WORKER["disease"] = disease
    _WORKER["days"] = days


def _run_row(args):
    row_idx, point, reps, base_seed = args
    pop, disease, days = _WORKER["pop"], _WORKER["disease"], _WORKER["days"]
    policy = PolicyVector.from_normalized(point)
    out = []
    for rep in range(reps):
        seed = base_seed + row_idx * reps + rep
        out.append((row_idx, rep, run_simulation(pop, disease, policy, seed, days=days)))
    return out


def write_daily_sidecar(path, rows):
    """Per-day diagnosis/test series for every (row, replicate) pair."""
    import csv
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["row_id", "replicate", "day", "diagnoses", "tests"])
        for row_id, rep, outcome in rows:
            for day in range(outcome.daily_diagnoses.size):
                w.writerow([row_id, rep, day,
                            int(outcome.daily_diagnoses[day]),
                            int(outcome.daily_tests[day])])


def resolve_jobs(n_jobs):
    if n_jobs in (None, 0):
        return 1
    if n_jobs < 0:
        return os.cpu_count() or 1
    return n_jobs


def run_study(pop: Population, disease: DiseaseParams, design_values,
              reps: int, base_seed: int = 0, n_jobs: int = 1,
              days: int = N_DAYS, return_rows: bool = False):
    """Simulate `reps` replicates at every normalized design row."""
    design_values = np.atleast_2d(np.asarray(design_values, dtype=float))
    tasks = [(i, design_values[i], reps, base_seed)
             for i in range(design_values.shape[0])]
    n_jobs = resolve_jobs(n_jobs)
    rows = []
    if n_jobs == 1 or len(tasks) == 1:
        _init_worker(pop, disease, days)
        for t in tasks:
            rows.extend(_run_row(t))
    else:
        with ProcessPoolExecutor(
                max_workers=n_jobs, initializer=_init_worker,
                initargs=(pop, disease, days)) as pool:
            for chunk in pool.map(_run_row, tasks, chunksize=1):
                rows.extend(chunk)
    table = OutcomeTable.from_rows(rows)
    if return_rows:
        return table, rows
    return table


def run_policy_replicates(pop: Population, disease: DiseaseParams,
                          policy: PolicyVector, reps: int, base_seed: int = 0,
                          n_jobs: int = 1, days: int = N_DAYS) -> OutcomeTable:
    """Replicate outcomes for a single policy across paired seeds."""
    return run_study(pop, disease, policy.normalize()[None, :], reps,
                     base_seed=base_seed, n_jobs=n_jobs, days=days)


def baseline_summary(pop: Population, disease: DiseaseParams, reps: int = 20,
                     base_seed: int = 0, n_jobs: int = 1, days: int = N_DAYS):
    """Baseline statistics used for reference lines and goal setting."""
    outcomes = [run_simulation(pop, disease, PolicyVector.baseline(),
                               base_seed + r, days=days) for r in range(reps)]
    infections = np.array([o.cumulative_infections for o in outcomes], dtype=float)
    variances = np.array([o.svi_variance for o in outcomes])
    rates = np.stack([o.attack_rate_by_svi for o in outcomes])
    diagnoses = np.array([o.cumulative_diagnoses for o in outcomes], dtype=float)
    return {
        "reps": reps,
        "n_agents": pop.n_agents,
        "mean_infections": float(infections.mean()),
        "sd_infections": float(infections.std(ddof=1)),
        "mean_attack_rate": float(infections.mean() / pop.n_agents),
        "mean_diagnoses": float(diagnoses.mean()),
        "underreport_ratio": float(infections.mean() / max(diagnoses.mean(), 1.0)),
        "mean_svi_variance": float(variances.mean()),
        "sd_svi_variance": float(variances.std(ddof=1)),
        "attack_rate_by_svi": rates.mean(axis=0).tolist(),
        "attack_rate_by_svi_sd": rates.std(axis=0, ddof=1).tolist(),
    }
