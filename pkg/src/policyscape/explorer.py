"""Policy-landscape exploration over the emulator: sample, filter, rank, validate."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .design import lhs_sample
from .emulator import EmulatorModel, OutcomeEmulator
from .policy import POLICY_NAMES, PolicyVector
from .runstore import OutcomeTable
from .studies import run_study

N_POLICIES = len(POLICY_NAMES)


@dataclass
class GoalSpec:
    """Outcome ceiling plus optional per-policy intensity bounds.

    Thresholds for infections are attack-rate fractions so goals transfer
    across population sizes; constraint bounds live in normalized [0,1] units.
    """

    outcome: str = "cumulative_infections"
    threshold: float = 0.2083  # 500k of 2.4M
    constraints: dict = field(default_factory=dict)
    strict: bool = False  # True -> the 90% upper bound must clear the threshold

    def __post_init__(self):
        if self.outcome not in ("cumulative_infections", "svi_variance"):
            raise ValueError(f"unknown goal outcome {self.outcome!r}")
        if np.isnan(self.threshold):
            raise ValueError("goal threshold must be a number")
        for name, bound in self.constraints.items():
            if name not in POLICY_NAMES:
                raise ValueError(f"unknown policy constraint {name!r}")
            if not 0.0 <= bound <= 1.0:
                raise ValueError(f"constraint bound for {name} outside [0, 1]")


@dataclass
class CandidateSet:
    """Normalized candidate policies with emulated predictions."""

    values: np.ndarray                    # (n, 10)
    active_mask: np.ndarray               # (n, 10) bool
    predictions: dict = field(default_factory=dict)   # outcome -> dict of arrays
    meets_goal: np.ndarray | None = None

    @property
    def n(self):
        return self.values.shape[0]


def sample_k_active(k: int, n_per_combo: int, seed: int = 0) -> CandidateSet:
    """Independent k-dimensional LHS per combination of k active policies.

    Inactive coordinates sit exactly at baseline (0); total rows are
    n_per_combo * C(10, k).
    """
    if not 1 <= k <= N_POLICIES:
        raise ValueError("k must lie in [1, 10]")
    combos = list(combinations(range(N_POLICIES), k))
    n_total = n_per_combo * len(combos)
    values = np.zeros((n_total, N_POLICIES))
    mask = np.zeros((n_total, N_POLICIES), dtype=bool)
    for i, combo in enumerate(combos):
        block = slice(i * n_per_combo, (i + 1) * n_per_combo)
        sub = lhs_sample(n_per_combo, k, seed=seed + i,
                         labels=tuple(f"x{j}" for j in range(k)))
        for jj, j in enumerate(combo):
            values[block, j] = sub.values[:, jj]
        mask[block, list(combo)] = True
    return CandidateSet(values=values, active_mask=mask)


def predict_candidates(candidates: CandidateSet, model: EmulatorModel,
                       outcomes=("cumulative_infections",), with_intervals=False):
    """Attach emulator predictions; mean-only unless intervals are requested."""
    for name in outcomes:
        emulator: OutcomeEmulator = model.outcomes[name]
        if with_intervals:
            mean, sd, lo, hi = emulator.predict_arrays(candidates.values)
            candidates.predictions[name] = {"mean": mean, "sd": sd,
                                            "lo90": lo, "hi90": hi}
        else:
            mean = emulator.predict_mean(candidates.values)
            candidates.predictions[name] = {"mean": mean}
    return candidates


def _goal_flags(candidates: CandidateSet, goal: GoalSpec):
    if goal.outcome not in candidates.predictions:
        raise ValueError(f"no predictions stored for outcome {goal.outcome!r}")
    pred = candidates.predictions[goal.outcome]
    stat = pred["hi90"] if goal.strict else pred["mean"]
    if goal.strict and "hi90" not in pred:
        raise ValueError("strict goal needs interval predictions")
    flags = stat <= goal.threshold
    for name, bound in goal.constraints.items():
        flags &= candidates.values[:, POLICY_NAMES.index(name)] <= bound
    return flags


def fraction_meeting_goal(candidates: CandidateSet, goal: GoalSpec) -> float:
    if candidates.n == 0:
        raise ValueError("candidate set is empty")
    flags = _goal_flags(candidates, goal)
    candidates.meets_goal = flags
    return float(flags.mean())


def intensity_norm(point) -> float:
    """Sum of squared normalized intensities; 0 at baseline, <= 10 always."""
    point = np.asarray(point, dtype=float)
    return float(np.sum(point * point, axis=-1))


def mean_active_intensity(point, active_mask) -> float:
    active_mask = np.asarray(active_mask, dtype=bool)
    if not active_mask.any():
        raise ValueError("at least one policy must be active")
    return float(np.asarray(point)[active_mask].mean())


@dataclass
class RankedPolicy:
    row_id: int
    norm: float
    normalized: np.ndarray
    policy: PolicyVector
    predictions: dict


@dataclass
class RankResult:
    winners: list
    warning: str | None = None


def rank_rows(values, flags, predictions, count: int) -> RankResult:
    """Qualifying rows sorted by (intensity norm, row_id); first `count` win."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    qualifying = np.flatnonzero(np.asarray(flags, dtype=bool))
    warning = None
    if qualifying.size < count:
        warning = (f"only {qualifying.size} candidates meet the goal; "
                   f"requested {count}")
    norms = np.einsum("ij,ij->i", values[qualifying], values[qualifying])
    order = np.lexsort((qualifying, norms))
    chosen = qualifying[order][:count]
    winners = []
    for row in chosen:
        preds = {name: {k: float(v[row]) for k, v in arrs.items()}
                 for name, arrs in predictions.items()}
        winners.append(RankedPolicy(
            row_id=int(row),
            norm=intensity_norm(values[row]),
            normalized=values[row].copy(),
            policy=PolicyVector.from_normalized(values[row]),
            predictions=preds,
        ))
    return RankResult(winners=winners, warning=warning)


def rank_smallest_meeting_goal(candidates: CandidateSet, goal: GoalSpec,
                               count: int = 10) -> RankResult:
    flags = _goal_flags(candidates, goal)
    candidates.meets_goal = flags
    return rank_rows(candidates.values, flags, candidates.predictions, count)


def validate_candidates(pop, disease, ranked, reps: int = 20, base_seed: int = 0,
                        n_jobs: int = 1, model: EmulatorModel | None = None):
    """Simulate each ranked policy and report simulated vs emulated outcomes."""
    rows = []
    for item in ranked:
        normalized = (item.normalized if isinstance(item, RankedPolicy)
                      else np.asarray(item, dtype=float))
        table: OutcomeTable = run_study(pop, disease, normalized[None, :], reps,
                                        base_seed=base_seed, n_jobs=n_jobs)
        inf = table.columns["cumulative_infections"] / pop.n_agents
        var = table.columns["svi_variance"]
        row = {
            "row_id": item.row_id if isinstance(item, RankedPolicy) else None,
            "intensity_norm": intensity_norm(normalized),
            "sim_mean_attack_rate": float(inf.mean()),
            "sim_sd_attack_rate": float(inf.std(ddof=1)),
            "sim_mean_svi_variance": float(var.mean()),
            "sim_sd_svi_variance": float(var.std(ddof=1)),
            "reps": reps,
        }
        if model is not None:
            preds = model.predict(normalized[None, :])
            for name, arrs in preds.items():
                key = "attack_rate" if name == "cumulative_infections" else name
                row[f"emu_mean_{key}"] = float(arrs["mean"][0])
                row[f"emu_lo90_{key}"] = float(arrs["lo90"][0])
                row[f"emu_hi90_{key}"] = float(arrs["hi90"][0])
        rows.append(row)
    return rows


def write_candidates_csv(path, candidates: CandidateSet, goal: GoalSpec | None = None):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        header = ["row_id", *POLICY_NAMES, "active_count", "intensity_norm"]
        preds = candidates.predictions
        for name in preds:
            header.append(f"pred_mean_{name}")
        if candidates.meets_goal is not None:
            header.append("meets_goal")
        w.writerow(header)
        norms = np.einsum("ij,ij->i", candidates.values, candidates.values)
        active_counts = candidates.active_mask.sum(axis=1)
        for i in range(candidates.n):
            row = [i, *[repr(float(v)) for v in candidates.values[i]],
                   int(active_counts[i]), repr(float(norms[i]))]
            for name in preds:
                row.append(repr(float(preds[name]["mean"][i])))
            if candidates.meets_goal is not None:
                row.append(int(candidates.meets_goal[i]))
            w.writerow(row)


def write_winners_csv(path, result: RankResult):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        pred_names = (list(result.winners[0].predictions) if result.winners else [])
        header = ["rank", "row_id", "intensity_norm", *POLICY_NAMES]
        for name in pred_names:
            header += [f"pred_mean_{name}", f"pred_lo90_{name}", f"pred_hi90_{name}"]
        w.writerow(header)
        for rank, item in enumerate(result.winners, start=1):
            row = [rank, item.row_id, repr(item.norm)]
            row += [repr(float(getattr(item.policy, name))) for name in POLICY_NAMES]
            for name in pred_names:
                p = item.predictions[name]
                row += [repr(p["mean"]),
                        repr(p.get("lo90", float("nan"))),
                        repr(p.get("hi90", float("nan")))]
            w.writerow(row)


def load_winners_csv(path):
    """Normalized policy rows from a winners file (Table-1 units on disk)."""
    with open(path, newline="") as f:
        r = csv.reader(f)
        header = next(r)
        idx = {name: header.index(name) for name in POLICY_NAMES}
        rows = []
        for line in r:
            pol = PolicyVector.from_dict(
                {name: float(line[idx[name]]) for name in POLICY_NAMES})
            rows.append(pol)
    return rows
