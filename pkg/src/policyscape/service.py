"""Read-only HTTP service over a fitted emulator: predict, search, baseline."""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .emulator import EmulatorModel
from .explorer import (
    GoalSpec,
    fraction_meeting_goal,
    predict_candidates,
    rank_smallest_meeting_goal,
    sample_k_active,
)
from .policy import POLICY_DESCRIPTIONS, POLICY_NAMES, POLICY_RANGES, PolicyVector
from .population import SVI_BIN_LABELS
from .runstore import load_study

OUTCOME_NAMES = ("cumulative_infections", "svi_variance")

# Table-1 style range labels, echoed in validation errors
RANGE_LABELS = {
    "pcr_mult": "1x - 10x",
    "antigen_mult": "1x - 10x",
    "vaccine_threshold": "0 - 0.75 of each age group",
    "booster_threshold": "0 - 0.5 of each age group",
    "ct_capacity": "6,000 - 60,000",
    "symptomatic_or": "10 - 100",
    "quarantine_test_or": "1 - 100",
    "quarantine_adherence_ct": "0.7 - 1.0",
    "mask_duration_ct": "0 - 14",
    "mask_adherence": "0 - 0.2",
}


class PredictRequest(BaseModel):
    policy: dict[str, float] | None = None
    point: list[float] | None = None
    normalized: bool = False
    outcomes: list[str] = Field(default_factory=lambda: list(OUTCOME_NAMES))


class SearchRequest(BaseModel):
    goal_attack_rate: float
    outcome: str = "cumulative_infections"
    constraints: dict[str, float] = Field(default_factory=dict)
    k: int = 10
    n_samples: int = 100_000
    count: int = Field(default=10, ge=1)
    seed: int = 0
    strict: bool = False


def _baseline_payload(study_dir):
    design, outcomes, manifest = load_study(study_dir)
    zero_rows = np.flatnonzero(~design.values.any(axis=1))
    if zero_rows.size == 0:
        raise ValueError("baseline study has no all-baseline design row")
    row = zero_rows[0]
    mask = np.asarray(outcomes.columns["row_id"]) == row
    n_agents = manifest.config.get("n_agents")
    if not n_agents:
        raise ValueError("baseline study manifest lacks n_agents")
    inf = outcomes.columns["cumulative_infections"][mask] / n_agents
    var = outcomes.columns["svi_variance"][mask]
    rates = np.stack([outcomes.columns[f"attack_svi_{b}"][mask] for b in range(4)])
    return {
        "n_agents": int(n_agents),
        "replicates": int(mask.sum()),
        "attack_rate_mean": float(inf.mean()),
        "attack_rate_sd": float(inf.std(ddof=1)) if mask.sum() > 1 else 0.0,
        "svi_variance_mean": float(var.mean()),
        "svi_variance_sd": float(var.std(ddof=1)) if mask.sum() > 1 else 0.0,
        "attack_rate_by_svi": [
            {"bin": SVI_BIN_LABELS[b], "mean": float(rates[b].mean()),
             "sd": float(rates[b].std(ddof=1)) if mask.sum() > 1 else 0.0}
            for b in range(4)
        ],
    }


def _policy_from_request(req: PredictRequest) -> PolicyVector:
    if req.point is not None and req.policy is not None:
        raise HTTPException(400, detail="provide either policy or point, not both")
    if req.point is not None:
        if req.normalized:
            if len(req.point) != len(POLICY_NAMES):
                raise HTTPException(400, detail="point needs 10 coordinates")
            try:
                return PolicyVector.from_normalized(req.point)
            except ValueError as e:
                raise HTTPException(400, detail=str(e))
        raise HTTPException(400, detail="raw points must set normalized=true")
    values = req.policy or {}
    unknown = set(values) - set(POLICY_NAMES)
    if unknown:
        raise HTTPException(400, detail=f"unknown policy fields {sorted(unknown)}")
    policy = PolicyVector.from_dict(values)
    for name in POLICY_NAMES:
        lo, hi, _ = POLICY_RANGES[name]
        v = getattr(policy, name)
        if not lo <= v <= hi:
            raise HTTPException(
                400, detail=f"{name}={v} outside range {RANGE_LABELS[name]}")
    return policy


def create_app(model_path, baseline_dir=None, sample_cap=500_000,
               cors_origin="*") -> FastAPI:
    app = FastAPI(title="policyscape", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=[cors_origin], allow_methods=["*"],
        allow_headers=["*"])

    state = {"model": None, "baseline": None, "cap": sample_cap}
    try:
        state["model"] = EmulatorModel.load(model_path)
    except (FileNotFoundError, ValueError):
        state["model"] = None
    if baseline_dir:
        try:
            state["baseline"] = _baseline_payload(baseline_dir)
        except (FileNotFoundError, ValueError):
            state["baseline"] = None

    def _model() -> EmulatorModel:
        if state["model"] is None:
            raise HTTPException(503, detail="model not loaded")
        return state["model"]

    @app.get("/health")
    def health():
        return {"status": "ok", "model_loaded": state["model"] is not None,
                "baseline_loaded": state["baseline"] is not None}

    @app.get("/policies")
    def policies():
        out = []
        for name in POLICY_NAMES:
            lo, hi, integer = POLICY_RANGES[name]
            out.append({
                "name": name,
                "description": POLICY_DESCRIPTIONS[name],
                "low": lo,
                "high": hi,
                "integer": integer,
                "baseline": getattr(PolicyVector.baseline(), name),
                "range_label": RANGE_LABELS[name],
            })
        return {"policies": out}

    @app.get("/baseline")
    def baseline():
        if state["baseline"] is None:
            raise HTTPException(503, detail="baseline study not loaded")
        return state["baseline"]

    @app.post("/predict")
    def predict(req: PredictRequest):
        model = _model()
        unknown = set(req.outcomes) - set(OUTCOME_NAMES)
        if unknown:
            raise HTTPException(400, detail=f"unknown outcomes {sorted(unknown)}")
        policy = _policy_from_request(req)
        x = policy.normalize()[None, :]
        preds = model.predict(x, outcome_names=list(req.outcomes))
        return {
            "policy": policy.to_dict(),
            "normalized": policy.normalize().tolist(),
            "predictions": {
                name: {k: float(v[0]) for k, v in arrs.items()}
                for name, arrs in preds.items()},
        }

    @app.post("/search")
    def search(req: SearchRequest):
        model = _model()
        if req.n_samples > state["cap"]:
            raise HTTPException(
                413, detail=f"n_samples {req.n_samples} above cap {state['cap']}")
        if not 1 <= req.k <= 10:
            raise HTTPException(400, detail="k must lie in [1, 10]")
        try:
            goal = GoalSpec(outcome=req.outcome, threshold=req.goal_attack_rate,
                            constraints=req.constraints, strict=req.strict)
        except ValueError as e:
            raise HTTPException(400, detail=str(e))
        from math import comb
        per = max(1, req.n_samples // comb(10, req.k))
        candidates = sample_k_active(req.k, per, seed=req.seed)
        predict_candidates(candidates, model, outcomes=(req.outcome,),
                           with_intervals=True)
        frac = fraction_meeting_goal(candidates, goal)
        result = rank_smallest_meeting_goal(candidates, goal, count=req.count)
        winners = []
        for w in result.winners:
            winners.append({
                "row_id": w.row_id,
                "intensity_norm": w.norm,
                "policy": w.policy.to_dict(),
                "normalized": w.normalized.tolist(),
                "predictions": w.predictions,
            })
        return {
            "fraction_meeting_goal": frac,
            "n_candidates": candidates.n,
            "winners": winners,
            "warning": result.warning,
        }

    return app
