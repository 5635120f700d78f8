"""Fit the per-outcome emulators from a replicated study."""

from __future__ import annotations

import numpy as np

from .emulator import EmulatorModel, fit_outcome_emulator, summarize_replicates
from .runstore import OutcomeTable


def fit_emulator_model(design_values, outcomes: OutcomeTable, n_agents: int,
                       folds: int = 10, seed: int = 0, n_restarts: int = 8,
                       max_trees: int = 300, gbm_grid: dict | None = None,
                       noise_mode: str = "heteroskedastic") -> EmulatorModel:
    """Two-stage fit for cumulative infections, zero-mean GP for SVI variance.

    Infections are converted to attack-rate fractions so goals and
    predictions transfer across population sizes.
    """
    design_values = np.atleast_2d(np.asarray(design_values, dtype=float))
    row_ids = outcomes.columns["row_id"]
    ids, means, variances, counts = summarize_replicates(
        row_ids, outcomes.columns["cumulative_infections"] / n_agents)
    if not np.array_equal(ids, np.arange(design_values.shape[0])):
        raise ValueError("outcome row_ids must cover design rows 0..n-1")

    emu_inf = fit_outcome_emulator(
        design_values, means, variances, counts, use_gbm=True,
        noise_mode=noise_mode, folds=folds, seed=seed,
        n_restarts=n_restarts, max_trees=max_trees, gbm_grid=gbm_grid)

    _, v_means, v_vars, v_counts = summarize_replicates(
        row_ids, outcomes.columns["svi_variance"])
    emu_var = fit_outcome_emulator(
        design_values, v_means, v_vars, v_counts, use_gbm=False,
        noise_mode=noise_mode, seed=seed + 1, n_restarts=n_restarts)

    return EmulatorModel(
        outcomes={"cumulative_infections": emu_inf, "svi_variance": emu_var},
        metadata={
            "n_agents": int(n_agents),
            "design_rows": int(design_values.shape[0]),
            "replicates": int(counts[0]),
            "outcome_units": {"cumulative_infections": "attack_rate",
                              "svi_variance": "variance"},
        },
    )
