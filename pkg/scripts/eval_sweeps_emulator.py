"""Evaluate emulator variants against the frozen sweeps cache.

Reports, per variant: CV-RMSE, sweep Spearman per lever, validation coverage,
and the per-point bias/interval diagnostics driving coverage.

Usage: python3 scripts/eval_sweeps_emulator.py [CACHE_DIR]
"""

import sys

import numpy as np
from scipy.stats import spearmanr

from policyscape.emulator import summarize_replicates
from policyscape.fitting import fit_emulator_model
from policyscape.policy import POLICY_NAMES
from policyscape.runstore import load_study

SWEEP_LEVERS = ("mask_adherence", "ct_capacity", "vaccine_threshold")


def load_cache(cache_dir):
    design, outcomes, manifest = load_study(f"{cache_dir}/train")
    n_agents = manifest.config["n_agents"]
    sweeps = {}
    for name in SWEEP_LEVERS:
        sdesign, souts, _ = load_study(f"{cache_dir}/sweep_{name}")
        _, means, variances, counts = summarize_replicates(
            souts.columns["row_id"],
            souts.columns["cumulative_infections"] / n_agents)
        sweeps[name] = (sdesign.values, means, variances)
    return design, outcomes, n_agents, sweeps


def evaluate(tag, model, sweeps):
    emulator = model.outcomes["cumulative_infections"]
    inside_total, n_total = 0, 0
    print(f"--- {tag}")
    gbm = emulator.gbm
    if gbm is not None:
        print(f"    gbm: {gbm.hyperparameters}")
    print(f"    gp lengthscales: {np.round(emulator.gp.lengthscales, 3)}")
    print(f"    gp signal sd: {np.sqrt(emulator.gp.signal_variance):.4f}")
    for name, (X, sim_means, sim_vars) in sweeps.items():
        mean, sd, lo, hi = emulator.predict_arrays(X)
        rho = spearmanr(np.arange(11), mean).statistic
        inside = (sim_means >= lo) & (sim_means <= hi)
        inside_total += inside.sum()
        n_total += inside.size
        bias = mean - sim_means
        print(f"    {name:18s} rho={rho:+.3f} inside={inside.sum()}/11 "
              f"bias(max abs)={np.abs(bias).max():.4f} "
              f"halfwidth(med)={np.median(hi - lo) / 2:.4f}")
    print(f"    coverage: {inside_total}/{n_total}"
          f" = {inside_total / n_total:.2f}")
    return inside_total / n_total


def main(cache_dir):
    design, outcomes, n_agents, sweeps = load_cache(cache_dir)

    variants = {
        "current (depth 2-3)": {},
        "additive-lean grid": {"gbm_grid": {"max_depth": (1, 2),
                                            "learning_rate": (0.05, 0.1),
                                            "min_leaf": (5, 15)}},
        "stumps only": {"gbm_grid": {"max_depth": (1,),
                                     "learning_rate": (0.05, 0.1),
                                     "min_leaf": (5,)}},
    }
    for tag, kw in variants.items():
        model = fit_emulator_model(design.values, outcomes, n_agents,
                                   folds=10, seed=0, n_restarts=8,
                                   max_trees=300, **kw)
        evaluate(tag, model, sweeps)

    # GP-only ceiling (diagnostic, not a candidate architecture)
    from policyscape.emulator import fit_outcome_emulator, EmulatorModel
    _, means, variances, counts = summarize_replicates(
        outcomes.columns["row_id"],
        outcomes.columns["cumulative_infections"] / n_agents)
    emu = fit_outcome_emulator(design.values, means - means.mean(), variances,
                               counts, use_gbm=False, seed=0, n_restarts=8)
    offset = means.mean()

    class Shifted:
        gbm = None
        gp = emu.gp

        def predict_arrays(self, X):
            m, s, lo, hi = emu.predict_arrays(X)
            return m + offset, s, lo + offset, hi + offset

    shifted = Shifted()
    model = EmulatorModel(outcomes={"cumulative_infections": shifted},
                          metadata={})
    evaluate("gp-only (centered)", model, sweeps)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "/tmp/sweeps_cache")
