"""End-to-end experiment at desk scale: generate, simulate, fit, explore,
rank, validate. Writes every artifact under an output directory.

Usage: python3 scripts/run_full_pipeline.py OUT_DIR [--quick]

--quick shrinks every count for a fast smoke run (~2 min); the default
mirrors the desk-scale experiment (300-point design x 10 replicates, ~15 min
on two cores).
"""

import json
import sys
import time

import numpy as np

from policyscape.abm import DiseaseParams
from policyscape.design import augment, default_augmentation, lhs_sample
from policyscape.explorer import (
    GoalSpec,
    fraction_meeting_goal,
    predict_candidates,
    rank_smallest_meeting_goal,
    sample_k_active,
    validate_candidates,
    write_winners_csv,
)
from policyscape.fitting import fit_emulator_model
from policyscape.population import PopulationConfig, generate_population
from policyscape.runstore import RunManifest, write_study
from policyscape.studies import baseline_summary, run_study

N_JOBS = 2


def main(out_dir, quick=False):
    t0 = time.time()
    n_agents = 5000 if quick else 20000
    n_lhs = 49 if quick else 289
    reps = 3 if quick else 10
    n_candidates = 2000 if quick else 100_000

    pop = generate_population(PopulationConfig(
        n_agents=n_agents, n_tracts=40 if not quick else 10, seed=7))
    pop.save(f"{out_dir}/population.json")
    disease = DiseaseParams()

    print("baseline replicates...")
    base = baseline_summary(pop, disease, reps=20, base_seed=0)
    with open(f"{out_dir}/baseline.json", "w") as f:
        json.dump(base, f, indent=2)
    print(f"  attack rate {base['mean_attack_rate']:.3f}, "
          f"underreporting {base['underreport_ratio']:.2f}")

    print("training study...")
    design = augment(lhs_sample(n_lhs, 10, seed=101), default_augmentation())
    outcomes = run_study(pop, disease, design.values, reps=reps,
                         base_seed=5000, n_jobs=N_JOBS)
    write_study(f"{out_dir}/study", design, outcomes,
                RunManifest("pipeline-study", {"n_agents": n_agents}, []),
                overwrite=True)

    print("fitting emulator...")
    model = fit_emulator_model(design.values, outcomes, n_agents,
                               seed=0, n_restarts=4 if quick else 8,
                               folds=6 if quick else 10,
                               max_trees=80 if quick else 300)
    model.save(f"{out_dir}/model.json")

    print("exploring the k=10 landscape...")
    goal = GoalSpec(threshold=0.7 * base["mean_attack_rate"],
                    constraints={"ct_capacity": 0.5, "mask_adherence": 0.5})
    candidates = sample_k_active(10, n_candidates, seed=42)
    predict_candidates(candidates, model)
    frac = fraction_meeting_goal(candidates, goal)
    print(f"  {100 * frac:.2f}% of {candidates.n} candidates meet the goal")

    result = rank_smallest_meeting_goal(candidates, goal, count=10)
    write_winners_csv(f"{out_dir}/winners.csv", result)

    print("validating winners against the simulator...")
    rows = validate_candidates(pop, disease, result.winners,
                               reps=5 if quick else 20, base_seed=900,
                               n_jobs=N_JOBS, model=model)
    with open(f"{out_dir}/validation.json", "w") as f:
        json.dump(rows, f, indent=2, default=float)
    below = sum(r["sim_mean_attack_rate"] < base["mean_attack_rate"]
                for r in rows)
    var_below = sum(r["sim_mean_svi_variance"] < base["mean_svi_variance"]
                    for r in rows)
    print(f"  {below}/{len(rows)} winners below baseline infections, "
          f"{var_below}/{len(rows)} below baseline SVI variance")
    print(f"done in {time.time() - t0:.0f}s; artifacts in {out_dir}")


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    import os
    os.makedirs(sys.argv[1], exist_ok=True)
    main(sys.argv[1], quick="--quick" in sys.argv)
