"""Build and persist the sweeps training study plus held-out validation runs.

Lets emulator experiments iterate against frozen simulator output instead of
re-running 3,300 simulations each time.

Usage: python3 scripts/build_sweeps_cache.py [CACHE_DIR]
"""

import sys

import numpy as np

from policyscape.abm import DiseaseParams
from policyscape.design import augment, default_augmentation, lhs_sample
from policyscape.policy import POLICY_NAMES
from policyscape.population import PopulationConfig, generate_population
from policyscape.runstore import RunManifest, write_study
from policyscape.studies import run_study

SWEEP_LEVERS = ("mask_adherence", "ct_capacity", "vaccine_threshold")


def main(cache_dir):
    pop = generate_population(PopulationConfig(n_agents=20000, n_tracts=40, seed=7))
    disease = DiseaseParams()

    design = augment(lhs_sample(289, 10, seed=101), default_augmentation())
    outcomes = run_study(pop, disease, design.values, reps=10, base_seed=5000,
                         n_jobs=2)
    write_study(f"{cache_dir}/train", design, outcomes,
                RunManifest("sweeps-train", {"n_agents": pop.n_agents}, []),
                overwrite=True)

    levels = np.linspace(0, 1, 11)
    from policyscape.design import DesignMatrix
    for name in SWEEP_LEVERS:
        j = POLICY_NAMES.index(name)
        sweep = np.zeros((11, 10))
        sweep[:, j] = levels
        sims = run_study(pop, disease, sweep, reps=10,
                         base_seed=90_000 + j * 1000, n_jobs=2)
        write_study(f"{cache_dir}/sweep_{name}", DesignMatrix(values=sweep), sims,
                    RunManifest(f"sweep-{name}", {"n_agents": pop.n_agents}, []),
                    overwrite=True)
    print(f"cached study + sweeps under {cache_dir}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "/tmp/sweeps_cache")
