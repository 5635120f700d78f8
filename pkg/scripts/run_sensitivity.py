"""Sensitivity surfaces and the index-case experiment at desk scale.

Usage: python3 scripts/run_sensitivity.py OUT_DIR [--quick]
"""

import json
import os
import sys

from policyscape.calibration import (
    SensitivityConfig,
    r0_experiment,
    sensitivity_surface,
    write_surface_csv,
)
from policyscape.population import PopulationConfig, generate_population

PAIRS = [
    ("base_transmission_rate", "presymptomatic_fraction"),
    ("base_transmission_rate", "symptomatic_or"),
    ("initial_infection_multiplier", "quarantine_adherence"),
]


def main(out_dir, quick=False):
    pop = generate_population(PopulationConfig(
        n_agents=5000 if quick else 20000,
        n_tracts=10 if quick else 40, seed=7))

    for a, b in PAIRS:
        print(f"surface {a} x {b}...")
        config = SensitivityConfig(
            param_pair=(a, b),
            lhs_n=40 if quick else 500,
            reps=3 if quick else 10,
            grid_resolution=15 if quick else 25)
        surf = sensitivity_surface(pop, config, seed=0, n_jobs=2)
        write_surface_csv(f"{out_dir}/surface_{a}__{b}.csv", surf)

    print("index-case experiment...")
    summary = {}
    for beta in (0.03, 0.055, 0.08):
        res = r0_experiment(pop, base_transmission_rate=beta,
                            n_sims=1000 if quick else 10000, seed=1)
        summary[str(beta)] = {k: res[k] for k in ("mean", "p25", "p75",
                                                  "variance")}
        print(f"  beta={beta}: mean secondary infections {res['mean']:.2f} "
              f"({res['p25']:.0f}-{res['p75']:.0f})")
    with open(f"{out_dir}/r0_summary.json", "w") as f:
        json.dump(summary, f, indent=2)


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    os.makedirs(sys.argv[1], exist_ok=True)
    main(sys.argv[1], quick="--quick" in sys.argv)
