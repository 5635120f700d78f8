import json

import numpy as np
import pytest

from policyscape.abm import DiseaseParams
from policyscape.design import DesignMatrix, augment, default_augmentation, lhs_sample
from policyscape.fitting import fit_emulator_model
from policyscape.population import PopulationConfig, generate_population
from policyscape.runstore import RunManifest, write_study
from policyscape.studies import run_study


@pytest.fixture(scope="session")
def small_pop():
    return generate_population(PopulationConfig(n_agents=3000, n_tracts=8, seed=1))


@pytest.fixture(scope="session")
def small_pop_file(small_pop, tmp_path_factory):
    path = tmp_path_factory.mktemp("pop") / "pop.json"
    small_pop.save(path)
    return str(path)


@pytest.fixture(scope="session")
def small_study(small_pop):
    design = augment(lhs_sample(25, 10, seed=2), default_augmentation())
    outcomes = run_study(small_pop, DiseaseParams(), design.values, reps=3,
                         base_seed=0, n_jobs=2)
    return design, outcomes


@pytest.fixture(scope="session")
def small_model(small_pop, small_study):
    design, outcomes = small_study
    return fit_emulator_model(design.values, outcomes, small_pop.n_agents,
                              folds=6, seed=0, n_restarts=3, max_trees=60)


@pytest.fixture(scope="session")
def small_model_file(small_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "model.json"
    small_model.save(path)
    return str(path)


@pytest.fixture(scope="session")
def baseline_study_dir(small_pop, tmp_path_factory):
    path = tmp_path_factory.mktemp("study") / "baseline"
    design = DesignMatrix(values=np.zeros((1, 10)))
    outcomes = run_study(small_pop, DiseaseParams(), design.values, reps=5,
                         base_seed=100, n_jobs=1)
    manifest = RunManifest(command="test-baseline",
                           config={"n_agents": small_pop.n_agents, "reps": 5},
                           seeds=list(range(100, 105)))
    write_study(path, design, outcomes, manifest)
    return str(path)
