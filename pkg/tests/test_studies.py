import numpy as np

from policyscape.abm import DiseaseParams
from policyscape.studies import run_study


def test_parallel_matches_serial(small_pop):
    values = np.zeros((3, 10))
    values[1, 9] = 0.8
    values[2, 4] = 0.5
    serial = run_study(small_pop, DiseaseParams(), values, reps=2,
                       base_seed=7, n_jobs=1)
    parallel = run_study(small_pop, DiseaseParams(), values, reps=2,
                         base_seed=7, n_jobs=2)
    s = np.lexsort((serial.columns["replicate"], serial.columns["row_id"]))
    p = np.lexsort((parallel.columns["replicate"], parallel.columns["row_id"]))
    for col in serial.columns:
        np.testing.assert_array_equal(serial.columns[col][s],
                                      parallel.columns[col][p])


def test_seed_layout_independent_of_batching(small_pop):
    values = np.zeros((2, 10))
    both = run_study(small_pop, DiseaseParams(), values, reps=2, base_seed=3)
    single_row1 = run_study(small_pop, DiseaseParams(), values[1][None, :],
                            reps=2, base_seed=3 + 1 * 2)
    mask = both.columns["row_id"] == 1
    np.testing.assert_array_equal(
        np.sort(both.columns["cumulative_infections"][mask]),
        np.sort(single_row1.columns["cumulative_infections"]))
