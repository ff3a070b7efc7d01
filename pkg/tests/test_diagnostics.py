import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmtlab.diagnostics import (GofReport, TestFunction, concentration_experiment, incompressible_support,
                                ks_critical_value, ks_distance, row_distances, small_sv_count_experiment,
                                smallest_sv_bounds_check, smallest_sv_tail_experiment, wasserstein2_sorted)
from rmtlab.ensembles import EntryLaw, sample_iid_matrix
from rmtlab.errors import CompressibleVector, InvalidDimension, InvalidParameter, RankDeficient
from rmtlab.rng import Seed
from rmtlab.spectral import singular_values
from rmtlab.suites import nilpotent_pair

GAUSSIAN = EntryLaw("complex-gaussian")


def test_row_distance_inverse_identity():
    a = sample_iid_matrix(30, GAUSSIAN, Seed(1))
    d = row_distances(a)
    inv = np.linalg.inv(a)
    assert np.allclose(d, 1 / np.linalg.norm(inv, axis=0), rtol=1e-9)


def test_row_distances_of_identity_are_one():
    assert np.allclose(row_distances(np.eye(5)), 1)


def test_row_distances_reject_singular():
    a = np.ones((4, 4))
    with pytest.raises(RankDeficient):
        row_distances(a)


@given(st.integers(2, 25), st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_smallest_sv_sandwich(n, seed):
    a = sample_iid_matrix(n, GAUSSIAN, Seed(seed))
    lower, upper, s_min = smallest_sv_bounds_check(a)
    assert lower <= s_min * (1 + 1e-10) and s_min <= upper * (1 + 1e-10)


def test_small_sv_count_rejects_small_n():
    with pytest.raises(InvalidDimension):
        small_sv_count_experiment(20, GAUSSIAN, 1, Seed(0))


def test_small_sv_count_scales_linearly():
    one = small_sv_count_experiment(100, GAUSSIAN, 2, Seed(2))
    two = small_sv_count_experiment(100, GAUSSIAN, 2, Seed(2), scale=2 / math.sqrt(100))
    assert np.allclose(two.constants, 2 * one.constants, rtol=1e-10)
    rows = list(one.table())
    assert len(rows) == 2 * len(one.indices)
    assert all(s >= bound * (1 - 1e-12) for _, _, s, bound in rows)


def test_small_sv_loglog_slope_near_one():
    run = small_sv_count_experiment(300, GAUSSIAN, 4, Seed(3), z=0.5)
    assert abs(run.loglog_slope() - 1) < 0.25
    assert np.all(run.constants > 0)


def test_smallest_sv_tail_curve():
    run = smallest_sv_tail_experiment(50, GAUSSIAN, 0.0, 200, np.linspace(0, 2, 11), Seed(4))
    assert np.all(np.diff(run.curve) >= 0) and run.curve[0] == 0
    assert 0 < run.constant < 5
    with pytest.raises(InvalidParameter):
        smallest_sv_tail_experiment(50, GAUSSIAN, 0.0, 10, [1.0], Seed(4))


def test_shift_moves_smallest_singular_value_away():
    grid = np.linspace(0, 2, 11)
    shifted = smallest_sv_tail_experiment(50, GAUSSIAN, 3.0, 200, grid, Seed(5))
    assert shifted.curve[-1] == 0


def test_incompressible_support_flat_vector():
    x = np.ones(100) / 10
    spread = incompressible_support(x, 0.1, 0.1)
    assert len(spread) == 100


def test_compressible_vector_reports_approximant():
    x = np.zeros(100)
    x[:3] = [0.8, 0.6, 0.0]
    with pytest.raises(CompressibleVector) as info:
        incompressible_support(x, 0.1, 0.1)
    assert np.linalg.norm(info.value.approximant - x) <= 0.1


def test_incompressible_support_rejects_non_unit():
    with pytest.raises(InvalidParameter):
        incompressible_support(np.ones(10), 0.1, 0.1)


@pytest.mark.parametrize("f", [TestFunction("step", 1.0), TestFunction("ramp", 0.5, 1.0)])
def test_test_functions_have_unit_variation(f):
    s = np.linspace(-1, 4, 5001)
    assert np.sum(np.abs(np.diff(f(s)))) <= 1 + 1e-9


def test_constant_function_concentrates_exactly():
    rep = concentration_experiment(60, GAUSSIAN, TestFunction("constant", 0.3), 50, Seed(6))
    assert all(row["frequency"] == 0 for row in rep.details["levels"])


def test_concentration_small_run_within_bound():
    rep = concentration_experiment(80, GAUSSIAN, TestFunction("step", 1.0), 100, Seed(7))
    assert rep.passed


def test_ks_against_exact_cdf():
    assert ks_distance([0.5], lambda x: x) == pytest.approx(0.5)
    u = Seed(8).generator().uniform(size=4000)
    assert ks_distance(u, lambda x: np.clip(x, 0, 1)) < ks_critical_value(4000)


def test_ks_two_sample():
    assert ks_distance([1, 2, 3], [1, 2, 3]) == 0
    assert ks_distance([0, 0], [1, 1]) == 1
    assert ks_critical_value(100, 100) == pytest.approx(ks_critical_value(50))


def test_ks_rejects_empty():
    with pytest.raises(InvalidParameter):
        ks_distance([], lambda x: x)


def test_wasserstein_sorted():
    assert wasserstein2_sorted([0, 1], [1, 2]) == pytest.approx(1)
    with pytest.raises(InvalidParameter):
        wasserstein2_sorted([0], [0, 1])


def test_truncation_moves_singular_values_in_w2():
    # replacing a few entries moves sorted singular values by at most the Frobenius change / sqrt(n)
    n = 60
    a = sample_iid_matrix(n, GAUSSIAN, Seed(9)) / math.sqrt(n)
    b = a.copy()
    b[np.abs(b) > 0.2] = 0
    bound = np.linalg.norm(a - b) / math.sqrt(n)
    assert wasserstein2_sorted(singular_values(a), singular_values(b)) <= bound + 1e-12


def test_rank_one_perturbation_cdf_gap():
    n = 10
    a, b = nilpotent_pair(n, 0.5)
    assert ks_distance(singular_values(a), singular_values(b)) <= 1 / n + 1e-12


def test_report_json_keys():
    rep = GofReport("x", 10, 2, 0.1, 0.2, Seed(1).to_dict())
    data = json.loads(rep.to_json())
    assert list(data)[:7] == ["test-name", "sample-size", "replicas", "statistic", "critical-value", "pass", "seed"]
    assert data["pass"] is True and rep.line().startswith("PASS")
