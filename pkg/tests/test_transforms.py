import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmtlab.ensembles import EntryLaw, sample_ginibre, sample_iid_matrix
from rmtlab.errors import AtomCollision, InvalidDimension, InvalidParameter
from rmtlab.rng import Seed
from rmtlab.spectral import EmpiricalMeasure, eigenvalues, singular_values
from rmtlab.transforms import (QPoint, a_from_singular_values, cauchy_stieltjes, extrapolate_in_t,
                               log_energy, log_potential_circular, log_potential_empirical,
                               quaternionic_lattice, quaternionic_transform, recover_density_from_b,
                               square_lattice, symmetrized)


def test_single_atom_potential():
    assert log_potential_empirical([1.0], 3.0) == pytest.approx(-math.log(2))


def test_potential_collision_signals_infinity():
    assert log_potential_empirical([0.5, 1.0], 1.0) == math.inf


@pytest.mark.parametrize("z", [0.3 + 0.1j, -0.2j, 1.1, -0.6 + 0.6j, 0.05])
def test_potential_determinant_singular_chain(z):
    n = 50
    a = sample_iid_matrix(n, EntryLaw(), Seed(4)) / math.sqrt(n)
    u = log_potential_empirical(eigenvalues(a), z)
    det = -np.linalg.slogdet(a - z * np.eye(n))[1] / n
    sv = -np.mean(np.log(singular_values(a - z * np.eye(n))))
    assert u == pytest.approx(det, abs=1e-8) and u == pytest.approx(sv, abs=1e-8)


def test_ginibre_potential_outside_disc():
    n = 1000
    lam = eigenvalues(sample_ginibre(n, Seed(5)) / math.sqrt(n))
    assert abs(log_potential_empirical(lam, 2.0) + math.log(2)) < 0.05


def test_circular_potential_closed_form():
    assert log_potential_circular(0) == 0.5
    assert log_potential_circular(2) == pytest.approx(-math.log(2))
    inside, outside = log_potential_circular(1 - 1e-12), log_potential_circular(1 + 1e-12)
    assert inside == pytest.approx(0, abs=1e-11) and outside == pytest.approx(0, abs=1e-11)
    assert log_potential_circular(3.0, 3.0) == pytest.approx(-math.log(3))
    with pytest.raises(InvalidParameter):
        log_potential_circular(0, 0)


def test_cauchy_stieltjes_atoms():
    assert cauchy_stieltjes([0.0], 1j) == pytest.approx(1j)
    assert cauchy_stieltjes(EmpiricalMeasure(np.array([1.0])), 0) == pytest.approx(1)
    with pytest.raises(AtomCollision):
        cauchy_stieltjes([1.0], 1.0)


@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=30), st.floats(0.01, 5))
@settings(max_examples=50)
def test_symmetrized_transform_is_imaginary_on_axis(atoms, t):
    m = cauchy_stieltjes(symmetrized(np.array(atoms)), 1j * t)
    assert abs(m.real) < 1e-12 * (1 + abs(m)) and m.imag > 0


def test_transform_is_twice_d_of_potential():
    lam = eigenvalues(sample_ginibre(30, Seed(6)) / math.sqrt(30))
    z, h = 1.7 + 0.4j, 1e-4
    dx = (log_potential_empirical(lam, z + h) - log_potential_empirical(lam, z - h)) / (2 * h)
    dy = (log_potential_empirical(lam, z + 1j * h) - log_potential_empirical(lam, z - 1j * h)) / (2 * h)
    assert (dx - 1j * dy) == pytest.approx(cauchy_stieltjes(lam, z), abs=1e-6)


def test_distinct_measures_have_distinct_potentials():
    a, b = [0.0, 1.0], [0.0, 1.0 + 0.5j]
    lattice = square_lattice(-2, 2, 0.5).ravel() + 0.013
    diffs = [abs(log_potential_empirical(a, z) - log_potential_empirical(b, z)) for z in lattice]
    assert max(diffs) > 1e-3


def test_log_energy_small_cases():
    assert log_energy([0, 1]) == pytest.approx(0)
    assert log_energy([0, 2]) == pytest.approx(-math.log(2) / 2)
    with pytest.raises(AtomCollision):
        log_energy([1, 1, 2])


def test_transform_of_zero_matrix():
    g = quaternionic_transform(np.zeros((1, 1)), QPoint(0, 0.5j))
    assert g.a == pytest.approx(2j) and g.b == pytest.approx(0)


def test_transform_rejects_lower_half_plane():
    with pytest.raises(InvalidParameter):
        QPoint(0, 0.0)


@given(st.complex_numbers(max_magnitude=2), st.floats(-2, 2), st.floats(0.05, 3))
@settings(max_examples=40, deadline=None)
def test_transform_paths_agree(z, eta_re, eta_im):
    a = sample_iid_matrix(20, EntryLaw(), Seed(7)) / math.sqrt(20)
    q = QPoint(z, complex(eta_re, eta_im))
    direct, svd = quaternionic_transform(a, q), quaternionic_transform(a, q, "svd")
    assert abs(direct.a - svd.a) < 1e-10 and abs(direct.b - svd.b) < 1e-10
    m = a_from_singular_values(singular_values(a - z * np.eye(20)), q.eta)
    assert abs(direct.a - m) < 1e-10
    assert direct.a.imag > 0
    assert np.linalg.norm(direct.matrix(), 2) <= 2 / eta_im + 1e-12


def test_lattice_path_matches_direct():
    a = sample_iid_matrix(15, EntryLaw(), Seed(8)) / math.sqrt(15)
    zs = np.array([0.1 + 0.2j, -0.7, 1.3j])
    la, lb = quaternionic_lattice(a, zs, 0.3)
    for z, va, vb in zip(zs, la, lb):
        g = quaternionic_transform(a, QPoint(z, 0.3j))
        assert abs(g.a - va) < 1e-10 and abs(g.b - vb) < 1e-10
    la2, lb2 = quaternionic_lattice(a, zs, 0.3, threads=3)
    assert np.array_equal(la, la2) and np.array_equal(lb, lb2)


def test_zero_matrix_b_field_closed_form():
    zs = square_lattice(-1, 1, 0.25)
    _, b = quaternionic_lattice(np.zeros((3, 3)), zs, 0.2)
    assert np.allclose(b, -zs / (np.abs(zs) ** 2 + 0.04))


def test_constant_b_field_gives_zero_density():
    rec = recover_density_from_b(np.full((6, 6), 0.3 - 0.1j), 0.1)
    assert np.allclose(rec.density, 0) and not rec.flagged


def test_density_needs_three_points_per_axis():
    with pytest.raises(InvalidDimension):
        recover_density_from_b(np.zeros((2, 5)), 0.1)


def test_zero_matrix_mass_concentrates_at_origin():
    step, t = 0.05, 0.01
    zs = square_lattice(-1, 1, step)
    b = -zs / (np.abs(zs) ** 2 + t * t)
    with pytest.warns(UserWarning):
        dens = recover_density_from_b(b, step).density
    c = zs.shape[0] // 2
    block = dens[c - 1:c + 2, c - 1:c + 2].sum() * step**2
    assert block >= 0.9
    assert dens.sum() * step**2 == pytest.approx(1, abs=0.05)


def test_second_order_used_on_small_lattices():
    zs = square_lattice(-0.2, 0.2, 0.1)
    b = np.abs(zs) ** 2   # d/dz of z conj(z) is conj(z); exact for quadratics
    rec = recover_density_from_b(b, 0.1)
    assert np.allclose(rec.density, -zs.real / math.pi)
    assert rec.max_imaginary == pytest.approx(0.2 / math.pi)


def test_extrapolation_recovers_linear_limit():
    ts = [0.2, 0.1, 0.05]
    fields = [np.array([1 + 2 * t, -3 + t]) for t in ts]
    assert np.allclose(extrapolate_in_t(fields, ts), [1, -3])


def test_quaternionic_concentration_small():
    from rmtlab.diagnostics import quaternionic_concentration_experiment
    rep = quaternionic_concentration_experiment(80, EntryLaw(), QPoint(0.2, 1j), 60, Seed(1), ts=(0.3, 0.6))
    assert rep.passed
