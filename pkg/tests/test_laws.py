import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from rmtlab import laws
from rmtlab.ensembles import sample_ginibre, sample_kostlan_moduli
from rmtlab.errors import InvalidParameter
from rmtlab.rng import Seed
from rmtlab.spectral import eigenvalues


def test_quarter_circular_values():
    assert laws.quarter_circular_density(0) == pytest.approx(2 / math.pi)
    assert laws.quarter_circular_density(2) == 0
    assert laws.quarter_circular_density(-0.1) == 0 and laws.quarter_circular_density(2.1) == 0
    mass, _ = integrate.quad(laws.quarter_circular_density, 0, 2, epsabs=1e-12)
    assert mass == pytest.approx(1, abs=1e-6)
    x = np.linspace(0, 2, 2001)
    assert np.trapezoid(laws.quarter_circular_density(x), x) == pytest.approx(1, abs=1e-4)


def test_quarter_circular_cdf_is_integral_of_density():
    for x in (0.3, 1.0, 1.7, 2.0):
        val, _ = integrate.quad(laws.quarter_circular_density, 0, x, epsabs=1e-12)
        assert laws.quarter_circular_cdf(x) == pytest.approx(val, abs=1e-10)


def test_circular_modulus_cdf():
    assert laws.circular_modulus_cdf(0) == 0 and laws.circular_modulus_cdf(1) == 1
    assert laws.circular_modulus_cdf(1 / math.sqrt(2)) == pytest.approx(0.5)
    assert laws.circular_modulus_cdf(3) == 1
    mass, _ = integrate.quad(laws.circular_modulus_density, 0, 1)
    assert mass == pytest.approx(1, abs=1e-10)


def test_ginibre_moduli_median():
    n = 1000
    lam = eigenvalues(sample_ginibre(n, Seed(31)) / math.sqrt(n))
    assert abs(np.median(np.abs(lam)) - 1 / math.sqrt(2)) < 0.03


def test_log_integral_matches_between_laws():
    # the integrals of log against the quarter-circle law and the circular modulus law agree
    q, _ = integrate.quad(lambda x: math.log(x) * laws.quarter_circular_density(x), 0, 2, epsabs=1e-12, limit=200)
    c, _ = integrate.quad(lambda r: math.log(r) * 2 * r, 0, 1, epsabs=1e-12, limit=200)
    assert q == pytest.approx(c, abs=1e-8) and c == pytest.approx(-0.5)


def test_ginibre_mean_density_one_term():
    for z in (0, 0.7, 2 + 1j):
        assert laws.ginibre_mean_density(1, z) == pytest.approx(math.exp(-abs(z) ** 2) / math.pi)


def test_ginibre_mean_density_limit():
    n = 200
    assert abs(n * laws.ginibre_mean_density(n, math.sqrt(n) * 0.5) - 1 / math.pi) < 0.01
    assert abs(n * laws.ginibre_mean_density(n, math.sqrt(n) * 1.5)) < 0.01


def test_ginibre_mean_density_is_stable_far_out():
    v = laws.ginibre_mean_density(5, 40.0)
    assert np.isfinite(v) and v >= 0
    # direct evaluation of the truncated exponential series
    direct = math.exp(-1600) * sum(1600.0**l / math.factorial(l) for l in range(5)) / (5 * math.pi)
    assert v == pytest.approx(direct, rel=1e-10, abs=0)


def test_ginibre_mean_density_normalized():
    n = 30
    mass, _ = integrate.quad(lambda r: 2 * math.pi * r * laws.ginibre_mean_density(n, r), 0, 20, limit=200)
    assert mass == pytest.approx(1, abs=1e-6)


def test_kostlan_radius_cdf_values():
    assert laws.kostlan_radius_cdf(1, 1.0) == pytest.approx(1 - math.exp(-1))
    assert laws.kostlan_radius_cdf(10, 0.0) == 0
    with pytest.raises(InvalidParameter):
        laws.kostlan_radius_cdf(3, -1)


def test_kostlan_radius_cdf_is_product_of_gamma_cdfs():
    n, r = 12, 1.05
    prod = np.prod([stats.gamma.cdf(n * r * r, k) for k in range(1, n + 1)])
    assert laws.kostlan_radius_cdf(n, r) == pytest.approx(prod, rel=1e-12)


@given(st.floats(0, 3), st.floats(0, 3))
@settings(max_examples=40)
def test_kostlan_radius_cdf_monotone(r1, r2):
    lo, hi = sorted((r1, r2))
    assert laws.kostlan_radius_cdf(20, lo) <= laws.kostlan_radius_cdf(20, hi) + 1e-15


def test_kostlan_radius_cdf_against_sampler():
    n, reps = 100, 10_000
    maxima = np.array([sample_kostlan_moduli(n, Seed(40).spawn(r))[0] for r in range(reps)]) / math.sqrt(n)
    for r in (0.9, 1.0, 1.1):
        p = laws.kostlan_radius_cdf(n, r)
        sigma = max(math.sqrt(p * (1 - p) / reps), 1 / reps)
        assert abs(np.mean(maxima <= r) - p) <= 3 * sigma


def test_gumbel_constants():
    g = laws.gumbel_gamma(1000)
    assert g == pytest.approx(math.log(1000 / (2 * math.pi)) - 2 * math.log(math.log(1000)))
    assert g == pytest.approx(1.2044, abs=2e-3)
    assert laws.gumbel_standardize(1000, laws.gumbel_center(1000)) == pytest.approx(0, abs=1e-12)
    with pytest.raises(InvalidParameter):
        laws.gumbel_standardize(10, 1.0)


def test_fixed_point_at_origin_small_t():
    alpha = laws.nu_z_fixed_point(0, 1e-8j)
    assert alpha.imag == pytest.approx(1, abs=1e-7)
    # symmetrized density at 0 is 1/pi; on R+ twice that
    assert 2 / math.pi * alpha.imag == pytest.approx(laws.quarter_circular_density(0), abs=1e-7)


def test_fixed_point_residual_large_z():
    z, eta = 3.0, 1j
    alpha = laws.nu_z_fixed_point(z, eta)
    w = alpha + eta
    assert abs(alpha - w / (abs(z) ** 2 - w * w)) < 1e-10


@given(st.complex_numbers(max_magnitude=3), st.floats(-3, 3), st.floats(1e-3, 3))
@settings(max_examples=80, deadline=None)
def test_fixed_point_unique_upper_root(z, er, ei):
    eta = complex(er, ei)
    alpha = laws.nu_z_fixed_point(z, eta)
    assert alpha.imag > 0
    w = alpha + eta
    assert abs(alpha - w / (abs(z) ** 2 - w * w)) < 1e-8 * (1 + abs(alpha))
    r2 = abs(z) ** 2
    roots = np.roots([1, -eta, -(r2 - 1), eta * r2]) - eta
    assert np.sum(roots.imag > 1e-12) == 1


def test_nu0_density_matches_quarter_circle():
    x = np.arange(0.1, 1.9 + 1e-9, 0.05)
    assert np.max(np.abs(laws.nu_z_density(0, x) - laws.quarter_circular_density(x))) < 1e-3


@pytest.mark.parametrize("r", [0.0, 0.5, 0.9])
def test_h_and_beta_limits_inside(r):
    alpha = laws.nu_z_fixed_point(r, 1e-4j)
    assert abs(alpha.imag - laws.circular_h_limit(r)) < 1e-3
    assert abs(laws.nu_z_beta(r, 1e-4j) + r) < 1e-3


def test_beta_limit_outside_is_inverse_conjugate():
    z = 2 - 1j
    assert abs(laws.nu_z_beta(z, 1e-6j) + 1 / np.conj(z)) < 1e-5
    assert laws.nu_z_fixed_point(z, 1e-6j).imag < 1e-5


def test_circular_h_limit_values():
    assert laws.circular_h_limit(0.6) == pytest.approx(0.8)
    assert laws.circular_h_limit(1.0) == 0 and laws.circular_h_limit(2j) == 0


def test_nu_z_density_normalized():
    for z in (0.0, 0.5, 1.5):
        x = np.linspace(0, 4, 801)
        dens = laws.nu_z_density(z, x, eps=(1e-6, 5e-7, 2.5e-7))
        assert np.trapezoid(dens, x) == pytest.approx(1, abs=2e-3)
