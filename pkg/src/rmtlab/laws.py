"""Closed-form limit laws, finite-n Ginibre formulas and the finite-variance
fixed point for the singular values of X/sqrt(n) - z."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammainc, gammaln, logsumexp

from .errors import ConvergenceFailure, InvalidDimension, InvalidParameter

EULER_GAMMA = 0.5772156649015329


def quarter_circular_density(x):
    """pi^-1 sqrt(4 - x^2) on [0, 2]."""
    x = np.asarray(x, dtype=float)
    inside = (x >= 0) & (x <= 2)
    out = np.where(inside, np.sqrt(np.clip(4 - x**2, 0, None)) / np.pi, 0.0)
    return out[()] if out.ndim == 0 else out


def quarter_circular_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), 0, 2)
    out = (x * np.sqrt(4 - x**2) / 2 + 2 * np.arcsin(x / 2)) / np.pi
    return out[()] if out.ndim == 0 else out


def circular_density(z, kappa: float = 1.0):
    z = np.asarray(z)
    out = np.where(np.abs(z) <= kappa, 1 / (np.pi * kappa**2), 0.0)
    return out[()] if out.ndim == 0 else out


def circular_modulus_cdf(r):
    """Distribution function of |Z| for Z uniform on the unit disc."""
    out = np.clip(np.asarray(r, dtype=float) ** 2, 0, 1)
    return out[()] if out.ndim == 0 else out


def circular_modulus_density(r):
    r = np.asarray(r, dtype=float)
    out = np.where((r >= 0) & (r <= 1), 2 * r, 0.0)
    return out[()] if out.ndim == 0 else out


def uniform_cdf(x, lo: float = 0.0, hi: float = 1.0):
    out = np.clip((np.asarray(x, dtype=float) - lo) / (hi - lo), 0, 1)
    return out[()] if out.ndim == 0 else out


def gumbel_cdf(x):
    return np.exp(-np.exp(-np.asarray(x, dtype=float)))


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise InvalidDimension(f"n must be a positive integer, got {n!r}")
    return int(n)


def ginibre_mean_density(n: int, z) -> np.ndarray:
    """Mean eigenvalue density of the unscaled n x n complex Ginibre matrix.

    (n pi)^-1 exp(-|z|^2) sum_{l<n} |z|^(2l)/l!, summed in log space.
    """
    n = _check_n(n)
    r2 = np.abs(np.asarray(z, dtype=complex)).ravel() ** 2
    ell = np.arange(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(ell == 0, 0.0, ell * np.log(r2[:, None])) - gammaln(ell + 1)
    logs = np.where((r2[:, None] == 0) & (ell > 0), -np.inf, logs)
    out = np.exp(logsumexp(logs, axis=1) - r2) / (n * np.pi)
    out = out.reshape(np.shape(z))
    return out[()] if out.ndim == 0 else out


def kostlan_radius_cdf(n: int, r) -> np.ndarray:
    """P(|lambda_1(G)| <= sqrt(n) r) = prod_k P(Gamma(k, 1) <= n r^2)."""
    n = _check_n(n)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise InvalidParameter("r must be nonnegative")
    k = np.arange(1, n + 1)
    p = gammainc(k, n * r[..., None] ** 2)
    with np.errstate(divide="ignore"):
        out = np.exp(np.log(p).sum(axis=-1))
    return out[()] if out.ndim == 0 else out


def gumbel_gamma(n: int) -> float:
    return math.log(n / (2 * math.pi)) - 2 * math.log(math.log(n))


def gumbel_center(n: int) -> float:
    return 1 + math.sqrt(gumbel_gamma(n) / (4 * n))


def gumbel_standardize(n: int, radius):
    """sqrt(4 n g)(radius - 1 - sqrt(g / 4n)) with g = log(n/2pi) - 2 log log n."""
    n = _check_n(n)
    if n < 3 or gumbel_gamma(n) <= 0:
        raise InvalidParameter("the Gumbel centering is positive only for n >= 23")
    g = gumbel_gamma(n)
    return math.sqrt(4 * n * g) * (np.asarray(radius, dtype=float) - gumbel_center(n))


def _fixed_point_residual(alpha: complex, z: complex, eta: complex) -> complex:
    w = alpha + eta
    return alpha - w / (abs(z) ** 2 - w**2)


def _imag_axis_h(r2: float, t: float) -> float:
    # 1 = (1 + t/h) / (r2 + (h + t)^2); the right side falls from +inf to 0 in h
    def excess(h):
        return (1 + t / h) - (r2 + (h + t) ** 2)

    lo, hi = 1e-300, 1.0
    while excess(hi) > 0:
        hi *= 2
    for _ in range(2000):
        mid = 0.5 * (lo + hi) if lo > 1e-300 else math.sqrt(lo * hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def nu_z_fixed_point(z: complex, eta: complex) -> complex:
    """Unique root alpha in the upper half plane of alpha = (alpha+eta)/(|z|^2 - (alpha+eta)^2).

    alpha is the Cauchy-Stieltjes transform at eta of the symmetrized limit
    law of the singular values of X/sqrt(n) - z. On the imaginary axis the
    root is purely imaginary and found by bisection; elsewhere the cubic in
    w = alpha + eta is solved and the root with positive imaginary part kept.
    """
    eta = complex(eta)
    if not eta.imag > 0:
        raise InvalidParameter("eta must have positive imaginary part")
    r2 = abs(z) ** 2
    if eta.real == 0:
        return 1j * _imag_axis_h(r2, eta.imag)
    # w^3 - eta w^2 - (r2 - 1) w + eta r2 = 0
    roots = np.roots([1, -eta, -(r2 - 1), eta * r2])
    candidates = []
    for w in roots:
        # polish with Newton on the cubic
        for _ in range(3):
            f = ((w - eta) * w - (r2 - 1)) * w + eta * r2
            df = (3 * w - 2 * eta) * w - (r2 - 1)
            if df != 0:
                w = w - f / df
        alpha = w - eta
        if alpha.imag > 0:
            candidates.append(alpha)
    if len(candidates) == 1:
        return complex(candidates[0])
    return _continue_from_above(z, eta)


def _continue_from_above(z: complex, eta: complex, steps: int = 200) -> complex:
    # follow the root from Im eta = 1, where selection is unambiguous, down to eta
    r2 = abs(z) ** 2
    start = complex(eta.real, max(1.0, eta.imag))
    alpha = nu_z_fixed_point(z, start)
    for s in np.geomspace(start.imag, eta.imag, steps)[1:]:
        e = complex(eta.real, s)
        w = alpha + e
        for _ in range(50):
            f = ((w - e) * w - (r2 - 1)) * w + e * r2
            df = (3 * w - 2 * e) * w - (r2 - 1)
            step = f / df
            w -= step
            if abs(step) < 1e-15 * (1 + abs(w)):
                break
        alpha = w - e
    if not alpha.imag > 0:
        raise ConvergenceFailure(f"no upper half plane root found at z={z}, eta={eta}")
    return complex(alpha)


def nu_z_beta(z: complex, eta: complex) -> complex:
    """Off-diagonal entry -z / (|z|^2 - (alpha + eta)^2) at the fixed point."""
    w = nu_z_fixed_point(z, eta) + eta
    return -z / (abs(z) ** 2 - w**2)


def circular_h_limit(z: complex) -> float:
    return math.sqrt(max(0.0, 1 - abs(z) ** 2))


def nu_z_density(z: complex, x, eps=(1e-2, 5e-3, 2.5e-3)) -> np.ndarray:
    """Density on R+ of the limit singular-value law of X/sqrt(n) - z.

    (2/pi) Im alpha(x + i eps), extrapolated linearly to eps = 0; the factor
    2 folds the symmetrized law back onto R+.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    eps = np.asarray(eps, dtype=float)
    design = np.vstack([np.ones_like(eps), eps]).T
    out = np.empty_like(xs)
    for i, xv in enumerate(xs):
        vals = [nu_z_fixed_point(z, xv + 1j * e).imag for e in eps]
        out[i] = 2 / np.pi * np.linalg.lstsq(design, vals, rcond=None)[0][0]
    out = np.clip(out, 0, None)
    return out[0] if np.ndim(x) == 0 else out
