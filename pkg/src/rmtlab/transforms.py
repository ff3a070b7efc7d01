"""Logarithmic potential and energy, Cauchy-Stieltjes transform, and the
quaternionic (2x2 block) resolvent transform with density recovery."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import AtomCollision, InvalidDimension, InvalidParameter
from .spectral import EmpiricalMeasure, _square, singular_values


def _atoms(measure) -> np.ndarray:
    if isinstance(measure, EmpiricalMeasure):
        return np.asarray(measure.atoms)
    return np.asarray(measure)


def _collides(atoms: np.ndarray, z: complex) -> bool:
    return bool(np.any(np.abs(atoms - z) < 1e-14 * (1 + abs(z))))


def log_potential_empirical(spectrum, z: complex) -> float:
    """-(1/n) sum log|lambda_i - z|; +inf when z sits on an atom."""
    atoms = _atoms(spectrum)
    if _collides(atoms, z):
        return math.inf
    return float(-np.mean(np.log(np.abs(atoms - z))))


def log_potential_circular(z: complex, kappa: float = 1.0) -> float:
    """Potential of the uniform law on the disc of radius kappa."""
    if kappa <= 0:
        raise InvalidParameter("kappa must be positive")
    r = abs(z)
    if r > kappa:
        return -math.log(r)
    return (kappa**2 - r**2) / (2 * kappa**2) - math.log(kappa)


def cauchy_stieltjes(measure, z: complex) -> complex:
    """Normalized transform: integral of 1/(lambda - z) against a uniform atomic measure."""
    atoms = _atoms(measure)
    if _collides(atoms, z):
        raise AtomCollision(f"z = {z} coincides with an atom")
    return complex(np.mean(1.0 / (atoms - z)))


def symmetrized(singular) -> np.ndarray:
    """Atoms of the symmetrization of a measure on R+ (each s mapped to +s and -s)."""
    s = _atoms(singular)
    return np.concatenate([s, -s])


def log_energy(measure) -> float:
    """-(1/n^2) sum over i != j of log|z_i - z_j|."""
    z = _atoms(measure).astype(complex)
    n = len(z)
    total = 0.0
    # row blocks keep memory at O(block * n)
    block = max(1, 2_000_000 // max(n, 1))
    for start in range(0, n, block):
        d = np.abs(z[start:start + block, None] - z[None, :])
        rows = np.arange(start, min(start + block, n))
        d[rows - start, rows] = 1.0
        if np.any(d == 0):
            raise AtomCollision("duplicate atoms make the energy infinite")
        total += np.log(d).sum()
    return float(-total / n**2)


@dataclass(frozen=True)
class QPoint:
    z: complex
    eta: complex

    def __post_init__(self):
        if not complex(self.eta).imag > 0:
            raise InvalidParameter(f"eta must have positive imaginary part, got {self.eta}")

    def matrix(self) -> np.ndarray:
        return np.array([[self.eta, self.z], [np.conj(self.z), self.eta]], dtype=complex)


@dataclass(frozen=True)
class QTransform:
    a: complex
    b: complex

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [np.conj(self.b), self.a]], dtype=complex)


def quaternionic_transform(a_mat, q: QPoint, method: str = "resolvent") -> QTransform:
    """Average of the 2x2 diagonal blocks of the resolvent of the bipartized
    matrix at q.

    ``method="resolvent"`` inverts the 2n x 2n matrix directly;
    ``method="svd"`` uses the singular value decomposition of A - z.
    """
    a_mat = _square(a_mat)
    n = a_mat.shape[0]
    shifted = a_mat - q.z * np.eye(n)
    eta = complex(q.eta)
    if method == "resolvent":
        big = np.empty((2 * n, 2 * n), dtype=complex)
        big[:n, :n] = -eta * np.eye(n)
        big[n:, n:] = -eta * np.eye(n)
        big[:n, n:] = shifted
        big[n:, :n] = shifted.conj().T
        res = np.linalg.inv(big)
        return QTransform(complex(np.trace(res[:n, :n]) / n), complex(np.trace(res[:n, n:]) / n))
    if method == "svd":
        u, s, vh = np.linalg.svd(shifted)
        denom = s**2 - eta**2
        mixed = np.einsum("ij,ji->i", vh, u)
        return QTransform(complex(eta * np.mean(1 / denom)), complex(np.mean(s * mixed / denom)))
    raise InvalidParameter(f"unknown method {method!r}")


def a_from_singular_values(singular, eta: complex) -> complex:
    """Cauchy-Stieltjes transform of the symmetrized singular-value measure at eta."""
    s = _atoms(singular)
    return complex(np.mean(eta / (s**2 - eta**2)))


def _transform_at_it(a_mat: np.ndarray, z: complex, t: float) -> tuple[complex, complex]:
    # with B = A - z: a = it tr (B*B + t^2)^-1 / n and b = tr B (B*B + t^2)^-1 / n
    n = a_mat.shape[0]
    b_mat = a_mat - z * np.eye(n)
    gram = b_mat.conj().T @ b_mat + t**2 * np.eye(n)
    factor = cho_factor(gram)
    inv_bt = cho_solve(factor, b_mat.conj().T)  # (B*B + t^2)^-1 B*
    a = 1j * t * np.trace(cho_solve(factor, np.eye(n))) / n
    # tr B (B*B + t^2)^-1 = conj(tr (B*B + t^2)^-1 B*)
    b = np.conj(np.trace(inv_bt)) / n
    return complex(a), complex(b)


def quaternionic_lattice(a_mat, zs, t: float, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """a and b fields of the transform at q(z, it) for every z in ``zs``."""
    a_mat = np.asarray(_square(a_mat), dtype=complex)
    if t <= 0:
        raise InvalidParameter("t must be positive")
    zs = np.asarray(zs, dtype=complex)
    flat = zs.ravel()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        values = list(pool.map(lambda z: _transform_at_it(a_mat, z, t), flat))
    a = np.array([v[0] for v in values]).reshape(zs.shape)
    b = np.array([v[1] for v in values]).reshape(zs.shape)
    return a, b


def extrapolate_in_t(fields, ts) -> np.ndarray:
    """Linear least-squares extrapolation of fields sampled at ts to t = 0."""
    ts = np.asarray(ts, dtype=float)
    stack = np.stack([np.asarray(f) for f in fields])
    design = np.vstack([np.ones_like(ts), ts]).T
    coef = np.linalg.lstsq(design, stack.reshape(len(ts), -1), rcond=None)[0]
    return coef[0].reshape(stack.shape[1:])


def square_lattice(lo: float, hi: float, step: float) -> np.ndarray:
    """Complex lattice z = x + iy with x, y in [lo, hi]; rows index y, columns x."""
    count = int(round((hi - lo) / step)) + 1
    axis = lo + step * np.arange(count)
    x, y = np.meshgrid(axis, axis, indexing="xy")
    return x + 1j * y


def _derivative(field: np.ndarray, step: float, axis: int) -> np.ndarray:
    if field.shape[axis] < 5:
        return np.gradient(field, step, axis=axis, edge_order=2)
    out = np.gradient(field, step, axis=axis, edge_order=2)
    f = np.moveaxis(field, axis, 0)
    inner = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * step)
    view = np.moveaxis(out, axis, 0)
    view[2:-2] = inner
    return out


@dataclass(frozen=True)
class RecoveredDensity:
    density: np.ndarray
    max_imaginary: float
    negative_dips: np.ndarray

    @property
    def flagged(self) -> bool:
        return bool(self.negative_dips.any())


def recover_density_from_b(b_field, step: float) -> RecoveredDensity:
    """Density -(1/pi) d-bar-conjugate of b on a uniform lattice.

    The derivative (d/dx - i d/dy)/2 uses fourth-order central differences
    when an axis has at least five points and second order otherwise. Rows
    of ``b_field`` index y, columns index x.
    """
    b_field = np.asarray(b_field, dtype=complex)
    if b_field.ndim != 2 or min(b_field.shape) < 3:
        raise InvalidDimension("lattice needs at least 3 points per axis")
    if step <= 0:
        raise InvalidParameter("step must be positive")
    dz = (_derivative(b_field, step, 1) - 1j * _derivative(b_field, step, 0)) / 2
    dens = -dz / np.pi
    dips = dens.real < -0.05
    if dips.any():
        warnings.warn(f"{int(dips.sum())} lattice points dip below -0.05; refine the lattice or raise t")
    return RecoveredDensity(dens.real, float(np.abs(dens.imag).max()), dips)
