"""Eigenvalues, singular values, bipartization and empirical measures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimension, NonFiniteInput


def _square(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidDimension(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise InvalidDimension("empty matrix")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput("matrix has non-finite entries")
    return a


def order_spectrum(values) -> np.ndarray:
    """Sort by decreasing modulus, ties by increasing phase in [0, 2pi)."""
    values = np.asarray(values, dtype=complex)
    phase = np.mod(np.angle(values), 2 * np.pi)
    phase[values == 0] = 0.0
    return values[np.lexsort((phase, -np.abs(values)))]


def eigenvalues(a) -> np.ndarray:
    """Eigenvalues of a square matrix in the canonical order.

    Delegates to LAPACK (Hessenberg reduction plus shifted QR), which is
    backward stable; LinAlgError is raised on non-convergence.
    """
    return order_spectrum(np.linalg.eigvals(_square(a)))


def singular_values(a) -> np.ndarray:
    """Descending singular values."""
    a = np.asarray(a)
    if a.ndim != 2 or 0 in a.shape:
        raise InvalidDimension(f"expected a non-empty matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput("matrix has non-finite entries")
    return np.linalg.svd(a, compute_uv=False)


def bipartize(a) -> np.ndarray:
    """Hermitian block matrix [[0, A], [A*, 0]]."""
    a = _square(a)
    n = a.shape[0]
    h = np.zeros((2 * n, 2 * n), dtype=np.result_type(a, float))
    h[:n, n:] = a
    h[n:, :n] = a.conj().T
    return h


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniform-weight atomic measure on C (eigenvalues) or R+ (singular values)."""

    atoms: np.ndarray

    @property
    def size(self) -> int:
        return len(self.atoms)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)

    def integrate(self, f) -> float:
        return float(np.mean(f(self.atoms)))

    def cdf(self, x) -> np.ndarray:
        """Distribution function of a measure on the real line."""
        s = np.sort(np.real(self.atoms))
        return np.searchsorted(s, np.asarray(x, dtype=float), side="right") / self.size


def empirical_measures(a, scale: float = 1.0) -> tuple[EmpiricalMeasure, EmpiricalMeasure]:
    """Eigenvalue and singular-value measures of ``scale * a``."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    m = scale * _square(a)
    return EmpiricalMeasure(eigenvalues(m)), EmpiricalMeasure(singular_values(m))


def default_real_tol(a) -> float:
    a = np.asarray(a)
    return 1e-7 * np.sqrt(a.shape[0]) * np.linalg.norm(a, 2)


def real_eigenvalue_count(spectrum, tol: float) -> int:
    """Number of eigenvalues with |Im| <= tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return int(np.count_nonzero(np.abs(np.imag(spectrum)) <= tol))


def conjugate_pairs_consistent(spectrum, tol: float) -> bool:
    """True when the non-real eigenvalues close up under conjugation (up to tol)."""
    s = np.asarray(spectrum)
    nonreal = s[np.abs(s.imag) > tol]
    upper = np.sort_complex(nonreal[nonreal.imag > 0])
    lower = np.sort_complex(nonreal[nonreal.imag < 0].conj())
    return len(upper) == len(lower) and bool(np.all(np.abs(upper - lower) <= 10 * tol + 1e-12 * np.abs(upper)))
