"""Entry laws, matrix ensembles and the auxiliary samplers (Kostlan layers,
positive stable variables, Poisson weights, truncated PWIT)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import InvalidDimension, InvalidParameter
from .rng import Seed, as_seed

ENTRY_KINDS = ("complex-gaussian", "real-gaussian", "symmetric-bernoulli", "heavy-tailed")
PHASES = ("deterministic-one", "uniform-circle", "rademacher")
# draws reserved per matrix entry in the counter layout
_SLOTS_PER_ENTRY = 4


@dataclass(frozen=True)
class EntryLaw:
    kind: str = "complex-gaussian"
    alpha: float | None = None
    phase: str = "deterministic-one"

    def __post_init__(self):
        if self.kind not in ENTRY_KINDS:
            raise InvalidParameter(f"unknown entry law {self.kind!r}; expected one of {ENTRY_KINDS}")
        if self.kind == "heavy-tailed":
            if self.alpha is None or not 0 < self.alpha < 2:
                raise InvalidParameter("heavy-tailed law needs alpha in (0, 2)")
            if self.phase not in PHASES:
                raise InvalidParameter(f"unknown phase {self.phase!r}; expected one of {PHASES}")

    @property
    def is_real(self) -> bool:
        if self.kind == "heavy-tailed":
            return self.phase != "uniform-circle"
        return self.kind != "complex-gaussian"

    def from_uniforms(self, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
        """Map two independent (0, 1] uniforms to entries of this law."""
        if self.kind == "complex-gaussian":
            r = np.sqrt(-np.log(u1))
            return r * np.exp(2j * np.pi * u2)
        if self.kind == "real-gaussian":
            return np.sqrt(-2.0 * np.log(u1)) * np.cos(2 * np.pi * u2)
        if self.kind == "symmetric-bernoulli":
            return np.where(u1 <= 0.5, 1.0, -1.0)
        modulus = u1 ** (-1.0 / self.alpha)
        if self.phase == "deterministic-one":
            return modulus
        if self.phase == "rademacher":
            return np.where(u2 <= 0.5, modulus, -modulus)
        return modulus * np.exp(2j * np.pi * u2)


def _check_dim(n) -> int:
    if int(n) != n or n < 1:
        raise InvalidDimension(f"dimension must be a positive integer, got {n!r}")
    return int(n)


def sample_entries(law: EntryLaw, count: int, seed) -> np.ndarray:
    """``count`` i.i.d. draws of ``law`` (a flat vector)."""
    seed = as_seed(seed)
    k = np.arange(count, dtype=np.uint64) * np.uint64(2)
    return law.from_uniforms(seed.uniforms_at(k), seed.uniforms_at(k + np.uint64(1)))


def sample_iid_matrix(n: int, law: EntryLaw, seed) -> np.ndarray:
    """n x n matrix with i.i.d. entries.

    Entry (i, j) is a function of (seed, i, j) only, so the top-left k x k
    minor does not depend on n. Real laws give float64 arrays, complex laws
    complex128.
    """
    n = _check_dim(n)
    seed = as_seed(seed)
    idx = np.arange(n, dtype=np.uint64)
    cell = (idx[:, None] << np.uint64(32)) | idx[None, :]
    base = cell * np.uint64(_SLOTS_PER_ENTRY)
    u1 = seed.uniforms_at(base)
    u2 = seed.uniforms_at(base + np.uint64(1))
    return law.from_uniforms(u1, u2)


def sample_ginibre(n: int, seed, real: bool = False) -> np.ndarray:
    """Unscaled Ginibre matrix (entries of variance 1)."""
    kind = "real-gaussian" if real else "complex-gaussian"
    return sample_iid_matrix(n, EntryLaw(kind), seed)


def sample_kostlan_moduli(n: int, seed) -> np.ndarray:
    """Descending reordering of independent Z_k with Z_k^2 ~ Gamma(k, 1), k = 1..n."""
    n = _check_dim(n)
    rng = as_seed(seed).generator()
    z = np.sqrt(rng.standard_gamma(np.arange(1, n + 1, dtype=float)))
    return np.sort(z)[::-1]


def _check_alpha(alpha: float) -> float:
    if not 0 < alpha < 2:
        raise InvalidParameter(f"alpha must lie in (0, 2), got {alpha!r}")
    return float(alpha)


def stable_scale(alpha: float) -> float:
    """Factor turning a unit one-sided alpha/2-stable draw into S."""
    beta = alpha / 2
    return gamma_fn(1 - beta) ** (1 / beta)


def sample_positive_stable(alpha: float, count: int, seed) -> np.ndarray:
    """Draws of S >= 0 with E exp(-x S) = exp(-Gamma(1 - alpha/2) x^(alpha/2)).

    Kanter's representation of the one-sided beta-stable law (beta = alpha/2),
    rescaled by ``stable_scale``.
    """
    alpha = _check_alpha(alpha)
    if count < 1:
        raise InvalidParameter("count must be >= 1")
    rng = as_seed(seed).generator()
    beta = alpha / 2
    u = rng.uniform(0.0, np.pi, size=count)
    e = rng.standard_exponential(size=count)
    # guard the open interval: U = 0 has probability zero but would give 0/0
    u = np.where(u == 0.0, np.finfo(float).tiny, u)
    t = (np.sin(beta * u) / np.sin(u) ** (1 / beta)) * (np.sin((1 - beta) * u) / e) ** ((1 - beta) / beta)
    return stable_scale(alpha) * t


def sample_poisson_weights(alpha: float, truncation: int, seed, rows: int | None = None) -> np.ndarray:
    """The ``truncation`` largest points of a Poisson process with intensity
    (alpha/2) x^(-alpha/2-1) dx, in decreasing order.

    With ``rows`` given, returns a (rows, truncation) array of independent
    realizations.
    """
    alpha = _check_alpha(alpha)
    if truncation < 1:
        raise InvalidParameter("truncation must be >= 1")
    rng = as_seed(seed).generator()
    shape = (truncation,) if rows is None else (rows, truncation)
    arrivals = np.cumsum(rng.standard_exponential(size=shape), axis=-1)
    return arrivals ** (-2.0 / alpha)


@dataclass
class PwitTree:
    """Truncated PWIT, stored level by level.

    ``weights[l]``, ``phases[l]`` and ``orientations[l]`` describe the edges
    from level l to level l + 1; along the last axis the children of parent
    p occupy the block ``p * branching[l] : (p + 1) * branching[l]``. A
    leading axis of length ``trees`` holds independent trees.
    """

    alpha: float
    branching: tuple[int, ...]
    weights: list[np.ndarray] = field(repr=False)
    phases: list[np.ndarray] = field(repr=False)
    orientations: list[np.ndarray] = field(repr=False)
    trees: int = 1

    @property
    def depth(self) -> int:
        return len(self.branching)

    @property
    def vertex_count(self) -> int:
        return 1 + sum(int(np.prod(self.branching[: l + 1])) for l in range(self.depth))


def sample_pwit(depth: int, branching, alpha: float, phase: str = "deterministic-one",
                seed=None, trees: int = 1) -> PwitTree:
    """Truncated PWIT of the given depth.

    ``branching`` is either an int (same at every level) or one int per
    level. Sibling marks are cumulative sums of Exp(rate 2) gaps,
    orientations are Bernoulli(1/2), phases follow ``phase``.
    """
    alpha = _check_alpha(alpha)
    if depth < 0:
        raise InvalidDimension("depth must be >= 0")
    if isinstance(branching, (int, np.integer)):
        branching = (int(branching),) * depth
    branching = tuple(int(b) for b in branching)
    if len(branching) != depth or any(b < 1 for b in branching):
        raise InvalidDimension("branching must give one positive count per level")
    if phase not in PHASES:
        raise InvalidParameter(f"unknown phase {phase!r}")
    rng = as_seed(seed).generator()
    weights, phases, orientations = [], [], []
    parents = 1
    for b in branching:
        gaps = rng.exponential(0.5, size=(trees, parents, b))
        weights.append(np.cumsum(gaps, axis=-1).reshape(trees, parents * b))
        orientations.append(rng.integers(0, 2, size=(trees, parents * b), dtype=np.int8))
        if phase == "deterministic-one":
            phases.append(np.ones((trees, parents * b), dtype=complex))
        elif phase == "rademacher":
            phases.append(rng.choice(np.array([-1.0, 1.0]), size=(trees, parents * b)).astype(complex))
        else:
            phases.append(np.exp(2j * np.pi * rng.uniform(size=(trees, parents * b))))
        parents *= b
    return PwitTree(alpha=alpha, branching=branching, weights=weights, phases=phases,
                    orientations=orientations, trees=trees)
