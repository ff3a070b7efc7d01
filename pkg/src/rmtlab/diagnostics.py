"""Small-singular-value identities and experiments, concentration
harnesses, and goodness-of-fit statistics."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .ensembles import EntryLaw, sample_iid_matrix
from .errors import CompressibleVector, InvalidDimension, InvalidParameter, RankDeficient
from .rng import Seed, as_seed, replicate
from .spectral import _square, singular_values
from .transforms import QPoint, quaternionic_transform


@dataclass
class GofReport:
    test_name: str
    sample_size: int
    replicas: int
    statistic: float
    critical_value: float
    seed: dict | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.statistic <= self.critical_value)

    def to_dict(self) -> dict:
        out = {"test-name": self.test_name, "sample-size": int(self.sample_size),
               "replicas": int(self.replicas), "statistic": float(self.statistic),
               "critical-value": float(self.critical_value), "pass": self.passed,
               "seed": self.seed}
        if self.details:
            out["details"] = self.details
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.test_name}: statistic={self.statistic:.6g} critical={self.critical_value:.6g}"


def row_distances(a, check_rank: bool = True) -> np.ndarray:
    """Distance of each row to the span of the other rows (QR projection)."""
    a = _square(a)
    n = a.shape[0]
    if check_rank:
        s = singular_values(a)
        if s[-1] < 1e-12 * s[0]:
            raise RankDeficient("matrix is numerically singular")
    out = np.empty(n)
    for i in range(n):
        others = np.delete(a, i, axis=0)
        if others.shape[0] == 0:
            out[i] = np.linalg.norm(a[i])
            continue
        q, r = np.linalg.qr(others.T)
        # drop directions that the other rows do not actually span
        q = q[:, np.abs(np.diag(r)) > 1e-13 * max(1.0, np.abs(r).max())]
        row = a[i]
        out[i] = np.linalg.norm(row - q @ (q.conj().T @ row))
    return out


def smallest_sv_bounds_check(a) -> tuple[float, float, float]:
    """(n^-1/2 min dist, min dist, s_n); the first two sandwich s_n."""
    a = _square(a)
    d = row_distances(a, check_rank=False).min()
    return float(d / math.sqrt(a.shape[0])), float(d), float(singular_values(a)[-1])


def _shifted_matrix(n, law, seed, z=0.0, shift=None, scale=None) -> np.ndarray:
    x = sample_iid_matrix(n, law, seed)
    m = x * (1 / math.sqrt(n) if scale is None else scale)
    if shift is not None:
        m = m + shift
    if z:
        m = m - z * np.eye(n)
    return m


@dataclass
class SmallSvCount:
    n: int
    indices: np.ndarray          # i values in [n^0.8, n - 1]
    profiles: np.ndarray         # replicas x len(indices): s_{n-i}
    constants: np.ndarray        # per-replica largest c with s_{n-i} >= c i/n

    def table(self):
        for r, (prof, c) in enumerate(zip(self.profiles, self.constants)):
            for i, s in zip(self.indices, prof):
                yield r, int(i), float(s), float(c * i / self.n)

    def loglog_slope(self) -> float:
        x = np.tile(np.log(self.indices / self.n), len(self.profiles))
        return float(np.polyfit(x, np.log(self.profiles).ravel(), 1)[0])


def small_sv_count_experiment(n: int, law: EntryLaw, replicas: int, seed, z: complex = 0.0,
                              shift=None, scale: float | None = None, threads: int = 1) -> SmallSvCount:
    """Singular values of n^-1/2 X + M (M = shift - z I) against the profile i/n."""
    if n < 50:
        raise InvalidDimension("n must be at least 50")
    idx = np.arange(math.ceil(n**0.8), n)

    def one(s):
        sv = singular_values(_shifted_matrix(n, law, s, z, shift, scale))
        return sv[n - idx - 1]

    profiles = np.array(replicate(one, seed, replicas, threads))
    constants = (profiles * n / idx).min(axis=1)
    return SmallSvCount(n, idx, profiles, constants)


@dataclass
class SmallSvTail:
    n: int
    t_grid: np.ndarray
    curve: np.ndarray
    constant: float
    smallest: np.ndarray


def smallest_sv_tail_experiment(n: int, law: EntryLaw, shift_norm: float, replicas: int,
                                t_grid, seed, threads: int = 1) -> SmallSvTail:
    """Empirical P(s_n(X + M) <= t / sqrt(n)) for unscaled X and M = shift_norm sqrt(n) I.

    ``constant`` is the smallest c with curve(t) <= c (t + n^-1/2) on the grid.
    """
    if replicas < 200:
        raise InvalidParameter("need at least 200 replicas")
    t_grid = np.asarray(t_grid, dtype=float)

    def one(s):
        m = sample_iid_matrix(n, law, s) + shift_norm * math.sqrt(n) * np.eye(n)
        return singular_values(m)[-1]

    smallest = np.sort(np.array(replicate(one, seed, replicas, threads)))
    curve = np.searchsorted(smallest, t_grid / math.sqrt(n), side="right") / replicas
    constant = float(np.max(curve / (t_grid + 1 / math.sqrt(n))))
    return SmallSvTail(n, t_grid, curve, constant, smallest)


def incompressible_support(x, delta: float, rho: float) -> np.ndarray:
    """Indices i with rho/sqrt(n) <= |x_i| <= sqrt(2/(delta n)) for an incompressible unit x.

    x is compressible when it lies within rho of a floor(delta n)-sparse
    vector; the nearest such vector keeps the largest coordinates.
    """
    x = np.asarray(x)
    n = x.size
    if abs(np.linalg.norm(x) - 1) > 1e-12:
        raise InvalidParameter("x must have unit norm")
    k = int(math.floor(delta * n))
    keep = np.argsort(-np.abs(x), kind="stable")[:k]
    approx = np.zeros_like(x)
    approx[keep] = x[keep]
    if np.linalg.norm(x - approx) <= rho:
        raise CompressibleVector(f"x is within {rho} of a {k}-sparse vector", approx)
    mod = np.abs(x)
    spread = np.flatnonzero((mod <= math.sqrt(2 / (delta * n))) & (mod >= rho / math.sqrt(n)))
    if len(spread) < delta * n / 2:
        raise RuntimeError("spread set smaller than delta n / 2")
    return spread


@dataclass(frozen=True)
class TestFunction:
    """Bounded-variation test function with total variation at most 1."""

    kind: str = "step"          # step, ramp or constant
    location: float = 1.0
    width: float = 0.5
    __test__ = False

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return np.full(s.shape, self.location)
        if self.kind == "step":
            return (s <= self.location).astype(float)
        if self.kind == "ramp":
            u = np.clip((s - self.location) / self.width, 0, 1)
            return 1 - u * u * (3 - 2 * u)   # C1 smoothstep, monotone
        raise InvalidParameter(f"unknown test function {self.kind!r}")


def _tail_report(name, deviations, ts, bound_fn, n, replicas, seed) -> GofReport:
    excess, rows = [], []
    for t in ts:
        freq = float(np.mean(deviations >= t))
        bound = min(1.0, bound_fn(t))
        sigma = math.sqrt(bound * (1 - bound) / replicas)
        excess.append(freq - bound - 3 * sigma)
        rows.append({"t": t, "frequency": freq, "bound": bound, "sigma": sigma})
    return GofReport(name, n, replicas, max(excess), 0.0, seed.to_dict(), {"levels": rows})


def concentration_experiment(n: int, law: EntryLaw, f: TestFunction, replicas: int, seed,
                             ts=(0.05, 0.1), threads: int = 1) -> GofReport:
    """Frequency of |integral f d nu - mean| >= t for nu the singular values of X/sqrt(n),
    against 2 exp(-2 n t^2) plus three binomial standard deviations."""
    seed = as_seed(seed)
    values = np.array(replicate(lambda s: float(np.mean(f(singular_values(_shifted_matrix(n, law, s))))),
                                seed, replicas, threads))
    dev = np.abs(values - values.mean())
    return _tail_report(f"concentration-{f.kind}-n{n}", dev, ts,
                        lambda t: 2 * math.exp(-2 * n * t * t), n, replicas, seed)


def quaternionic_concentration_experiment(n: int, law: EntryLaw, q: QPoint, replicas: int, seed,
                                          ts=(0.05, 0.1), threads: int = 1) -> GofReport:
    """Frequency of ||Gamma - mean Gamma||_2 >= t against 2 exp(-n Im(eta)^2 t^2 / 8) + 3 sigma."""
    seed = as_seed(seed)

    def one(s):
        return quaternionic_transform(_shifted_matrix(n, law, s), q, method="svd").matrix()

    mats = np.array(replicate(one, seed, replicas, threads))
    dev = np.linalg.norm(mats - mats.mean(axis=0), ord=2, axis=(1, 2))
    im = complex(q.eta).imag
    return _tail_report(f"quaternionic-concentration-n{n}", dev, ts,
                        lambda t: 2 * math.exp(-n * im * im * t * t / 8), n, replicas, seed)


def ks_distance(sample, reference) -> float:
    """Kolmogorov-Smirnov distance to a CDF callable or, for an array, two-sample."""
    x = np.sort(np.asarray(sample, dtype=float))
    if x.size == 0:
        raise InvalidParameter("empty sample")
    if callable(reference):
        f = np.asarray(reference(x), dtype=float)
        m = x.size
        hi = np.arange(1, m + 1) / m - f
        lo = f - np.arange(m) / m
        return float(max(hi.max(), lo.max(), 0.0))
    y = np.sort(np.asarray(reference, dtype=float))
    if y.size == 0:
        raise InvalidParameter("empty reference sample")
    grid = np.concatenate([x, y])
    fx = np.searchsorted(x, grid, side="right") / x.size
    fy = np.searchsorted(y, grid, side="right") / y.size
    return float(np.abs(fx - fy).max())


def ks_critical_value(n: int, m: int | None = None, level: float = 0.01) -> float:
    """Asymptotic Kolmogorov critical value for one- or two-sample KS."""
    eff = n if m is None else n * m / (n + m)
    return float(stats.kstwobign.isf(level) / math.sqrt(eff))


def wasserstein2_sorted(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidParameter("samples must have equal length")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def cdf_sup_distance(a, b) -> float:
    """Sup distance between the empirical CDFs of two samples."""
    return ks_distance(a, b)
