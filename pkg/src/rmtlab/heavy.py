"""Heavy-tailed limits: the stable-bank fixed point for h and g_alpha,
population dynamics for the singular-value limit, tree recursion on the
truncated PWIT, and a Hill tail-index estimator."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .ensembles import PwitTree, _check_alpha, sample_positive_stable, sample_pwit
from .errors import ConvergenceFailure, DensityNegativity, InvalidParameter
from .rng import as_seed
from .transforms import QPoint, QTransform

MIN_BANK = 1000
Y_LO, Y_HI = 1e-8, 1e8


@dataclass(frozen=True)
class StableSampleBank:
    alpha: float
    s: np.ndarray
    s_prime: np.ndarray

    @property
    def count(self) -> int:
        return len(self.s)


def make_bank(alpha: float, count: int, seed) -> StableSampleBank:
    """Two independent arrays of positive stable draws S and S'."""
    seed = as_seed(seed)
    return StableSampleBank(float(alpha),
                            sample_positive_stable(alpha, count, seed.spawn(0)),
                            sample_positive_stable(alpha, count, seed.spawn(1)))


@dataclass(frozen=True)
class RdeSolution:
    z: complex
    t: float
    y: float
    residual: float
    bank_size: int

    def to_dict(self) -> dict:
        return {"z": [self.z.real, self.z.imag], "t": self.t, "y": self.y,
                "residual": self.residual, "bank_size": self.bank_size}


class _MomentMap:
    """F(y) = E[ratio(y)^(alpha/2)] - 1 and dF/dlog y on a fixed bank."""

    def __init__(self, r2: float, t: float, bank: StableSampleBank):
        self.r2, self.t, self.bank = r2, t, bank
        self.beta = bank.alpha / 2
        self.ss = bank.s * bank.s_prime

    def __call__(self, y: float, with_slope: bool = False):
        s, sp, t, r2 = self.bank.s, self.bank.s_prime, self.t, self.r2
        if t == 0:
            denom = r2 + y * y * self.ss
            ratio = s / denom
            dlog = -2 * y * y * self.ss / denom
        else:
            num = t / y + s
            u, v = t + y * s, t + y * sp
            denom = r2 + u * v
            ratio = num / denom
            dlog = -(t / y) / num - y * (s * v + sp * u) / denom
        powered = ratio**self.beta
        value = powered.mean() - 1.0
        if not with_slope:
            return value
        return value, self.beta * (powered * dlog).mean()


def _solve_y(r2: float, t: float, bank: StableSampleBank, guess: float = 1.0) -> tuple[float, float]:
    if bank.count < MIN_BANK:
        raise InvalidParameter(f"bank must hold at least {MIN_BANK} samples")
    f = _MomentMap(r2, t, bank)
    lo, hi = math.log(Y_LO), math.log(Y_HI)
    u = min(max(math.log(guess), lo), hi)
    # safeguarded Newton in log y; the map is strictly decreasing on the bank,
    # so each evaluation's sign moves one end of the bracket
    for _ in range(200):
        value, slope = f(math.exp(u), with_slope=True)
        if value > 0:
            lo = u
        else:
            hi = u
        if abs(value) < 1e-14 or hi - lo < 1e-11:
            break
        step = u - value / slope if slope < 0 else None
        u = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
    else:
        raise ConvergenceFailure("y iteration did not converge")
    # ending on a bracket end that was never evaluated means no root inside
    if (u <= math.log(Y_LO) + 1e-9 and f(Y_LO) <= 0) or (u >= math.log(Y_HI) - 1e-9 and f(Y_HI) >= 0):
        raise ConvergenceFailure(f"no root for y in [{Y_LO}, {Y_HI}] at |z|^2={r2}, t={t}")
    y = math.exp(u)
    return y, float(abs(f(y)))


def rde_y(z: complex, t: float, alpha: float, bank: StableSampleBank, guess: float = 1.0) -> RdeSolution:
    """Solve 1 = E[((t/y + S) / (|z|^2 + (t + yS)(t + yS')))^(alpha/2)] on the bank.

    t = 0 uses the limit equation 1 = E[(S / (|z|^2 + y^2 S S'))^(alpha/2)];
    at z = 0 it is replaced by t = 1e-6.
    """
    _check_alpha(alpha)
    if not math.isclose(alpha, bank.alpha):
        raise InvalidParameter("bank was drawn for a different alpha")
    if t < 0:
        raise InvalidParameter("t must be nonnegative")
    if t == 0 and z == 0:
        t = 1e-6
    y, residual = _solve_y(abs(z) ** 2, float(t), bank, guess)
    return RdeSolution(complex(z), float(t), y, residual, bank.count)


def rde_h_moments(z: complex, t: float, alpha: float, bank: StableSampleBank) -> tuple[float, complex]:
    """Bank averages of h = (t + yS)/D and b = -z/D, D = |z|^2 + (t + yS)(t + yS')."""
    sol = rde_y(z, t, alpha, bank)
    u = sol.t + sol.y * bank.s
    denom = abs(z) ** 2 + u * (sol.t + sol.y * bank.s_prime)
    return float(np.mean(u / denom)), complex(np.mean(-z / denom))


def heavy_density_g(r: float, alpha: float, bank: StableSampleBank, fd_step: float | None = None) -> float:
    """Density g_alpha of the limit eigenvalue law at any z with |z| = r.

    (1/pi)(y^2 - 2 rho y y') E[S S' / (rho + y^2 S S')^2] with rho = r^2,
    y = y_*(rho) from the t = 0 equation and y' a finite difference in rho.
    """
    if r < 0:
        raise InvalidParameter("r must be nonnegative")
    rho = float(r) ** 2
    ss = bank.s * bank.s_prime
    if rho == 0:
        y = _solve_y(0.0, 0.0, bank)[0]
        slope_term = y * y
    else:
        y = _solve_y(rho, 0.0, bank)[0]
        h = fd_step if fd_step is not None else 1e-3 * (1 + rho)
        if rho - h > 0:
            up = _solve_y(rho + h, 0.0, bank, y)[0]
            down = _solve_y(rho - h, 0.0, bank, y)[0]
            dy = (up - down) / (2 * h)
        else:
            y1 = _solve_y(rho + h, 0.0, bank, y)[0]
            y2 = _solve_y(rho + 2 * h, 0.0, bank, y)[0]
            dy = (-3 * y + 4 * y1 - y2) / (2 * h)
        slope_term = y * y - 2 * rho * y * dy
    value = slope_term * np.mean(ss / (rho + y * y * ss) ** 2) / math.pi
    if value < -1e-4:
        raise DensityNegativity(f"g_alpha({r}) = {value:.3g}; enlarge the bank or the step")
    return max(float(value), 0.0)


def bank_radius(bank: StableSampleBank) -> float:
    """Largest |z| for which the t = 0 equation has a root on this bank.

    As y -> 0 the moment map tends to E[S^(alpha/2)] / |z|^alpha, which is
    finite on a bank although infinite for the true law.
    """
    beta = bank.alpha / 2
    return float(np.mean(bank.s**beta) ** (1 / bank.alpha))


def g_alpha_cutoff(alpha: float, bank: StableSampleBank | None = None) -> float:
    """Radius past which the mass of g_alpha is negligible (exp(-12) scale)."""
    cutoff = 12.0 ** (1.0 / alpha)
    return cutoff if bank is None else min(cutoff, 0.9 * bank_radius(bank))


@dataclass(frozen=True)
class Normalization:
    mass: float
    tail_bound: float
    cutoff: float

    @property
    def total(self) -> float:
        return self.mass + self.tail_bound


def g_alpha_normalization(alpha: float, bank: StableSampleBank, cutoff: float | None = None) -> Normalization:
    """Integral of 2 pi r g_alpha(r) over [0, cutoff] plus a tail bound beyond.

    The bound uses the exp(-r^alpha) decay: the mass past R is at most
    2 pi g(R) R^(2 - alpha) / alpha up to lower-order factors.
    """
    cutoff = g_alpha_cutoff(alpha, bank) if cutoff is None else cutoff
    breaks = [v for v in (1.0, 3.0, 6.0) if v < cutoff]
    mass, _ = integrate.quad(lambda r: 2 * math.pi * r * heavy_density_g(r, alpha, bank),
                             0.0, cutoff, limit=20, epsabs=1e-4, epsrel=1e-3, points=breaks or None)
    tail = 2 * math.pi * heavy_density_g(cutoff, alpha, bank) * cutoff ** (2 - alpha) / alpha
    return Normalization(float(mass), float(tail), float(cutoff))


@dataclass(frozen=True)
class PopulationEstimate:
    a: complex
    b: complex
    a_stderr: float
    population: np.ndarray


def rde_population(z: complex, eta: complex, alpha: float, seed, size: int = 20000,
                   truncation: int = 30, sweeps: int = 30, burn_in: int = 15,
                   init: np.ndarray | None = None) -> PopulationEstimate:
    """Population dynamics for the diagonal resolvent entry at q(z, eta).

    Each member is updated as a = A / (|z|^2 - A B) with
    A, B = eta + sum_k xi_k a_k plus a mean-field remainder for the points
    past the truncation; xi are Poisson weights, a_k uniform picks from the
    current population. The weight rows are drawn once per seed so that
    nearby evaluation points share random numbers.
    """
    alpha = _check_alpha(alpha)
    eta = complex(eta)
    if not eta.imag > 0:
        raise InvalidParameter("eta must have positive imaginary part")
    seed = as_seed(seed)
    p = 2.0 / alpha
    arrivals = np.cumsum(seed.spawn(0).generator().standard_exponential((2, size, truncation)), axis=-1)
    xi = arrivals**-p
    remainder = arrivals[..., -1] ** (1 - p) / (p - 1)
    picks = seed.spawn(1).generator()
    r2 = abs(z) ** 2
    pop = np.full(size, 1j) if init is None else np.asarray(init, dtype=complex).copy()
    a_acc, b_acc, kept = 0j, 0j, 0
    for sweep in range(sweeps):
        idx = picks.integers(0, size, size=(2, size, truncation))
        sums = (xi * pop[idx]).sum(axis=-1) + remainder * pop.mean()
        left, right = eta + sums[0], eta + sums[1]
        denom = r2 - left * right
        pop = left / denom
        if sweep >= burn_in:
            a_acc += pop.mean()
            b_acc += (-z / denom).mean()
            kept += 1
    stderr = float(pop.imag.std() / math.sqrt(size))
    return PopulationEstimate(a_acc / kept, b_acc / kept, stderr, pop)


def nu_alpha_z_density(z: complex, x, alpha: float, seed, eps=(0.02, 0.01), **population) -> np.ndarray:
    """Density on R+ of the limit singular-value law of n^(-1/alpha) X - z.

    (2/pi) Im of the mean population value at x + i eps, extrapolated
    linearly to eps = 0. Every x uses the same seed.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0):
        raise InvalidParameter("x must be nonnegative")
    eps = np.asarray(eps, dtype=float)
    design = np.vstack([np.ones_like(eps), eps]).T
    out = np.empty_like(xs)
    for i, xv in enumerate(xs):
        vals = [rde_population(z, xv + 1j * e, alpha, seed, **population).a.imag for e in eps]
        out[i] = 2 / math.pi * np.linalg.lstsq(design, vals, rcond=None)[0][0]
    out = np.clip(out, 0, None)
    return out[0] if np.ndim(x) == 0 else out


def default_nu_grid(x_max: float = 50.0) -> np.ndarray:
    return np.concatenate([np.linspace(0, 3, 31), np.geomspace(3.2, x_max, 20)])


@dataclass(frozen=True)
class DensityTable:
    x: np.ndarray
    density: np.ndarray
    alpha: float

    @property
    def tail_allowance(self) -> float:
        # the limit law has t^alpha nu([t, inf)) -> 1
        return float(self.x[-1] ** -self.alpha)

    @property
    def cumulative(self) -> np.ndarray:
        return integrate.cumulative_trapezoid(self.density, self.x, initial=0.0)

    @property
    def mass(self) -> float:
        return float(self.cumulative[-1] + self.tail_allowance)

    def cdf(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        inside = np.interp(v, self.x, self.cumulative)
        beyond = 1 - np.maximum(v, self.x[-1]) ** -self.alpha
        return np.where(v <= self.x[-1], inside, beyond)


def nu_alpha_z_table(z: complex, alpha: float, seed, x=None, **kwargs) -> DensityTable:
    xs = default_nu_grid() if x is None else np.asarray(x, dtype=float)
    return DensityTable(xs, nu_alpha_z_density(z, xs, alpha, seed, **kwargs), float(alpha))


def pwit_resolvent_root(tree: PwitTree, q: QPoint) -> QTransform:
    """Root value of the 2x2 resolvent recursion on a truncated PWIT.

    Leaves get -q^-1; a vertex with children k gets
    -(q + diag(sum (1-eps_k) w_k c_k, sum eps_k w_k a_k))^-1, w_k = y_k^(-2/alpha),
    where (a_k, c_k) are the children's diagonal entries. With several trees
    the returned entries are arrays over trees.
    """
    eta, z = complex(q.eta), complex(q.z)
    r2 = abs(z) ** 2
    denom = np.full((tree.trees, 1), r2 - eta * eta)
    a = c = eta / denom
    for level in range(tree.depth - 1, -1, -1):
        b_count = tree.branching[level]
        w = tree.weights[level] ** (-2.0 / tree.alpha)
        eps = tree.orientations[level]
        if level == tree.depth - 1:
            a = np.broadcast_to(a[:, :1], w.shape)
            c = a
        shape = (tree.trees, -1, b_count)
        p_sum = ((1 - eps) * w * c).reshape(shape).sum(axis=-1)
        q_sum = (eps * w * a).reshape(shape).sum(axis=-1)
        denom = r2 - (eta + p_sum) * (eta + q_sum)
        a, c = (eta + q_sum) / denom, (eta + p_sum) / denom
        if not (np.all(a.imag > 0) and np.all(c.imag > 0)):
            raise ConvergenceFailure("resolvent lost positivity during the tree recursion")
    a, b = a[:, 0], -z / denom[:, 0]
    if tree.trees == 1:
        return QTransform(complex(a[0]), complex(b[0]))
    return QTransform(a, b)


def pwit_root_mean(q: QPoint, alpha: float, branching, trees: int, seed,
                   batch: int = 50) -> tuple[float, float]:
    """Mean and standard error of Im a at the root over independent trees."""
    seed = as_seed(seed)
    values = []
    for k, start in enumerate(range(0, trees, batch)):
        count = min(batch, trees - start)
        tree = sample_pwit(len(branching), branching, alpha, seed=seed.spawn(k), trees=count)
        values.append(np.atleast_1d(pwit_resolvent_root(tree, q).a).imag)
    v = np.concatenate(values)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def tail_index_estimate(samples, fraction: float = 0.05) -> float:
    """Hill estimator of the tail index from the top ``fraction`` order statistics."""
    x = np.abs(np.asarray(samples, dtype=float))
    if x.size < 100:
        raise InvalidParameter("need at least 100 samples")
    if not 0 < fraction <= 0.2:
        raise InvalidParameter("fraction must lie in (0, 0.2]")
    k = max(1, int(fraction * x.size))
    top = np.sort(x)[::-1][: k + 1]
    if top[k] <= 0:
        raise InvalidParameter("threshold order statistic must be positive")
    return float(1.0 / np.mean(np.log(top[:k] / top[k])))
