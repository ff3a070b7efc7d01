"""Verification suites. Each returns a list of GofReport; a check passes
when its statistic is at most its critical value."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gamma as gamma_fn

from . import laws
from .diagnostics import (GofReport, TestFunction, concentration_experiment, ks_critical_value,
                          ks_distance, quaternionic_concentration_experiment, row_distances,
                          smallest_sv_bounds_check, smallest_sv_tail_experiment)
from .ensembles import (EntryLaw, sample_ginibre, sample_iid_matrix, sample_kostlan_moduli,
                        sample_poisson_weights, sample_positive_stable)
from .heavy import (g_alpha_normalization, heavy_density_g, make_bank, nu_alpha_z_table,
                    pwit_root_mean, rde_population, tail_index_estimate)
from .rng import as_seed, replicate
from .spectral import (bipartize, conjugate_pairs_consistent, default_real_tol, eigenvalues,
                       real_eigenvalue_count, singular_values)
from .transforms import (QPoint, log_energy, log_potential_empirical, quaternionic_lattice,
                         quaternionic_transform, recover_density_from_b, square_lattice)

GAUSSIAN = EntryLaw("complex-gaussian")
BERNOULLI = EntryLaw("symmetric-bernoulli")


def _report(name, stat, crit, seed, n=0, replicas=1, **details) -> GofReport:
    return GofReport(name, n, replicas, float(stat), float(crit),
                     None if seed is None else as_seed(seed).to_dict(), details)


def nilpotent_pair(n: int, kappa: float) -> tuple[np.ndarray, np.ndarray]:
    """Shift matrix J (ones above the diagonal) and J + kappa e_n e_1^T."""
    a = np.eye(n, k=1)
    b = a.copy()
    b[n - 1, 0] = kappa
    return a, b


# identities ---------------------------------------------------------------

def identities_suite(n: int = 50, seed=7, **_) -> list[GofReport]:
    seed = as_seed(seed)
    a = sample_iid_matrix(n, GAUSSIAN, seed) / math.sqrt(n)
    b = sample_iid_matrix(n, GAUSSIAN, seed.spawn(1)) / math.sqrt(n)
    lam, s = eigenvalues(a), singular_values(a)
    reports = []

    zs = [0.3 + 0.1j, -0.5 + 0.2j, 1.5, 0.05j, -0.7 - 0.7j]
    gap = 0.0
    for z in zs:
        u = log_potential_empirical(lam, z)
        det = -np.linalg.slogdet(a - z * np.eye(n))[1] / n
        sv = -np.mean(np.log(singular_values(a - z * np.eye(n))))
        gap = max(gap, abs(u - det), abs(u - sv))
    reports.append(_report("potential-determinant-singular-chain", gap, 1e-8, seed, n))

    log_lam, log_s = np.cumsum(np.log(np.abs(lam))), np.cumsum(np.log(s))
    reports.append(_report("weyl-products", np.max(log_lam - log_s), 1e-10, seed, n))
    reports.append(_report("weyl-equality-at-n", abs(log_lam[-1] - log_s[-1]), 1e-10, seed, n))
    rev_lam = np.cumsum(np.log(np.abs(lam[::-1])))
    rev_s = np.cumsum(np.log(s[::-1]))
    reports.append(_report("reversed-weyl-products", np.max(rev_s - rev_lam), 1e-10, seed, n))

    frob = np.sum(np.abs(a) ** 2)
    reports.append(_report("eigen-square-sum-below-singular", np.sum(np.abs(lam) ** 2) - np.sum(s**2), 0.0, seed, n))
    reports.append(_report("trace-norm-identity", abs(np.sum(s**2) - frob) / frob, 1e-12, seed, n))

    sb = singular_values(b)
    hw = np.sum((s - sb) ** 2) - np.sum(np.abs(a - b) ** 2)
    reports.append(_report("hoffman-wielandt", hw, 1e-12, seed, n))
    lip = np.max(np.abs(s - sb)) - singular_values(a - b)[0]
    reports.append(_report("singular-value-lipschitz", lip, 1e-12, seed, n))
    s1 = lambda m: singular_values(m)[0]
    reports.append(_report("top-singular-submultiplicative", s1(a @ b) - s1(a) * s1(b), 1e-12, seed, n))
    reports.append(_report("top-singular-subadditive", s1(a + b) - s1(a) - s1(b), 1e-12, seed, n))

    d = row_distances(a)
    lhs, rhs = np.sum(s**-2.0), np.sum(d**-2.0)
    reports.append(_report("inverse-trace-row-distance-identity", abs(lhs - rhs) / lhs, 1e-8, seed, n))
    lo, hi, sn = smallest_sv_bounds_check(a)
    reports.append(_report("smallest-singular-distance-sandwich", max(lo - sn, sn - hi), 1e-10, seed, n))

    h = np.sort(np.abs(np.linalg.eigvalsh(bipartize(a))))[::-1]
    reports.append(_report("bipartized-spectrum-matches-singular",
                           np.max(np.abs(h - np.repeat(s, 2))), 1e-10 * s[0], seed, n))
    lin = 0 if np.array_equal(bipartize(a + b), bipartize(a) + bipartize(b)) else 1
    reports.append(_report("bipartize-linear", lin, 0.0, seed, n))
    return reports


# quarter-circular and circular laws -----------------------------------------

def _law(name):
    return {"gaussian": GAUSSIAN, "bernoulli": BERNOULLI}[name]


def quarter_circular_suite(n: int = 1000, seed=1, replicas: int = 1, threads: int = 1, **_) -> list[GofReport]:
    seed = as_seed(seed)
    reports = []
    for k, name in enumerate(("gaussian", "bernoulli")):
        law = _law(name)
        sv = np.concatenate(replicate(lambda s: singular_values(sample_iid_matrix(n, law, s)) / math.sqrt(n),
                                      seed.spawn(k), replicas, threads))
        reports.append(_report(f"quarter-circular-ks-{name}", ks_distance(sv, laws.quarter_circular_cdf),
                               0.05, seed, n, replicas))
    return reports


def circular_suite(n: int = 1000, seed=2, replicas: int = 1, threads: int = 1, **_) -> list[GofReport]:
    seed = as_seed(seed)
    reports = []
    for k, name in enumerate(("gaussian", "bernoulli")):
        law = _law(name)
        lam = np.concatenate(replicate(lambda s: eigenvalues(sample_iid_matrix(n, law, s) / math.sqrt(n)),
                                       seed.spawn(k), replicas, threads))
        reports.append(_report(f"circular-modulus-ks-{name}", ks_distance(np.abs(lam), laws.circular_modulus_cdf),
                               0.05, seed, n, replicas))
        phase = np.mod(np.angle(lam), 2 * np.pi)
        reports.append(_report(f"circular-phase-ks-{name}",
                               ks_distance(phase, lambda x: laws.uniform_cdf(x, 0, 2 * np.pi)), 0.05, seed, n, replicas))
    return reports


def real_ginibre_suite(n: int = 200, replicas: int = 100, seed=10, threads: int = 1, **_) -> list[GofReport]:
    seed = as_seed(seed)

    def one(s):
        g = sample_ginibre(n, s, real=True)
        lam = eigenvalues(g)
        tol = default_real_tol(g)
        return lam[np.abs(lam.imag) <= tol].real / math.sqrt(n), conjugate_pairs_consistent(lam, tol)

    runs = replicate(one, seed, replicas, threads)
    counts = np.array([len(r[0]) for r in runs])
    ratio = counts.mean() / math.sqrt(2 * n / math.pi)
    pooled = np.concatenate([r[0] for r in runs])
    return [
        _report("real-eigenvalue-count-ratio", abs(ratio - 1), 0.15, seed, n, replicas, ratio=ratio),
        _report("real-eigenvalues-uniform-ks", ks_distance(pooled, lambda x: laws.uniform_cdf(x, -1, 1)),
                0.08, seed, n, replicas),
        _report("real-spectrum-conjugate-pairs", sum(not r[1] for r in runs), 0, seed, n, replicas),
    ]


# Ginibre exact formulas ---------------------------------------------------

def kostlan_suite(n: int = 100, replicas: int = 200, cdf_replicas: int = 10_000, seed=4,
                  threads: int = 1, density_n: int = 200, **_) -> list[GofReport]:
    seed = as_seed(seed)
    moduli = np.concatenate(replicate(lambda s: np.abs(eigenvalues(sample_ginibre(n, s))),
                                      seed.spawn(0), replicas, threads))
    layers = np.concatenate(replicate(lambda s: sample_kostlan_moduli(n, s), seed.spawn(1), replicas, threads))
    reports = [_report("kostlan-two-sample-ks", ks_distance(moduli, layers),
                       ks_critical_value(moduli.size, layers.size), seed, n, replicas)]

    maxima = np.array([sample_kostlan_moduli(n, seed.spawn(2).spawn(r))[0] for r in range(cdf_replicas)])
    maxima /= math.sqrt(n)
    zscores = []
    for r in (0.9, 1.0, 1.1):
        p = float(laws.kostlan_radius_cdf(n, r))
        sigma = max(math.sqrt(p * (1 - p) / cdf_replicas), 1 / cdf_replicas)
        zscores.append(abs(np.mean(maxima <= r) - p) / sigma)
    reports.append(_report("kostlan-radius-cdf-zscore", max(zscores), 3.0, seed, n, cdf_replicas))

    m = density_n
    inside = m * laws.ginibre_mean_density(m, math.sqrt(m) * 0.5)
    outside = m * laws.ginibre_mean_density(m, math.sqrt(m) * 1.5)
    reports.append(_report("ginibre-mean-density-inside", abs(inside - 1 / math.pi), 0.01, None, m))
    reports.append(_report("ginibre-mean-density-outside", abs(outside), 0.01, None, m))
    return reports


def gumbel_suite(n: int = 500, replicas: int = 500, seed=5, threads: int = 1, **_) -> list[GofReport]:
    seed = as_seed(seed)
    radii = np.array(replicate(lambda s: abs(eigenvalues(sample_ginibre(n, s))[0]) / math.sqrt(n),
                               seed, replicas, threads))
    center = laws.gumbel_center(n)
    std_mean = float(np.mean(laws.gumbel_standardize(n, radii)))
    return [
        _report("spectral-radius-mean", abs(radii.mean() - center), 0.03, seed, n, replicas,
                mean=float(radii.mean()), center=center),
        _report("gumbel-standardized-mean", abs(std_mean - laws.EULER_GAMMA), 0.25, seed, n, replicas,
                mean=std_mean),
    ]


# Hermitization ------------------------------------------------------------

NU_Q_POINTS = (QPoint(0.0, 0.5j), QPoint(0.5, 0.3 + 0.4j), QPoint(0.3 + 0.4j, 1.0 + 0.5j),
               QPoint(1.2, 0.2 + 0.6j), QPoint(-0.8j, 1.5 + 0.3j))


def nu_z_suite(n: int = 500, seed=6, **_) -> list[GofReport]:
    seed = as_seed(seed)
    x = np.round(np.arange(0.1, 1.9 + 1e-9, 0.05), 10)
    gap = np.max(np.abs(laws.nu_z_density(0, x) - laws.quarter_circular_density(x)))
    reports = [_report("nu0-fixed-point-vs-quarter-circle", gap, 1e-3, None, len(x))]
    a = sample_iid_matrix(n, GAUSSIAN, seed) / math.sqrt(n)
    worst = max(abs(quaternionic_transform(a, q, "svd").a - laws.nu_z_fixed_point(q.z, q.eta))
                for q in NU_Q_POINTS)
    reports.append(_report("simulated-a-vs-fixed-point", worst, 0.02, seed, n))
    return reports


def quaternionic_suite(n: int = 300, seed=8, step: float = 0.1, t: float = 0.05,
                       threads: int = 1, **_) -> list[GofReport]:
    seed = as_seed(seed)
    reports = []
    hgap = bgap = 0.0
    for r in (0.0, 0.5, 0.9):
        alpha = laws.nu_z_fixed_point(r, 1e-4j)
        hgap = max(hgap, abs(alpha.imag - laws.circular_h_limit(r)))
        bgap = max(bgap, abs(laws.nu_z_beta(r, 1e-4j) + r))
    reports.append(_report("h-limit-circular", hgap, 1e-3, None))
    reports.append(_report("beta-limit-inside-disc", bgap, 1e-3, None))

    lattice = square_lattice(-1.5, 1.5, step)
    g = sample_ginibre(n, seed) / math.sqrt(n)
    _, b = quaternionic_lattice(g, lattice, t, threads)
    dens = recover_density_from_b(b, step).density
    radius = np.abs(lattice)
    inside = np.max(np.abs(dens[radius <= 0.8] - 1 / math.pi))
    outside = np.max(np.abs(dens[radius >= 1.2]))
    reports.append(_report("recovered-density-inside", inside, 0.1, seed, n))
    reports.append(_report("recovered-density-outside", outside, 0.1, seed, n))
    return reports


def hermitization_suite(**kw) -> list[GofReport]:
    return nu_z_suite(**kw) + quaternionic_suite(**kw)


def energy_suite(n: int = 1000, seed=9, **_) -> list[GofReport]:
    lam = eigenvalues(sample_ginibre(n, seed) / math.sqrt(n))
    rate = 0.5 * (log_energy(lam) + np.mean(np.abs(lam) ** 2)) - 3 / 8
    return [_report("ldp-rate-at-circular-law", abs(rate), 0.02, seed, n, rate=rate)]


# heavy tails ----------------------------------------------------------------

def magic_formula_check(alpha: float, samples: int, truncation: int, seed, chunk: int = 500) -> GofReport:
    """Sum xi_k Y_k with Y ~ Exp(1) against E[Y^(alpha/2)]^(2/alpha) S."""
    seed = as_seed(seed)
    sums = []
    for k, start in enumerate(range(0, samples, chunk)):
        rows = min(chunk, samples - start)
        xi = sample_poisson_weights(alpha, truncation, seed.spawn(2 * k), rows=rows)
        y = seed.spawn(2 * k + 1).generator().standard_exponential((rows, truncation))
        sums.append((xi * y).sum(axis=1))
    lhs = np.concatenate(sums)
    scale = gamma_fn(1 + alpha / 2) ** (2 / alpha)
    rhs = scale * sample_positive_stable(alpha, samples, seed.spawn(10**6))
    return _report("magic-formula-two-sample-ks", ks_distance(lhs, rhs), ks_critical_value(samples, samples),
                   seed, samples)


def laplace_check(alpha: float, x: float, samples: int, seed) -> GofReport:
    s = sample_positive_stable(alpha, samples, seed)
    v = np.exp(-x * s)
    target = math.exp(-gamma_fn(1 - alpha / 2) * x ** (alpha / 2))
    se = v.std(ddof=1) / math.sqrt(samples)
    return _report(f"stable-laplace-x{x:g}", abs(v.mean() - target) / se, 3.0, seed, samples,
                   mean=float(v.mean()), target=target)


def tail_shape_residual_slope(alpha: float, bank, r0: float) -> tuple[float, float]:
    """Slope of log g(r) + (alpha/2) r^alpha - 2(alpha-1) log r over [r0, 2 r0]
    and the slope of the main term (alpha/2) r^alpha there."""
    r = np.linspace(r0, 2 * r0, 9)
    g = np.array([heavy_density_g(v, alpha, bank) for v in r])
    resid = np.log(g) + alpha / 2 * r**alpha - 2 * (alpha - 1) * np.log(r)
    main = alpha / 2 * r**alpha
    return float(np.polyfit(r, resid, 1)[0]), float(np.polyfit(r, main, 1)[0])


def log_g_decay_rate(alpha: float, bank, r0: float) -> float:
    """Fitted c in log g(r) ~ const - c r^alpha + 2(alpha-1) log r over [r0, 2 r0]."""
    r = np.linspace(r0, 2 * r0, 9)
    g = np.array([heavy_density_g(v, alpha, bank) for v in r])
    return float(-np.polyfit(r**alpha, np.log(g) - 2 * (alpha - 1) * np.log(r), 1)[0])


def heavy_suite(alpha: float = 1.0, n: int = 2000, seed=11, threads: int = 1, bank_size: int = 10**6,
                magic_samples: int = 10_000, truncation: int = 10_000, trees: int = 1000,
                pwit_branching=(20, 12, 6, 4, 3, 2), tail_r0: float = 5.0, **_) -> list[GofReport]:
    seed = as_seed(seed)
    reports = [magic_formula_check(alpha, magic_samples, truncation, seed.spawn(0))]
    for x in (1.0, 4.0):
        reports.append(laplace_check(alpha, x, 10**6, seed.spawn(1)))

    q = QPoint(0.0, 1j)
    tree_mean, tree_se = pwit_root_mean(q, alpha, pwit_branching, trees, seed.spawn(2))
    pop = rde_population(0.0, 1j, alpha, seed.spawn(3))
    combined = math.hypot(tree_se, pop.a_stderr)
    reports.append(_report("pwit-vs-population-mean-h", abs(tree_mean - pop.a.imag) / combined, 3.0,
                           seed, trees, trees, tree=tree_mean, population=pop.a.imag))

    law = EntryLaw("heavy-tailed", alpha)
    sv = singular_values(sample_iid_matrix(n, law, seed.spawn(4))) * n ** (-1 / alpha)
    table = nu_alpha_z_table(0.0, alpha, seed.spawn(5))
    reports.append(_report("heavy-singular-values-vs-limit-ks", ks_distance(sv, table.cdf), 0.06, seed, n,
                           mass=table.mass))
    reports.append(_report("heavy-limit-density-mass", max(0.97 - table.mass, table.mass - 1.01), 0.0, seed))

    bank = make_bank(alpha, bank_size, seed.spawn(6))
    norm = g_alpha_normalization(alpha, bank)
    reports.append(_report("g-alpha-normalization", abs(norm.total - 1), 0.02, seed, bank_size,
                           mass=norm.mass, tail=norm.tail_bound))
    slope, main = tail_shape_residual_slope(alpha, bank, tail_r0)
    reports.append(_report("g-alpha-tail-shape-residual-slope", abs(slope), 0.1 * abs(main), seed, bank_size,
                           residual_slope=slope, main_slope=main))
    reports.append(_report("singular-value-hill-index", abs(tail_index_estimate(sv, 0.05) - alpha), 0.2, seed, n))
    return reports


# invertibility and concentration -------------------------------------------------

def invertibility_suite(sizes=(100, 200, 400), replicas: int = 200, seed=12, threads: int = 1,
                        bernoulli_n: int = 100, bernoulli_replicas: int = 1000, **_) -> list[GofReport]:
    seed = as_seed(seed)
    t_grid = np.linspace(0.0, 2.0, 21)
    constants, monotone = [], True
    for k, n in enumerate(sizes):
        run = smallest_sv_tail_experiment(n, GAUSSIAN, 0.0, replicas, t_grid, seed.spawn(k), threads)
        constants.append(run.constant)
        monotone &= bool(np.all(np.diff(run.curve) >= 0))
    spread = max(constants) / min(constants)
    reports = [_report("smallest-singular-tail-constant-stability", spread, 2.0, seed, max(sizes), replicas,
                       constants=constants),
               _report("smallest-singular-tail-monotone", 0 if monotone else 1, 0, seed)]

    def singular(s):
        sv = singular_values(sample_iid_matrix(bernoulli_n, BERNOULLI, s))
        return sv[-1] <= 1e-10 * sv[0]

    freq = np.mean(replicate(singular, seed.spawn(99), bernoulli_replicas, threads))
    reports.append(_report("bernoulli-singularity-frequency", freq, 0.01, seed, bernoulli_n, bernoulli_replicas))

    n = 10
    a, b = nilpotent_pair(n, 0.5)
    gap = ks_distance(singular_values(a), singular_values(b))
    reports.append(_report("rank-one-cdf-gap", gap, 1 / n, None, n))
    return reports


def concentration_suite(n: int = 200, replicas: int = 500, seed=13, threads: int = 1,
                        quaternionic_replicas: int = 200, **_) -> list[GofReport]:
    seed = as_seed(seed)
    reports = [concentration_experiment(n, GAUSSIAN, TestFunction("step", 1.0), replicas, seed.spawn(0),
                                        threads=threads),
               concentration_experiment(n, GAUSSIAN, TestFunction("ramp", 0.8, 0.6), replicas, seed.spawn(1),
                                        threads=threads),
               quaternionic_concentration_experiment(n, GAUSSIAN, QPoint(0.3, 1j), quaternionic_replicas,
                                                     seed.spawn(2), ts=(0.25, 0.5), threads=threads)]
    return reports


def circular_and_real_suite(seed=2, threads: int = 1, **kw) -> list[GofReport]:
    # the real-Ginibre checks keep their own scale whatever n and replicas say
    return circular_suite(seed=seed, threads=threads, **kw) + real_ginibre_suite(seed=as_seed(seed).spawn(7),
                                                                                  threads=threads)


SUITES = {
    "identities": identities_suite,
    "quarter-circular": quarter_circular_suite,
    "circular": circular_and_real_suite,
    "kostlan": kostlan_suite,
    "gumbel": gumbel_suite,
    "quaternionic": hermitization_suite,
    "heavy": heavy_suite,
    "invertibility": invertibility_suite,
    "concentration": concentration_suite,
    "energy": energy_suite,
}
