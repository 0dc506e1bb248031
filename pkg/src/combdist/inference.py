"""Conjugate Bayesian inference for the COMB distribution.

Works in the natural coordinates (psi, nu). With the prior weight
g(psi, nu) = phi(psi) phi(nu - 1) the conjugate density is

    h(psi, nu) ∝ g(psi, nu) exp(a psi - b nu) Z(psi, nu)^(-c)

and an observation k updates (a, b, c) by (k, log(k!(m-k)!), 1). The
constant factors (1-p)^m (m!)^nu of the likelihood are dropped, so Z is the
natural-form normalizer from :mod:`combdist.comb`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.special import logsumexp

from .comb import CombNatural, _lse, log_factorial_pairs, log_Z, pmf_natural_table
from .errors import DomainError, NumericError, OptimizationError

__all__ = [
    "FrequencyTable",
    "SufficientStats",
    "Hyperparams",
    "NormalPrior",
    "GridSpec",
    "PosteriorGrid",
    "MapResult",
    "ProprietyReport",
    "sufficient_stats",
    "conjugate_update",
    "update_batch",
    "log_posterior_kernel",
    "grid_posterior",
    "map_estimate",
    "fitted_counts",
    "jensen_lower_bound",
    "laplace_total_variation",
    "propriety_check",
]


@dataclass(frozen=True)
class FrequencyTable:
    """Count-of-counts data: counts[k] observations equal to k."""

    m: int
    counts: tuple

    def __post_init__(self):
        counts = tuple(self.counts)
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m!r}")
        if len(counts) != self.m + 1:
            raise DomainError(f"need m+1 = {self.m + 1} counts, got {len(counts)}")
        if any(isinstance(c, bool) or int(c) != c or c < 0 for c in counts):
            raise DomainError("counts must be nonnegative integers")
        counts = tuple(int(c) for c in counts)
        if sum(counts) < 1:
            raise DomainError("table has no observations")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @classmethod
    def from_observations(cls, ks: Iterable[int], m: int) -> "FrequencyTable":
        counts = [0] * (m + 1)
        for k in ks:
            if isinstance(k, bool) or int(k) != k or not 0 <= k <= m:
                raise DomainError(f"observation {k!r} outside 0..{m}")
            counts[int(k)] += 1
        return cls(m, tuple(counts))

    def observations(self) -> list[int]:
        return [k for k, c in enumerate(self.counts) for _ in range(c)]


@dataclass(frozen=True)
class SufficientStats:
    S1: int
    S2: float
    n: int
    m: int


@dataclass(frozen=True)
class Hyperparams:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    m: int = 1

    def __post_init__(self):
        if self.c < 0:
            raise DomainError(f"c must be nonnegative, got {self.c!r}")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m!r}")


@dataclass(frozen=True)
class NormalPrior:
    """Independent normal weights on psi and nu; the default is phi(psi) phi(nu - 1)."""

    psi_mean: float = 0.0
    psi_var: float = 1.0
    nu_mean: float = 1.0
    nu_var: float = 1.0

    def __post_init__(self):
        if not (self.psi_var > 0 and self.nu_var > 0):
            raise DomainError("prior variances must be positive")

    def log_density(self, psi, nu):
        dp = psi - self.psi_mean
        dn = nu - self.nu_mean
        return (
            -0.5 * dp * dp / self.psi_var
            - 0.5 * dn * dn / self.nu_var
            - 0.5 * math.log(4 * math.pi**2 * self.psi_var * self.nu_var)
        )


DEFAULT_PRIOR = NormalPrior()


def sufficient_stats(table: FrequencyTable) -> SufficientStats:
    k = np.arange(table.m + 1)
    counts = np.array(table.counts)
    s2 = math.fsum(counts * log_factorial_pairs(table.m))
    return SufficientStats(int((k * counts).sum()), s2, table.n, table.m)


def conjugate_update(hyper: Hyperparams, k: int) -> Hyperparams:
    m = hyper.m
    if isinstance(k, bool) or int(k) != k or not 0 <= k <= m:
        raise DomainError(f"observation {k!r} outside 0..{m}")
    lf = math.lgamma(k + 1.0) + math.lgamma(m - k + 1.0)
    return Hyperparams(hyper.a + k, hyper.b + lf, hyper.c + 1.0, m)


def update_batch(hyper: Hyperparams, stats: SufficientStats) -> Hyperparams:
    if stats.m != hyper.m:
        raise DomainError(f"data has m={stats.m} but hyperparameters have m={hyper.m}")
    return Hyperparams(hyper.a + stats.S1, hyper.b + stats.S2, hyper.c + stats.n, hyper.m)


def log_posterior_kernel(psi, nu, hyper: Hyperparams, prior: NormalPrior = DEFAULT_PRIOR):
    """log g + a psi - b nu - c log Z; broadcasts over array inputs."""
    # overflow is reported by the callers, which check finiteness
    with np.errstate(over="ignore", invalid="ignore"):
        out = prior.log_density(psi, nu) + hyper.a * np.asarray(psi) - hyper.b * np.asarray(nu)
        if hyper.c != 0:
            out = out - hyper.c * log_Z(psi, nu, hyper.m)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------- grid


@dataclass(frozen=True)
class GridSpec:
    psi_min: float = -5.0
    psi_max: float = 5.0
    nu_min: float = -4.0
    nu_max: float = 6.0
    psi_points: int = 401
    nu_points: int = 401

    def __post_init__(self):
        if self.psi_points < 32 or self.nu_points < 32:
            raise DomainError("each axis needs at least 32 points")
        if not (self.psi_max > self.psi_min and self.nu_max > self.nu_min):
            raise DomainError("grid axes must be strictly increasing")

    def axes(self):
        return (
            np.linspace(self.psi_min, self.psi_max, self.psi_points),
            np.linspace(self.nu_min, self.nu_max, self.nu_points),
        )

    def refined(self) -> "GridSpec":
        """Same box, half the spacing."""
        return GridSpec(
            self.psi_min, self.psi_max, self.nu_min, self.nu_max,
            2 * self.psi_points - 1, 2 * self.nu_points - 1,
        )


def _trapezoid_weights(x):
    w = np.empty_like(x)
    d = np.diff(x)
    w[0] = d[0] / 2
    w[-1] = d[-1] / 2
    w[1:-1] = (d[:-1] + d[1:]) / 2
    return w


@dataclass(frozen=True)
class PosteriorGrid:
    """Normalized log density on a (psi, nu) lattice, indexed [psi, nu]."""

    psi_axis: np.ndarray
    nu_axis: np.ndarray
    log_density: np.ndarray

    def weights(self) -> np.ndarray:
        return np.outer(_trapezoid_weights(self.psi_axis), _trapezoid_weights(self.nu_axis))

    def cell_masses(self) -> np.ndarray:
        return self.weights() * np.exp(self.log_density)

    def mode(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.log_density), self.log_density.shape)
        return float(self.psi_axis[i]), float(self.nu_axis[j])

    def density_at(self, psi_axis, nu_axis) -> np.ndarray:
        """Bilinear interpolation of the density onto another lattice."""
        from scipy.interpolate import RegularGridInterpolator

        f = RegularGridInterpolator((self.psi_axis, self.nu_axis), np.exp(self.log_density))
        P, N = np.meshgrid(psi_axis, nu_axis, indexing="ij")
        return f(np.stack([P, N], axis=-1))


def grid_posterior(
    hyper: Hyperparams, spec: GridSpec = GridSpec(), prior: NormalPrior = DEFAULT_PRIOR
) -> PosteriorGrid:
    psi_axis, nu_axis = spec.axes()
    P, N = np.meshgrid(psi_axis, nu_axis, indexing="ij")
    K = log_posterior_kernel(P, N, hyper, prior)
    bad = ~np.isfinite(K)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NumericError(
            f"non-finite kernel at psi={psi_axis[i]:.6g}, nu={nu_axis[j]:.6g}"
        )
    w = np.outer(_trapezoid_weights(psi_axis), _trapezoid_weights(nu_axis))
    # row-wise then across rows: a fixed reduction tree, independent of evaluation order
    row = logsumexp(K + np.log(w), axis=1)
    log_norm = _lse(row)
    return PosteriorGrid(psi_axis, nu_axis, K - log_norm)


# ---------------------------------------------------------------- MAP


@dataclass(frozen=True)
class MapResult:
    psi_hat: float
    nu_hat: float
    sigma: np.ndarray  # inverse of the negative Hessian at the mode
    iterations: int = 0
    grad_norm: float = 0.0
    trace: list = field(default_factory=list, repr=False, compare=False)

    @property
    def mode(self) -> np.ndarray:
        return np.array([self.psi_hat, self.nu_hat])


def _fd_steps(x, step):
    return step * np.maximum(1.0, np.abs(x))


def _fd_gradient(f, x, step):
    h = _fd_steps(x, step)
    g = np.empty(2)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h[i]
        g[i] = (f(x + e) - f(x - e)) / (2 * h[i])
    return g


def _fd_hessian(f, x, step):
    h = _fd_steps(x, step)
    H = np.empty((2, 2))
    f0 = f(x)
    for i in range(2):
        ei = np.zeros(2)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / (h[i] * h[i])
    e0 = np.array([h[0], 0.0])
    e1 = np.array([0.0, h[1]])
    H[0, 1] = H[1, 0] = (
        f(x + e0 + e1) - f(x + e0 - e1) - f(x - e0 + e1) + f(x - e0 - e1)
    ) / (4 * h[0] * h[1])
    return H


def map_estimate(
    hyper: Hyperparams,
    prior: NormalPrior = DEFAULT_PRIOR,
    grid: PosteriorGrid | None = None,
    start=None,
    tol: float = 1e-8,
    max_iter: int = 100,
    step: float = 1e-4,
) -> MapResult:
    """Posterior mode by Newton ascent with finite-difference derivatives.

    Starts from ``start`` if given, else from the argmax of ``grid`` (the
    default lattice when ``grid`` is None).
    """

    def f(x):
        return log_posterior_kernel(x[0], x[1], hyper, prior)

    if start is None:
        if grid is None:
            grid = grid_posterior(hyper, GridSpec(), prior)
        start = grid.mode()
    x = np.array(start, dtype=float)
    trace = []
    for it in range(max_iter + 1):
        g = _fd_gradient(f, x, step)
        gnorm = float(np.linalg.norm(g))
        fx = f(x)
        trace.append((x.copy(), fx, gnorm))
        if gnorm < tol:
            H = _fd_hessian(f, x, step)
            sigma = np.linalg.inv(-H)
            sigma = 0.5 * (sigma + sigma.T)
            if np.any(np.linalg.eigvalsh(sigma) <= 0):
                raise OptimizationError("Hessian at the mode is not negative definite", trace)
            return MapResult(float(x[0]), float(x[1]), sigma, it, gnorm, trace)
        if it == max_iter:
            break
        H = _fd_hessian(f, x, step)
        try:
            direction = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            direction = g
        if direction @ g <= 0:
            direction = g  # not an ascent direction; fall back to the gradient
        t = 1.0
        while f(x + t * direction) < fx and t > 1e-12:
            t *= 0.5
        x = x + t * direction
    raise OptimizationError(
        f"Newton ascent did not reach gradient norm {tol} in {max_iter} iterations", trace
    )


def fitted_counts(map_result: MapResult, m: int, n: int) -> np.ndarray:
    """Expected frequencies n * P{W = k} at the posterior mode."""
    return n * pmf_natural_table(CombNatural(m, map_result.psi_hat, map_result.nu_hat))


def laplace_total_variation(grid: PosteriorGrid, map_result: MapResult) -> float:
    """Total variation between the grid posterior and the normal
    approximation N(mode, sigma), both normalized on the same lattice."""
    P, N = np.meshgrid(grid.psi_axis, grid.nu_axis, indexing="ij")
    d = np.stack([P - map_result.psi_hat, N - map_result.nu_hat], axis=-1)
    prec = np.linalg.inv(map_result.sigma)
    log_q = -0.5 * np.einsum("...i,ij,...j->...", d, prec, d)
    w = grid.weights()
    q = w * np.exp(log_q - log_q.max())
    q /= q.sum()
    return 0.5 * float(np.abs(grid.cell_masses() - q).sum())


# ---------------------------------------------------------------- bounds


def jensen_lower_bound(psi, nu, m, q) -> float:
    """Lower bound on log Z from Jensen's inequality with weights q:

        psi E[Q] - nu E[log(Q!(m-Q)!)] - sum_k q_k log q_k

    Equality holds when q is the COMB pmf at (psi, nu).
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (m + 1,) or np.any(q < 0) or abs(math.fsum(q) - 1.0) > 1e-10:
        raise DomainError(f"q must be a probability vector of length {m + 1}")
    k = np.arange(m + 1, dtype=float)
    lw = psi * k - nu * log_factorial_pairs(m)
    pos = q > 0
    return math.fsum(q[pos] * lw[pos]) - math.fsum(q[pos] * np.log(q[pos]))


# ---------------------------------------------------------------- propriety


@dataclass
class ProprietyReport:
    half_widths: list
    log_masses: list
    relative_tails: list
    boundary_log_gap: float
    passed: bool
    threshold: float = 1e-12

    def lines(self) -> list[str]:
        out = []
        for L, lm, rt in zip(self.half_widths, self.log_masses, self.relative_tails):
            out.append(f"L={L:g}  log mass={lm:.12g}  relative tail={rt:.3e}")
        out.append(f"window edge sits {self.boundary_log_gap:.1f} nats below the peak")
        out.append("PASS" if self.passed else "FAIL")
        return out


def propriety_check(
    hyper: Hyperparams,
    expansion_levels: int = 3,
    prior: NormalPrior = DEFAULT_PRIOR,
    base: float = 5.0,
    window_sds: float = 40.0,
    threshold: float = 1e-12,
) -> ProprietyReport:
    """Integrate the kernel over boxes [-L, L]^2, L = base * 2^i.

    The kernel is log-concave for c >= 0, so its mass lies in a window of
    ``window_sds`` Laplace standard deviations around the mode; each box
    is integrated on a fixed lattice restricted to that window. The lattice
    is shared by all boxes, so each expansion adds exactly the mass of the
    new lattice points.
    """
    if expansion_levels < 2:
        raise DomainError("need at least two expansion levels")
    mode = map_estimate(hyper, prior, start=(prior.psi_mean, prior.nu_mean), max_iter=200)
    sd = np.sqrt(np.diag(mode.sigma))
    h = min(0.05, float(sd.min()) / 8)
    lo = mode.mode - window_sds * sd
    hi = mode.mode + window_sds * sd
    axes = [np.arange(math.floor(lo[i] / h), math.ceil(hi[i] / h) + 1) * h for i in range(2)]
    P, N = np.meshgrid(*axes, indexing="ij")
    K = log_posterior_kernel(P, N, hyper, prior)
    peak = float(K.max())
    edge = np.concatenate([K[0], K[-1], K[:, 0], K[:, -1]])
    gap = peak - float(edge.max())

    # smallest box containing each lattice point
    reach = np.maximum(np.abs(P), np.abs(N))
    widths = [base * 2**i for i in range(expansion_levels)]
    log_masses, tails = [], []
    prev = -math.inf
    for L in widths:
        inside = reach <= L
        new = inside & (reach > (L / 2 if L > base else -1.0))
        log_mass = _lse(K[inside]) + 2 * math.log(h) if inside.any() else -math.inf
        log_added = _lse(K[new]) + 2 * math.log(h) if new.any() else -math.inf
        if log_mass == -math.inf:
            rel = math.inf
        else:
            rel = math.exp(log_added - log_mass)
        log_masses.append(log_mass)
        tails.append(rel)
        prev = log_mass
    passed = math.isfinite(prev) and tails[-1] < threshold and gap > 50.0
    return ProprietyReport(widths, log_masses, tails, gap, passed, threshold)
