"""Conway-Maxwell Binomial (COMB) distribution.

The pmf on k = 0..m is

    P{W = k} = p^k (1-p)^(m-k) C(m, k)^nu / S(p, nu)

and, with psi = log(p / (1 - p)), the equivalent natural form

    P{W = k} = exp(psi k) / [k! (m-k)!]^nu / Z(psi, nu).

Everything is evaluated in log space; C(m, k)^nu overflows double precision
for quite modest m once |nu| grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DomainError

__all__ = [
    "CombParams",
    "CombNatural",
    "Moments",
    "log_choose",
    "log_factorial_pairs",
    "log_normalizer",
    "log_pmf_table",
    "pmf",
    "pmf_table",
    "log_Z",
    "pmf_natural",
    "pmf_natural_table",
    "moments",
    "log_T",
    "generating_function",
    "sample",
    "logistic",
    "logit",
]


def _check_m(m):
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    return int(m)


def _check_nu(nu):
    if not math.isfinite(nu):
        raise DomainError(f"nu must be finite, got {nu!r}")
    return float(nu)


@dataclass(frozen=True)
class CombParams:
    """Mean parameterization (m, p, nu)."""

    m: int
    p: float
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "m", _check_m(self.m))
        object.__setattr__(self, "nu", _check_nu(self.nu))
        p = float(self.p)
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p out of range [0, 1]: {self.p!r}")
        object.__setattr__(self, "p", p)

    def natural(self) -> "CombNatural":
        if self.p in (0.0, 1.0):
            raise DomainError("endpoint p has no finite log-odds")
        return CombNatural(self.m, logit(self.p), self.nu)


@dataclass(frozen=True)
class CombNatural:
    """Natural parameterization (m, psi, nu) with psi the log-odds of p."""

    m: int
    psi: float
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "m", _check_m(self.m))
        object.__setattr__(self, "nu", _check_nu(self.nu))
        if not math.isfinite(self.psi):
            raise DomainError(f"psi must be finite, got {self.psi!r}")
        object.__setattr__(self, "psi", float(self.psi))

    def mean_params(self) -> CombParams:
        return CombParams(self.m, logistic(self.psi), self.nu)


class Moments(NamedTuple):
    mean: float
    variance: float
    second_factorial: float


def logistic(psi):
    return 0.5 * (1.0 + math.tanh(0.5 * psi))


def logit(p):
    return math.log(p) - math.log(1.0 - p)


def _lse(x):
    # fsum is exactly rounded, so the result does not depend on term order
    mx = float(np.max(x))
    if mx == -math.inf:
        return -math.inf
    return mx + math.log(math.fsum(np.exp(np.asarray(x) - mx)))


def log_choose(m, k):
    """log C(m, k); the two denominator terms are summed first so the
    value is bitwise symmetric under k -> m - k."""
    k = np.asarray(k, dtype=float)
    return gammaln(m + 1.0) - (gammaln(k + 1.0) + gammaln(m - k + 1.0))


def log_factorial_pairs(m):
    """Vector of log(k! (m-k)!) for k = 0..m."""
    k = np.arange(m + 1, dtype=float)
    return gammaln(k + 1.0) + gammaln(m - k + 1.0)


def _log_terms(params: CombParams):
    m, p = params.m, params.p
    k = np.arange(m + 1, dtype=float)
    lp, lq = math.log(p), math.log(1.0 - p)
    return (k * lp + (m - k) * lq) + params.nu * log_choose(m, k)


def log_normalizer(params: CombParams) -> float:
    """log S(p, nu); requires 0 < p < 1."""
    if not 0.0 < params.p < 1.0:
        raise DomainError("log_normalizer needs 0 < p < 1; endpoints are point masses")
    return _lse(_log_terms(params))


def log_pmf_table(params: CombParams) -> np.ndarray:
    m = params.m
    if params.p == 0.0 or params.p == 1.0:
        out = np.full(m + 1, -np.inf)
        out[0 if params.p == 0.0 else m] = 0.0
        return out
    terms = _log_terms(params)
    return terms - _lse(terms)


def pmf_table(params: CombParams) -> np.ndarray:
    return np.exp(log_pmf_table(params))


def _check_k(k, m):
    if isinstance(k, bool) or int(k) != k or not 0 <= k <= m:
        raise DomainError(f"k must be an integer in 0..{m}, got {k!r}")
    return int(k)


def pmf(params: CombParams, k: int) -> float:
    k = _check_k(k, params.m)
    return float(np.exp(log_pmf_table(params)[k]))


def log_Z(psi, nu, m):
    """log Z(psi, nu) = log sum_k exp(psi k) / [k!(m-k)!]^nu.

    Broadcasts over array-valued psi and nu, which is how the posterior grid
    evaluates it on a whole lattice at once.
    """
    psi = np.asarray(psi, dtype=float)
    nu = np.asarray(nu, dtype=float)
    k = np.arange(m + 1, dtype=float)
    lf = log_factorial_pairs(m)
    w = psi[..., None] * k - nu[..., None] * lf
    out = logsumexp(w, axis=-1)
    return float(out) if out.ndim == 0 else out


def pmf_natural_table(natural: CombNatural) -> np.ndarray:
    m = natural.m
    k = np.arange(m + 1, dtype=float)
    w = natural.psi * k - natural.nu * log_factorial_pairs(m)
    return np.exp(w - _lse(w))


def pmf_natural(natural: CombNatural, k: int) -> float:
    k = _check_k(k, natural.m)
    return float(pmf_natural_table(natural)[k])


def moments(params: CombParams) -> Moments:
    """Mean, variance and E[W(W-1)] by direct summation over the support."""
    probs = pmf_table(params)
    k = np.arange(params.m + 1, dtype=float)
    mean = math.fsum(k * probs)
    fact2 = math.fsum(k * (k - 1.0) * probs)
    var = max(fact2 + mean - mean * mean, 0.0)
    return Moments(mean, var, fact2)


def log_T(log_x, nu, m):
    """log T(x, nu) = log sum_k x^k C(m, k)^nu for x = exp(log_x) >= 0."""
    k = np.arange(m + 1, dtype=float)
    terms = nu * log_choose(m, k)
    if log_x == -math.inf:
        return float(terms[0])
    return _lse(k * log_x + terms)


def generating_function(params: CombParams, kind: str, t):
    """Evaluate the pgf, mgf or characteristic function at t.

    Each is a ratio T(x * r, nu) / T(r, nu) with r = p/(1-p) and x = t,
    e^t or e^{it} respectively.
    """
    if not 0.0 < params.p < 1.0:
        raise DomainError("generating functions need 0 < p < 1")
    if not math.isfinite(t):
        raise DomainError(f"t must be finite, got {t!r}")
    m, nu = params.m, params.nu
    log_r = logit(params.p)
    base = log_T(log_r, nu, m)
    if kind == "mgf":
        return math.exp(log_T(t + log_r, nu, m) - base)
    k = np.arange(m + 1, dtype=float)
    # normalized T(r) summands; both remaining cases reweight these
    w = np.exp(k * log_r + nu * log_choose(m, k) - base)
    if kind == "pgf":
        if t > 0.0:
            return math.exp(log_T(math.log(t) + log_r, nu, m) - base)
        # t <= 0: signed terms, no log-space shortcut
        return math.fsum(w * t ** k)
    if kind == "cf":
        return complex(np.sum(w * np.exp(1j * t * k)))
    raise DomainError(f"unknown generating function kind {kind!r}; use pgf, mgf or cf")


def sample(params: CombParams, n: int, seed: int) -> list[int]:
    """Draw n values by inverse-CDF lookup.

    The generator is numpy's PCG64 seeded with ``seed``, so draws reproduce
    across platforms for a given numpy bit-generator version.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    cdf = np.cumsum(pmf_table(params))
    cdf[-1] = 1.0
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(int(n))
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, params.m).tolist()
