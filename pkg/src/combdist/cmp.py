"""Conway-Maxwell-Poisson distribution and its conditional link to COMB.

    P{W = x} = lam^x / ((x!)^nu M(lam, nu)),   M(lam, nu) = sum_j lam^j / (j!)^nu

M is summed term by term until the next term is negligible relative to the
running total. Parameter pairs for which the series diverges are refused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .comb import CombParams
from .errors import CapExceededError, DivergentSeriesError, DomainError

__all__ = [
    "CmpParams",
    "check_convergent",
    "cmp_log_normalizer",
    "cmp_truncation",
    "cmp_log_pmf_table",
    "cmp_pmf",
    "comb_from_cmp_conditional",
]

REL_TAIL = 1e-15
DEFAULT_CAP = 10**6
_CHUNK = 512


@dataclass(frozen=True)
class CmpParams:
    lam: float
    nu: float
    truncation: int = DEFAULT_CAP  # hard cap on the number of series terms

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise DomainError(f"lambda must be positive and finite, got {self.lam!r}")
        if not math.isfinite(self.nu):
            raise DomainError(f"nu must be finite, got {self.nu!r}")
        if int(self.truncation) != self.truncation or self.truncation < 1:
            raise DomainError("truncation must be a positive integer")


def check_convergent(lam, nu):
    if nu < 0 or (nu == 0 and lam >= 1):
        raise DivergentSeriesError(
            f"CMP series diverges at lambda={lam}, nu={nu}; need nu > 0 or (nu = 0 and lambda < 1)"
        )


def _series(params: CmpParams):
    """Return (log M, K) where terms 0..K-1 were summed."""
    lam, nu = params.lam, params.nu
    check_convergent(lam, nu)
    log_lam = math.log(lam)
    total = -math.inf
    start = 0
    while start < params.truncation:
        stop = min(start + _CHUNK, params.truncation)
        j = np.arange(start, stop, dtype=float)
        logt = j * log_lam - nu * gammaln(j + 1.0)
        for i, lt in enumerate(logt):
            total = np.logaddexp(total, lt)
            jj = start + i
            # next term ratio lam / (j+1)^nu < 1 means the terms are decreasing from here on
            decreasing = log_lam - nu * math.log(jj + 1.0) < 0
            if decreasing and lt - total < math.log(REL_TAIL):
                return float(total), jj + 1
        start = stop
    raise CapExceededError(
        f"CMP series not converged within {params.truncation} terms", size=params.truncation
    )


def cmp_log_normalizer(params: CmpParams) -> float:
    return _series(params)[0]


def cmp_truncation(params: CmpParams) -> int:
    """Number of terms actually summed for the normalizer."""
    return _series(params)[1]


def cmp_log_pmf_table(params: CmpParams) -> np.ndarray:
    log_m, K = _series(params)
    x = np.arange(K, dtype=float)
    return x * math.log(params.lam) - params.nu * gammaln(x + 1.0) - log_m


def cmp_pmf(params: CmpParams, x: int) -> float:
    if isinstance(x, bool) or int(x) != x or x < 0:
        raise DomainError(f"x must be a nonnegative integer, got {x!r}")
    log_m = cmp_log_normalizer(params)
    return math.exp(x * math.log(params.lam) - params.nu * gammaln(x + 1.0) - log_m)


def comb_from_cmp_conditional(lambda1, lambda2, nu, m) -> CombParams:
    """COMB parameters of X | X + Y = m for independent X ~ CMP(lambda1, nu),
    Y ~ CMP(lambda2, nu)."""
    if not (lambda1 > 0 and lambda2 > 0):
        raise DomainError("CMP rates must be positive")
    check_convergent(lambda1, nu)
    check_convergent(lambda2, nu)
    return CombParams(m, lambda1 / (lambda1 + lambda2), nu)
