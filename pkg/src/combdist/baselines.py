"""Comparison models for count-of-counts data: binomial MLE and the
correlated-binomial (CB) mixture."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .errors import DomainError
from .inference import FrequencyTable, sufficient_stats

__all__ = ["CbParams", "binomial_mle_fit", "cb_pmf", "cb_pmf_table", "sse", "PUBLISHED_CB_FIT"]

# Published CB fitted frequencies for the soybean data, used verbatim as
# reference values (not re-derived).
PUBLISHED_CB_FIT = (1.19, 0.79, 2.73, 5.03, 5.21, 2.87, 2.17)


@dataclass(frozen=True)
class CbParams:
    """With probability 1 - rho a Binomial(m, p); with probability rho all
    components agree, giving m w.p. p and 0 w.p. 1 - p."""

    m: int
    p: float
    rho: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m!r}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p out of range [0, 1]: {self.p!r}")
        if not 0.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [0, 1], got {self.rho!r}")


def _binom_pmf(m: int, p: float) -> np.ndarray:
    k = np.arange(m + 1.0)
    log_c = gammaln(m + 1.0) - gammaln(k + 1.0) - gammaln(m - k + 1.0)
    return np.exp(log_c + xlogy(k, p) + xlog1py(m - k, -p))


def binomial_mle_fit(table: FrequencyTable):
    """Return (p_hat, fitted frequencies) for the binomial model."""
    stats = sufficient_stats(table)
    p_hat = stats.S1 / (stats.n * stats.m)
    return p_hat, table.n * _binom_pmf(table.m, p_hat)


def cb_pmf_table(params: CbParams) -> np.ndarray:
    m, p, rho = params.m, params.p, params.rho
    out = (1.0 - rho) * _binom_pmf(m, p)
    out[0] += rho * (1.0 - p)
    out[m] += rho * p
    return out


def cb_pmf(params: CbParams, k: int) -> float:
    if isinstance(k, bool) or int(k) != k or not 0 <= k <= params.m:
        raise DomainError(f"k must be an integer in 0..{params.m}, got {k!r}")
    return float(cb_pmf_table(params)[int(k)])


def sse(observed, fitted) -> float:
    observed = np.asarray(observed, dtype=float)
    fitted = np.asarray(fitted, dtype=float)
    if observed.shape != fitted.shape:
        raise DomainError(f"length mismatch: {observed.shape} vs {fitted.shape}")
    return math.fsum((observed - fitted) ** 2)
