"""Exchangeable Bernoulli representations of a distribution on the sum.

Any law for S = X_1 + ... + X_m has exactly one exchangeable joint law on
(X_1, ..., X_m): each sequence with k ones gets p_k / C(m, k). Pair
marginals then follow from the factorial moments of S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .comb import CombParams, pmf_table
from .errors import DomainError

__all__ = [
    "SumDistribution",
    "PairwiseProbs",
    "extreme_point_weights",
    "sequence_probability",
    "pairwise_from_sum",
    "pairwise_probs",
    "component_correlation",
    "pairwise_curve",
]


@dataclass(frozen=True)
class SumDistribution:
    m: int
    probs: tuple

    def __post_init__(self):
        probs = tuple(float(x) for x in self.probs)
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m!r}")
        if len(probs) != self.m + 1:
            raise DomainError(f"need m+1 = {self.m + 1} probabilities, got {len(probs)}")
        if any(x < 0 for x in probs) or abs(math.fsum(probs) - 1.0) > 1e-12:
            raise DomainError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_comb(cls, params: CombParams) -> "SumDistribution":
        probs = pmf_table(params)
        return cls(params.m, tuple(probs / math.fsum(probs)))


@dataclass(frozen=True)
class PairwiseProbs:
    """Joint law of two distinct components; p01 = p10 by exchangeability."""

    p00: float
    p01: float
    p11: float

    @property
    def total(self) -> float:
        return self.p00 + 2.0 * self.p01 + self.p11


def extreme_point_weights(sum_dist: SumDistribution) -> np.ndarray:
    """Mixture weights on the extreme points e_0..e_m.

    e_l is uniform on the sequences with exactly l ones, so the weight on
    e_l is just P{S = l}.
    """
    return np.array(sum_dist.probs)


def sequence_probability(sum_dist: SumDistribution, bits: Sequence[int]) -> float:
    bits = list(bits)
    if len(bits) != sum_dist.m or any(b not in (0, 1) for b in bits):
        raise DomainError(f"bits must be a 0/1 vector of length {sum_dist.m}")
    k = sum(bits)
    return sum_dist.probs[k] / math.comb(sum_dist.m, k)


def pairwise_from_sum(sum_dist: SumDistribution) -> PairwiseProbs:
    """Pair marginals from E[W(W-1)], E[W(m-W)] and E[(m-W)(m-W-1)]."""
    m = sum_dist.m
    if m < 2:
        raise DomainError("pairwise probabilities need m >= 2")
    k = np.arange(m + 1, dtype=float)
    w = np.array(sum_dist.probs)
    denom = m * (m - 1.0)
    p11 = math.fsum(k * (k - 1) * w) / denom
    p01 = math.fsum(k * (m - k) * w) / denom
    p00 = math.fsum((m - k) * (m - k - 1) * w) / denom
    return PairwiseProbs(p00, p01, p11)


def pairwise_probs(params: CombParams) -> PairwiseProbs:
    return pairwise_from_sum(SumDistribution.from_comb(params))


def component_correlation(params: CombParams) -> float:
    """Common correlation between two Bernoulli components.

    Uses cov = p11 p00 - p01^2 and q(1-q) = (p11 + p01)(p00 + p01), which
    keeps full precision when the margin q is within rounding of 0 or 1.
    """
    if params.m < 2:
        raise DomainError("correlation needs m >= 2")
    pp = pairwise_probs(params)
    q, one_minus_q = pp.p11 + pp.p01, pp.p00 + pp.p01
    if q <= 0.0 or one_minus_q <= 0.0:
        raise DomainError("correlation undefined for a degenerate margin")
    rho = (pp.p11 * pp.p00 - pp.p01 * pp.p01) / (q * one_minus_q)
    return min(max(rho, -1.0), 1.0)


def pairwise_curve(m: int, nu: float, p_grid) -> list[tuple[float, PairwiseProbs]]:
    out = []
    for p in p_grid:
        if not 0.0 < p < 1.0:
            raise DomainError(f"grid points must lie in (0, 1), got {p}")
        out.append((float(p), pairwise_probs(CombParams(m, p, nu))))
    return out
