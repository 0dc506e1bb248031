"""Conway-Maxwell Multinomial (COMM) distribution.

For category probabilities p (length r) and total m,

    P{X = k} = C(m; k)^nu prod_i p_i^k_i / G(p, nu),   k in D,

with D the compositions of m into r nonnegative parts. The normalizer is an
explicit sum over D, so everything here is enumeration based and guarded by
a cap on |D|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .cmp import check_convergent
from .comb import _lse
from .errors import CapExceededError, DomainError

__all__ = [
    "CommParams",
    "CompositionIndex",
    "CommHyper",
    "composition_count",
    "compositions",
    "composition_blocks",
    "composition_array",
    "log_multinomial",
    "comm_log_normalizer",
    "comm_log_pmf",
    "comm_pmf",
    "comm_pmf_table",
    "comm_sufficient_stats",
    "comm_conjugate_update",
    "comm_log_G",
    "comm_log_posterior_kernel",
    "comm_jensen_lower_bound",
    "comm_from_cmp_conditional",
    "comm_exchangeable_sequence_prob",
]

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class CommParams:
    m: int
    p: tuple
    nu: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m!r}")
        p = tuple(float(x) for x in self.p)
        if len(p) < 2:
            raise DomainError("need at least r = 2 categories")
        if any(not (0.0 <= x <= 1.0) for x in p) or abs(math.fsum(p) - 1.0) > 1e-12:
            raise DomainError(f"p must be a probability vector, got {p}")
        if not math.isfinite(self.nu):
            raise DomainError(f"nu must be finite, got {self.nu!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "nu", float(self.nu))

    @property
    def r(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class CompositionIndex:
    """A member of D: nonnegative integer counts summing to m."""

    k: tuple
    m: int | None = None

    def __post_init__(self):
        k = tuple(self.k)
        if len(k) < 2 or any(isinstance(x, bool) or int(x) != x or x < 0 for x in k):
            raise DomainError(f"composition must be >= 2 nonnegative integers, got {k}")
        k = tuple(int(x) for x in k)
        total = sum(k)
        if self.m is not None and total != self.m:
            raise DomainError(f"composition {k} does not sum to m={self.m}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "m", total)

    @property
    def r(self) -> int:
        return len(self.k)


@dataclass(frozen=True)
class CommHyper:
    """Conjugate state: a (length r-1), b, c."""

    a: tuple
    b: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))


def composition_count(m: int, r: int) -> int:
    return math.comb(m + r - 1, r - 1)


def compositions(m: int, r: int) -> Iterator[tuple]:
    """Yield D in colexicographic order (last coordinate most significant)."""
    if r == 1:
        yield (m,)
        return
    for last in range(m + 1):
        for head in compositions(m - last, r - 1):
            yield head + (last,)


def composition_array(m: int, r: int) -> np.ndarray:
    """All of D as an (|D|, r) int array, same order as :func:`compositions`."""
    if r == 1:
        return np.array([[m]], dtype=np.int64)
    parts = []
    for last in range(m + 1):
        head = composition_array(m - last, r - 1)
        parts.append(np.column_stack([head, np.full(len(head), last, dtype=np.int64)]))
    return np.concatenate(parts)


def composition_blocks(m: int, r: int, cap: int = DEFAULT_CAP) -> Iterator[np.ndarray]:
    """Stream D in blocks, one per value of the last coordinate."""
    size = composition_count(m, r)
    if size > cap:
        raise CapExceededError(f"|D| = {size} exceeds cap {cap}", size=size)
    for last in range(m + 1):
        head = composition_array(m - last, r - 1)
        yield np.column_stack([head, np.full(len(head), last, dtype=np.int64)])


def log_multinomial(m, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return gammaln(m + 1.0) - np.sum(gammaln(k + 1.0), axis=-1)


def _log_weights(params: CommParams, K: np.ndarray) -> np.ndarray:
    p = np.asarray(params.p)
    logp = np.log(np.where(p > 0, p, 1.0))
    terms = (K * logp).sum(axis=-1)
    # a positive count in a zero-probability category; 0 * log 0 = 0 otherwise
    terms = np.where(np.any((K > 0) & (p == 0), axis=-1), -np.inf, terms)
    return params.nu * log_multinomial(params.m, K) + terms


def comm_log_normalizer(params: CommParams, cap: int = DEFAULT_CAP) -> float:
    """log G(p, nu). Per-block log-sum-exp values are combined with an
    exactly rounded sum, so the result is independent of block order."""
    partial = [_lse(_log_weights(params, K)) for K in composition_blocks(params.m, params.r, cap)]
    return _lse(np.array(partial))


def _as_index(params: CommParams, k) -> CompositionIndex:
    idx = k if isinstance(k, CompositionIndex) else CompositionIndex(tuple(k))
    if idx.r != params.r or idx.m != params.m:
        raise DomainError(f"composition {idx.k} is not in D for m={params.m}, r={params.r}")
    return idx


def comm_log_pmf(params: CommParams, k, cap: int = DEFAULT_CAP) -> float:
    idx = _as_index(params, k)
    lw = _log_weights(params, np.array([idx.k]))[0]
    return float(lw - comm_log_normalizer(params, cap))


def comm_pmf(params: CommParams, k, cap: int = DEFAULT_CAP) -> float:
    return math.exp(comm_log_pmf(params, k, cap))


def comm_pmf_table(params: CommParams, cap: int = DEFAULT_CAP):
    """(compositions, probabilities) over all of D."""
    size = composition_count(params.m, params.r)
    if size > cap:
        raise CapExceededError(f"|D| = {size} exceeds cap {cap}", size=size)
    K = composition_array(params.m, params.r)
    lw = _log_weights(params, K)
    return K, np.exp(lw - _lse(lw))


def comm_sufficient_stats(samples: Sequence) -> tuple[float, np.ndarray]:
    """S0 = sum_j log(prod_i k_ij!) and S_i = sum_j k_ij for i < r."""
    idx = [k if isinstance(k, CompositionIndex) else CompositionIndex(tuple(k)) for k in samples]
    if not idx:
        raise DomainError("no samples")
    shapes = {(s.m, s.r) for s in idx}
    if len(shapes) > 1:
        raise DomainError(f"samples have mixed (m, r): {sorted(shapes)}")
    K = np.array([s.k for s in idx], dtype=float)
    s0 = math.fsum(gammaln(K + 1.0).ravel())
    return s0, K[:, :-1].sum(axis=0)


def comm_conjugate_update(hyper: CommHyper, k) -> CommHyper:
    idx = k if isinstance(k, CompositionIndex) else CompositionIndex(tuple(k))
    if len(hyper.a) != idx.r - 1:
        raise DomainError(f"a has length {len(hyper.a)}, expected r-1 = {idx.r - 1}")
    a = tuple(ai + ki for ai, ki in zip(hyper.a, idx.k[:-1]))
    b = hyper.b + math.fsum(math.lgamma(x + 1.0) for x in idx.k)
    return CommHyper(a, b, hyper.c + 1.0)


def comm_log_G(psi, nu, m, cap: int = DEFAULT_CAP) -> float:
    """Natural-form normalizer: log sum_D exp(psi . k* - nu log prod k_i!)."""
    psi = np.asarray(psi, dtype=float)
    r = len(psi) + 1
    partial = []
    for K in composition_blocks(m, r, cap):
        lw = K[:, :-1] @ psi - nu * np.sum(gammaln(K + 1.0), axis=-1)
        partial.append(_lse(lw))
    return _lse(np.array(partial))


def _log_phi(x):
    return -0.5 * x * x - 0.5 * math.log(2 * math.pi)


def comm_log_posterior_kernel(psi, nu, hyper: CommHyper, m, cap: int = DEFAULT_CAP) -> float:
    """Unnormalized log density of the conjugate family in (psi, nu), with
    independent standard normals on each psi_i and on nu - 1."""
    psi = np.asarray(psi, dtype=float)
    if len(psi) != len(hyper.a):
        raise DomainError("psi and a must both have length r-1")
    log_g = sum(_log_phi(x) for x in psi) + _log_phi(nu - 1.0)
    return float(log_g + psi @ np.asarray(hyper.a) - hyper.b * nu - hyper.c * comm_log_G(psi, nu, m, cap))


def comm_jensen_lower_bound(psi, nu, m, q, cap: int = DEFAULT_CAP) -> float:
    """Jensen lower bound on log G for a distribution q over D (in the
    order of :func:`composition_array`)."""
    psi = np.asarray(psi, dtype=float)
    r = len(psi) + 1
    size = composition_count(m, r)
    if size > cap:
        raise CapExceededError(f"|D| = {size} exceeds cap {cap}", size=size)
    q = np.asarray(q, dtype=float)
    if q.shape != (size,) or np.any(q < 0) or abs(math.fsum(q) - 1.0) > 1e-10:
        raise DomainError("q must be a probability vector over D")
    K = composition_array(m, r)
    lw = K[:, :-1] @ psi - nu * np.sum(gammaln(K + 1.0), axis=-1)
    pos = q > 0
    return math.fsum(q[pos] * lw[pos]) - math.fsum(q[pos] * np.log(q[pos]))


def comm_from_cmp_conditional(lambdas: Sequence[float], nu: float, m: int) -> CommParams:
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or len(lam) < 2 or np.any(lam <= 0):
        raise DomainError("need at least two positive rates")
    for x in lam:
        check_convergent(x, nu)
    return CommParams(m, tuple(lam / lam.sum()), nu)


def comm_exchangeable_sequence_prob(sum_dist: Mapping[tuple, float], k) -> float:
    """Probability of one particular arrangement with category counts k,
    under the exchangeable law whose count vector has distribution sum_dist."""
    total = math.fsum(sum_dist.values())
    if abs(total - 1.0) > 1e-10:
        raise DomainError(f"sum_dist sums to {total}, not 1")
    idx = k if isinstance(k, CompositionIndex) else CompositionIndex(tuple(k))
    keys = {tuple(key) for key in sum_dist}
    shapes = {(sum(key), len(key)) for key in keys}
    if shapes and (idx.m, idx.r) not in shapes:
        raise DomainError(f"composition {idx.k} is not in D")
    pk = sum_dist.get(idx.k, 0.0)
    return pk / math.exp(log_multinomial(idx.m, idx.k))
