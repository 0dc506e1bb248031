"""Brute-force reference computations in extended precision.

Nothing here touches the package's own kernels; everything is a direct
sum written out from the defining formulas.
"""

import itertools

from mpmath import binomial, exp, factorial, fsum, log, mp, mpf

mp.dps = 40


def comb_pmf(m, p, nu):
    p = mpf(p)
    w = [p**k * (1 - p) ** (m - k) * binomial(m, k) ** mpf(nu) for k in range(m + 1)]
    s = fsum(w)
    return [float(x / s) for x in w]


def comb_log_S(m, p, nu):
    p = mpf(p)
    return float(log(fsum(p**k * (1 - p) ** (m - k) * binomial(m, k) ** mpf(nu) for k in range(m + 1))))


def natural_log_Z(psi, nu, m):
    psi, nu = mpf(psi), mpf(nu)
    return float(log(fsum(exp(psi * k) / (factorial(k) * factorial(m - k)) ** nu for k in range(m + 1))))


def cmp_terms(lam, nu, n_terms):
    lam, nu = mpf(lam), mpf(nu)
    return [lam**j / factorial(j) ** nu for j in range(n_terms)]


def cmp_pmf(lam, nu, x, n_terms=200):
    t = cmp_terms(lam, nu, max(n_terms, x + 1))
    return t[x] / fsum(t)


def multinomial_coef(k):
    m = sum(k)
    out = factorial(m)
    for x in k:
        out /= factorial(x)
    return out


def comm_pmf_all(m, p, nu):
    p = [mpf(x) for x in p]
    r = len(p)
    D = [k for k in itertools.product(range(m + 1), repeat=r) if sum(k) == m]
    w = {}
    for k in D:
        term = multinomial_coef(k) ** mpf(nu)
        for pi, ki in zip(p, k):
            term *= pi**ki
        w[k] = term
    s = fsum(w.values())
    return {k: float(v / s) for k, v in w.items()}
