import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import multinomial

from combdist.cmp import CmpParams, cmp_pmf
from combdist.comb import CombParams, pmf_table
from combdist.comm import (
    CommHyper,
    CommParams,
    CompositionIndex,
    comm_conjugate_update,
    comm_exchangeable_sequence_prob,
    comm_from_cmp_conditional,
    comm_jensen_lower_bound,
    comm_log_G,
    comm_log_normalizer,
    comm_log_posterior_kernel,
    comm_pmf,
    comm_pmf_table,
    comm_sufficient_stats,
    composition_array,
    composition_count,
    compositions,
)
from combdist.errors import CapExceededError, DomainError

from . import oracles

# exhaustive enumeration over the 10 compositions at 50 digits
LOG_G_3_3 = 0.44005919309558563599
PMF_3_3_AT_111 = 0.23736557078667017204


def cmp_conditional(lams, nu, m):
    """P{X = k | sum X = m} for independent CMP(lam_i, nu), by enumeration."""
    dists = [CmpParams(lam, nu) for lam in lams]
    K = composition_array(m, len(lams))
    joint = np.array([np.prod([cmp_pmf(d, int(ki)) for d, ki in zip(dists, k)]) for k in K])
    return K, joint / joint.sum()


class TestEnumeration:
    @pytest.mark.parametrize("m,r", [(0, 2), (3, 2), (4, 3), (5, 4), (7, 3)])
    def test_count(self, m, r):
        got = list(compositions(m, r))
        assert len(got) == composition_count(m, r) == math.comb(m + r - 1, r - 1)
        assert len(set(got)) == len(got)
        assert all(sum(k) == m and min(k) >= 0 for k in got)

    def test_colex_order(self):
        got = list(compositions(4, 3))
        assert got == sorted(got, key=lambda k: k[::-1])
        assert got[:3] == [(4, 0, 0), (3, 1, 0), (2, 2, 0)]

    def test_array_matches_generator(self):
        np.testing.assert_array_equal(composition_array(5, 3), np.array(list(compositions(5, 3))))

    def test_cap(self):
        with pytest.raises(CapExceededError) as exc:
            comm_log_normalizer(CommParams(30, (0.25,) * 4, 1.0), cap=100)
        assert exc.value.size == math.comb(33, 3)

    def test_membership(self):
        with pytest.raises(DomainError):
            CompositionIndex((1, -1, 2))
        with pytest.raises(DomainError):
            CompositionIndex((1, 1, 1), m=4)


class TestNormalizerAndPmf:
    def test_multinomial_normalizes(self):
        assert comm_log_normalizer(CommParams(2, (0.5, 0.5), 1.0)) == pytest.approx(0.0, abs=1e-15)

    def test_r2_hand_value(self):
        assert math.exp(comm_log_normalizer(CommParams(2, (0.5, 0.5), 2.0))) == pytest.approx(1.5, abs=1e-15)

    def test_enumeration_oracle(self):
        params = CommParams(3, (0.2, 0.3, 0.5), 1.4)
        assert comm_log_normalizer(params) == pytest.approx(LOG_G_3_3, abs=1e-14)
        assert comm_pmf(params, (1, 1, 1)) == pytest.approx(PMF_3_3_AT_111, abs=1e-14)
        assert oracles.comm_pmf_all(3, ["0.2", "0.3", "0.5"], "1.4")[(1, 1, 1)] == pytest.approx(
            PMF_3_3_AT_111, abs=1e-16
        )

    def test_matches_oracle_everywhere(self):
        ref = oracles.comm_pmf_all(4, ["0.1", "0.6", "0.3"], "-0.8")
        K, probs = comm_pmf_table(CommParams(4, (0.1, 0.6, 0.3), -0.8))
        for k, pr in zip(K, probs):
            assert pr == pytest.approx(ref[tuple(k)], abs=1e-14)

    @pytest.mark.parametrize("m", [1, 3, 6, 10])
    @pytest.mark.parametrize("p", [(0.3, 0.7), (0.2, 0.3, 0.5), (0.1, 0.2, 0.3, 0.4)])
    def test_nu_one_is_multinomial(self, m, p):
        K, probs = comm_pmf_table(CommParams(m, p, 1.0))
        np.testing.assert_allclose(probs, multinomial.pmf(K, m, p), atol=1e-12)

    @pytest.mark.parametrize("m", [1, 2, 6, 11])
    @pytest.mark.parametrize("p", [0.05, 0.4, 0.5, 0.93])
    @pytest.mark.parametrize("nu", [-3.0, 0.0, 0.6, 2.4])
    def test_r2_reduces_to_comb(self, m, p, nu):
        comb = pmf_table(CombParams(m, p, nu))
        params = CommParams(m, (p, 1 - p), nu)
        for k in range(m + 1):
            assert comm_pmf(params, (k, m - k)) == pytest.approx(comb[k], abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(
        m=st.integers(1, 8),
        w=st.lists(st.floats(0.05, 1.0), min_size=2, max_size=4),
        nu=st.floats(-4, 4),
    )
    def test_normalization(self, m, w, nu):
        p = tuple(np.array(w) / sum(w))
        p = p[:-1] + (1.0 - math.fsum(p[:-1]),)
        _, probs = comm_pmf_table(CommParams(m, p, nu))
        assert math.fsum(probs) == pytest.approx(1.0, abs=1e-10)

    def test_zero_probability_category(self):
        params = CommParams(3, (0.0, 0.4, 0.6), 1.3)
        assert comm_pmf(params, (1, 1, 1)) == 0.0
        assert comm_pmf(params, (0, 3, 0)) > 0

    def test_not_in_D(self):
        with pytest.raises(DomainError):
            comm_pmf(CommParams(3, (0.2, 0.3, 0.5), 1.0), (1, 1, 2))
        with pytest.raises(DomainError):
            comm_pmf(CommParams(3, (0.2, 0.3, 0.5), 1.0), (1, 2))

    def test_bad_probability_vector(self):
        with pytest.raises(DomainError):
            CommParams(3, (0.2, 0.3, 0.4), 1.0)


class TestSufficientStatsAndUpdate:
    def test_single(self):
        s0, s = comm_sufficient_stats([(2, 1, 0)])
        assert s0 == pytest.approx(math.log(2), abs=1e-15)
        np.testing.assert_array_equal(s, [2, 1])

    def test_degenerate(self):
        s0, s = comm_sufficient_stats([(0, 0, 0, 5)] * 4)
        assert s0 == pytest.approx(4 * math.log(120), abs=1e-12)
        np.testing.assert_array_equal(s, [0, 0, 0])

    def test_two(self):
        s0, s = comm_sufficient_stats([(1, 1, 1), (3, 0, 0)])
        assert s0 == pytest.approx(math.log(6), abs=1e-15)
        np.testing.assert_array_equal(s, [4, 1])

    def test_mixed_shapes(self):
        with pytest.raises(DomainError):
            comm_sufficient_stats([(1, 1, 1), (2, 1)])
        with pytest.raises(DomainError):
            comm_sufficient_stats([(1, 1, 1), (2, 1, 1)])

    def test_update(self):
        h = comm_conjugate_update(CommHyper((0.0, 0.0)), (2, 1, 0))
        assert h.a == (2.0, 1.0)
        assert h.b == pytest.approx(math.log(2), abs=1e-15)
        assert h.c == 1.0

    def test_update_corner(self):
        h0 = CommHyper((1.5, -2.0, 0.25), 3.0, 2.0)
        h = comm_conjugate_update(h0, (0, 0, 0, 5))
        assert h.a == h0.a
        assert h.b == pytest.approx(3.0 + math.log(120), abs=1e-13)
        assert h.c == 3.0

    def test_update_commutes(self):
        h0 = CommHyper((0.3, 0.7), 0.1, 0.5)
        x, y = (2, 0, 3), (1, 4, 0)
        a = comm_conjugate_update(comm_conjugate_update(h0, x), y)
        b = comm_conjugate_update(comm_conjugate_update(h0, y), x)
        assert a.a == b.a and a.c == b.c
        assert a.b == pytest.approx(b.b, abs=1e-14)

    def test_update_matches_stats(self):
        data = [(2, 0, 3), (1, 4, 0), (0, 1, 4)]
        h = CommHyper((0.0, 0.0))
        for k in data:
            h = comm_conjugate_update(h, k)
        s0, s = comm_sufficient_stats(data)
        np.testing.assert_allclose(h.a, s)
        assert h.b == pytest.approx(s0, abs=1e-13)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            comm_conjugate_update(CommHyper((0.0,)), (1, 1, 1))


class TestKernel:
    def test_conjugacy_closure(self):
        m = 4
        data = [(2, 0, 2), (1, 3, 0), (0, 1, 3), (4, 0, 0)]
        prior = CommHyper((0.0, 0.0))
        post = prior
        for k in data:
            post = comm_conjugate_update(post, k)
        rng = np.random.default_rng(5)
        diffs = []
        for _ in range(10):
            psi = rng.normal(size=2)
            nu = rng.uniform(-1, 3)
            p = np.exp(np.append(psi, 0.0))
            p /= p.sum()
            params = CommParams(m, tuple(p[:-1]) + (1.0 - math.fsum(p[:-1]),), nu)
            loglik = sum(math.log(comm_pmf(params, k)) for k in data)
            diffs.append(
                comm_log_posterior_kernel(psi, nu, post, m) - comm_log_posterior_kernel(psi, nu, prior, m) - loglik
            )
        assert np.ptp(diffs) < 1e-9

    def test_jensen_uniform_q(self):
        rng = np.random.default_rng(9)
        m, r = 5, 3
        q = np.full(composition_count(m, r), 1.0 / composition_count(m, r))
        for _ in range(200):
            psi = rng.normal(scale=3, size=r - 1)
            nu = rng.uniform(-5, 5)
            assert comm_log_G(psi, nu, m) >= comm_jensen_lower_bound(psi, nu, m, q) - 1e-12

    def test_jensen_tight_at_own_pmf(self):
        m, psi, nu = 4, np.array([0.4, -1.1]), 0.7
        K = composition_array(m, 3)
        lw = K[:, :-1] @ psi - nu * np.array([sum(math.lgamma(x + 1) for x in k) for k in K])
        q = np.exp(lw - lw.max())
        q /= q.sum()
        assert comm_jensen_lower_bound(psi, nu, m, q) == pytest.approx(comm_log_G(psi, nu, m), abs=1e-10)


class TestCmpConditional:
    def test_poisson_case(self):
        params = comm_from_cmp_conditional((1.0, 1.0, 1.0), 1.0, 3)
        np.testing.assert_allclose(params.p, [1 / 3] * 3, atol=1e-15)
        K, cond = cmp_conditional((1.0, 1.0, 1.0), 1.0, 3)
        np.testing.assert_allclose(cond, multinomial.pmf(K, 3, [1 / 3] * 3), atol=1e-12)

    @pytest.mark.parametrize("lams,nu,m", [((2.0, 1.0), 1.5, 4), ((1.0, 2.0, 3.0), 2.0, 5)])
    def test_brute_force(self, lams, nu, m):
        params = comm_from_cmp_conditional(lams, nu, m)
        K, cond = cmp_conditional(lams, nu, m)
        assert len(K) == math.comb(m + len(lams) - 1, len(lams) - 1)
        for k, c in zip(K, cond):
            assert comm_pmf(params, tuple(k)) == pytest.approx(c, abs=1e-10)

    def test_nonpositive(self):
        with pytest.raises(DomainError):
            comm_from_cmp_conditional((1.0, -2.0), 1.0, 3)


class TestExchangeableSequences:
    def test_point_mass(self):
        assert comm_exchangeable_sequence_prob({(3, 0, 0): 1.0}, (3, 0, 0)) == 1.0

    def test_uniform(self):
        dist = {(2, 0): 1 / 3, (1, 1): 1 / 3, (0, 2): 1 / 3}
        assert comm_exchangeable_sequence_prob(dist, (1, 1)) == pytest.approx(1 / 6, abs=1e-15)

    def test_total_over_arrangements(self):
        params = CommParams(4, (0.2, 0.5, 0.3), 1.7)
        K, probs = comm_pmf_table(params)
        dist = {tuple(int(x) for x in k): float(p) for k, p in zip(K, probs)}
        # every arrangement: a category label for each of the m slots
        total = 0.0
        for labels in itertools.product(range(3), repeat=4):
            k = tuple(labels.count(i) for i in range(3))
            total += comm_exchangeable_sequence_prob(dist, k)
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_count_times_arrangement_prob(self):
        params = CommParams(5, (0.1, 0.6, 0.3), 0.4)
        K, probs = comm_pmf_table(params)
        dist = {tuple(int(x) for x in k): float(p) for k, p in zip(K, probs)}
        for k, pk in dist.items():
            n_arr = math.factorial(5) // math.prod(math.factorial(x) for x in k)
            assert n_arr * comm_exchangeable_sequence_prob(dist, k) == pytest.approx(pk, abs=1e-12)

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            comm_exchangeable_sequence_prob({(2, 0): 0.5}, (2, 0))
        with pytest.raises(DomainError):
            comm_exchangeable_sequence_prob({(2, 0): 1.0}, (1, 1, 1))
