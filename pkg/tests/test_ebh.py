import math
import warnings

import mpmath
import numpy as np
import pytest

from ethresh.ebh import (
    BoostResult,
    BoostSaturationWarning,
    DiscoverySet,
    boost_generic_ad,
    boost_generic_pr,
    boost_lcs_ad,
    boost_lcs_pr,
    ebh_batch_counts,
    ebh_reject,
    exp1_survival,
    fdp,
    full_t_expectation,
    relaxed_expectation,
    t_transform,
)
from ethresh.numerics import RngStream

BOOST_ALPHAS = (0.01, 0.02, 0.05, 0.1)


def point_mass_one(x):
    return (np.asarray(x, dtype=float) <= 1.0).astype(float)


class TestTTransform:
    @pytest.mark.parametrize("x, K, want", [(0.5, 1000, 0.0), (math.inf, 1000, 1000.0), (3, 10, 2.5), (1, 7, 1.0)])
    def test_examples(self, x, K, want):
        assert t_transform(x, K) == want

    def test_below_identity(self):
        x = np.r_[1.0, np.geomspace(1.0, 1e5, 5000), RngStream(3).generator().uniform(1, 50, 5000)]
        for K in (1, 2, 7, 10, 1000):
            t = t_transform(x, K)
            assert np.all(t <= x)
            assert np.all(t <= K)
            # values lie on the grid K/k
            k = K / t
            assert np.allclose(k, np.round(k))

    def test_matches_definition(self):
        for x in (1.0, 1.5, 2.0, 3.7, 999.0, 1000.0, 1e7):
            assert t_transform(x, 1000) == 1000 / math.ceil(1000 / x)

    def test_domain(self):
        with pytest.raises(ValueError):
            t_transform(-1.0, 5)
        with pytest.raises(ValueError):
            t_transform(2.0, 0)


def brute_force_k(e, alpha):
    K = len(e)
    s = sorted(e, reverse=True)
    return max([k for k in range(1, K + 1) if s[k - 1] >= K / (alpha * k)], default=0)


class TestEBH:
    def test_all_zero(self):
        d = ebh_reject([0.0] * 5, 0.1)
        assert d.k == 0 and d.rejected.size == 0

    def test_hand_example(self):
        d = ebh_reject([8, 8, 0, 0], 0.5)
        assert d.k == 2
        assert list(d.rejected) == [0, 1]

    def test_all_at_boundary(self):
        K, a = 6, 0.2
        d = ebh_reject([K / a] * K, a)
        assert d.k == K

    def test_boundary_ties_rejected(self):
        # e_(2) = K/(2 alpha) exactly, both tied values rejected
        d = ebh_reject([10.0, 10.0, 1.0, 0.0], 0.2)
        assert d.k == 2 and list(d.rejected) == [0, 1]

    def test_self_consistency_random(self):
        g = RngStream(17).generator()
        for _ in range(1000):
            K = int(g.integers(1, 40))
            alpha = float(g.choice([0.05, 0.1, 0.2, 0.5]))
            e = g.exponential(1.0, K) * g.choice([1.0, 10.0, 100.0]) * (g.random(K) < 0.8)
            d = ebh_reject(e, alpha)
            assert d.k == brute_force_k(list(e), alpha)
            assert d.rejected.size == d.k
            if d.k:
                assert np.sort(e)[::-1][d.k - 1] >= K / (alpha * d.k)
                assert e[d.rejected].min() >= np.delete(e, d.rejected).max(initial=0.0)

    def test_batch_counts_agree(self):
        g = RngStream(4).generator()
        e = g.exponential(1.0, (300, 25)) * g.choice([1.0, 30.0, 300.0], (300, 25))
        for alpha in (0.05, 0.2):
            n_rej, n_false = ebh_batch_counts(e, alpha, nulls=10)
            for r in range(e.shape[0]):
                d = ebh_reject(e[r], alpha)
                assert n_rej[r] == d.k
                assert n_false[r] == np.sum(d.rejected < 10)

    @pytest.mark.parametrize("e, alpha", [([], 0.1), ([1.0, -1.0], 0.1), ([1.0], 0.0), ([1.0], 1.0)])
    def test_domain(self, e, alpha):
        with pytest.raises(ValueError):
            ebh_reject(e, alpha)


class TestFDP:
    def test_examples(self):
        empty = DiscoverySet(np.array([], dtype=int), 0, 0.1, 10)
        assert fdp(empty, range(5)) == 0.0
        allnull = DiscoverySet(np.array([0, 1]), 2, 0.1, 10)
        assert fdp(allnull, range(5)) == 1.0
        some = DiscoverySet(np.array([1, 3, 6, 7, 8]), 5, 0.1, 10)
        assert fdp(some, [1, 3]) == pytest.approx(0.4)


def _lcs_lhs(b, alpha):
    return math.exp(-1 / (alpha * b)) * (1 + alpha * b)


class TestLCSBounds:
    @pytest.mark.parametrize("alpha, lo, hi", [(0.05, 4.75, 6.13), (0.01, 17.35, 20.86)])
    def test_ad_examples(self, alpha, lo, hi):
        r = boost_lcs_ad(alpha)
        assert (r.lower, r.upper) == (pytest.approx(lo, abs=0.005), pytest.approx(hi, abs=0.005))
        assert r.regime == "AD"

    def test_ad_residuals(self):
        for a in np.geomspace(1e-4, 0.5, 30):
            r = boost_lcs_ad(a)
            for b, target in ((r.lower, a / math.e), (r.upper, a)):
                if b > 1.0:
                    assert abs(_lcs_lhs(b, a) - target) < 1e-10
                else:
                    assert _lcs_lhs(1.0, a) >= target
            assert r.lower <= r.upper

    def test_ad_against_mpmath(self):
        mpmath.mp.dps = 30
        for a in (0.01, 0.1):
            f = lambda b: mpmath.exp(-1 / (a * b)) * (1 + a * b) - a  # noqa: E731
            ref = mpmath.findroot(f, boost_lcs_ad(a).upper * 1.01)
            assert boost_lcs_ad(a).upper == pytest.approx(float(ref), rel=1e-9)

    def test_ad_tight_as_alpha_vanishes(self):
        r = boost_lcs_ad(1e-6)
        assert r.upper / r.lower < 1.1

    @pytest.mark.parametrize("alpha, lo, hi", [(0.10, 3.03, 4.34), (0.05, 5.01, 6.68)])
    def test_pr_examples(self, alpha, lo, hi):
        r = boost_lcs_pr(alpha)
        assert (r.lower, r.upper) == (pytest.approx(lo, abs=0.005), pytest.approx(hi, abs=0.005))
        assert r.regime == "PRDS"

    def test_pr_branch_continuity(self):
        a = math.exp(-1)
        assert boost_lcs_pr(a).upper == math.e
        assert -1 / (a * math.log(a)) == pytest.approx(math.e, rel=1e-15)
        below = boost_lcs_pr(a * (1 - 1e-9)).upper
        assert below == pytest.approx(math.e, rel=1e-8)

    def test_monotone_in_alpha(self):
        grid = np.geomspace(1e-4, 0.9, 50)
        for f in (boost_lcs_ad, boost_lcs_pr):
            lo = [f(a).lower for a in grid]
            hi = [f(a).upper for a in grid]
            assert np.all(np.diff(lo) <= 1e-9) and np.all(np.diff(hi) <= 1e-9)
            assert all(1.0 <= x <= y for x, y in zip(lo, hi))

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5])
    def test_domain(self, alpha):
        with pytest.raises(ValueError):
            boost_lcs_ad(alpha)
        with pytest.raises(ValueError):
            boost_lcs_pr(alpha)

    def test_result_invariant(self):
        with pytest.raises(ValueError):
            BoostResult(3.0, 2.0, "AD", "relaxed")
        with pytest.raises(ValueError):
            BoostResult(1.0, 2.0, "XX", "relaxed")


class TestGenericAD:
    @pytest.mark.parametrize("alpha", BOOST_ALPHAS)
    def test_relaxed_exp1_matches_closed_form(self, alpha):
        b = boost_generic_ad(exp1_survival, alpha, criterion="relaxed")
        assert b == pytest.approx(boost_lcs_ad(alpha).upper, abs=1e-6)

    def test_relaxed_expectation_closed_form(self):
        for a, c in ((0.05, 3.0), (0.01, 20.0), (0.1, 1.0)):
            ac = a * c
            assert relaxed_expectation(exp1_survival, c, a) == pytest.approx(math.exp(-1 / ac) * (1 + ac), rel=1e-9)

    def test_full_t_sum_against_mpmath(self):
        # direct sum over the T grid with mpmath
        mpmath.mp.dps = 30
        K, a, c = 20, 0.1, 4.0
        ref = mpmath.mpf(0)
        for k in range(1, K + 1):
            lo = mpmath.mpf(K) / (k * a * c)
            hi = mpmath.inf if k == 1 else mpmath.mpf(K) / ((k - 1) * a * c)
            ref += mpmath.mpf(K) / k * (mpmath.exp(-lo) - (0 if hi == mpmath.inf else mpmath.exp(-hi)))
        assert full_t_expectation(exp1_survival, c, a, K) == pytest.approx(float(ref), rel=1e-12)

    @pytest.mark.parametrize("alpha", BOOST_ALPHAS)
    def test_full_t_at_least_relaxed(self, alpha):
        full = boost_generic_ad(exp1_survival, alpha, K=1000, criterion="full-T")
        relaxed = boost_generic_ad(exp1_survival, alpha, criterion="relaxed")
        assert full >= relaxed - 1e-9

    def test_criterion_is_tight(self):
        a = 0.05
        b = boost_generic_ad(exp1_survival, a, K=1000)
        assert full_t_expectation(exp1_survival, b, a, 1000) <= a
        assert full_t_expectation(exp1_survival, b * (1 + 1e-6), a, 1000) > a

    def test_point_mass_null(self):
        for a in (0.05, 0.1, 0.2):
            b = boost_generic_ad(point_mass_one, a, K=50)
            assert b >= 1 / (2 * a)
            assert b <= 1 / a

    def test_monotone_in_alpha(self):
        vals = [boost_generic_ad(exp1_survival, a, K=200) for a in np.geomspace(0.005, 0.3, 15)]
        assert np.all(np.diff(vals) <= 1e-9)

    def test_unsatisfiable_returns_one(self):
        # a heavy null that already violates the criterion without boosting
        S = lambda x: np.minimum(1.0, 2.0 / np.maximum(np.asarray(x, float), 1e-300) ** 1.01)  # noqa: E731
        assert boost_generic_ad(S, 0.1, K=10) == 1.0

    def test_saturation_warns(self):
        zero = lambda x: (np.asarray(x, float) <= 0).astype(float)  # noqa: E731
        with pytest.warns(BoostSaturationWarning):
            b = boost_generic_ad(zero, 0.05, K=10)
        assert b == 1e6

    def test_bad_criterion(self):
        with pytest.raises(ValueError):
            boost_generic_ad(exp1_survival, 0.05, criterion="nope")


class TestGenericPR:
    def test_relaxed_matches_closed_form(self):
        for a in (0.01, 0.05, 0.1, 0.3):
            b = boost_generic_pr(exp1_survival, a, criterion="relaxed")
            assert b == pytest.approx(boost_lcs_pr(a).upper, rel=1e-6)

    def test_large_k_approaches_bound(self):
        b = boost_generic_pr(exp1_survival, 0.05, K=10**5)
        assert b == pytest.approx(-1 / (0.05 * math.log(0.05)), abs=0.01)

    def test_grid_at_least_relaxed(self):
        for a in BOOST_ALPHAS:
            assert boost_generic_pr(exp1_survival, a, K=10) >= boost_generic_pr(exp1_survival, a, criterion="relaxed")

    def test_unboosted_is_valid(self):
        from ethresh.ebh import pr_grid_max

        for S in (exp1_survival, point_mass_one):
            for a in BOOST_ALPHAS:
                assert pr_grid_max(S, 1.0, a, 100) <= a + 1e-15

    def test_monotone_in_alpha(self):
        vals = [boost_generic_pr(exp1_survival, a, K=100) for a in np.geomspace(0.005, 0.3, 15)]
        assert np.all(np.diff(vals) <= 1e-9)

    def test_scalar_only_survival(self):
        # a survival function that only accepts scalars still works
        b = boost_generic_pr(lambda x: math.exp(-x), 0.05, K=50)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert b == boost_generic_pr(exp1_survival, 0.05, K=50)
