import math

import mpmath
import numpy as np
import pytest

from ethresh.numerics import RngStream
from ethresh.thresholds import (
    CONSERVATIVE,
    EClass,
    calibrate,
    is_subclass,
    lcs_root,
    precise_p,
    superclasses,
    threshold,
    threshold_by_inversion,
    worst_case_error,
)
from ethresh.numerics import normal_cdf

GAMMAS = np.r_[np.geomspace(1e-4, 0.9, 60), 0.95, 0.99, 0.999, 1.0]
ALPHAS = np.r_[0.001, 0.005, np.arange(0.01, 1.0, 0.01)]


class TestWorstCase:
    @pytest.mark.parametrize(
        "cls, gamma, want",
        [
            ("D", 0.1, 0.05),
            ("D", 1.0, 1.0),
            ("U", 0.8, 0.6),
            ("LCF", 0.3, 0.3),
            ("LS", 0.4, 0.4),
            ("LS", 0.7, 0.5),
            ("LS", 1.0, 1.0),
        ],
    )
    def test_examples(self, cls, gamma, want):
        r = worst_case_error(cls, gamma)
        assert r.value == pytest.approx(want, abs=1e-12)
        assert r.exact

    def test_ln_value(self):
        assert worst_case_error("LN", 0.05).value == pytest.approx(0.00719, abs=5e-6)

    def test_ldgt0_value(self):
        assert worst_case_error("LDGT0", 0.12937).value == pytest.approx(0.0500, abs=5e-5)

    def test_lcs_against_mpmath(self):
        mpmath.mp.dps = 40
        for g in (0.05, 0.2, 0.5, 0.9):
            s = mpmath.findroot(lambda s: mpmath.exp(s / g) - s - 1, -0.9)
            assert worst_case_error("LCS", g).value == pytest.approx(float(mpmath.exp(s / g)), rel=1e-10)
            assert lcs_root(g) == pytest.approx(float(s), abs=1e-10)

    def test_lcs_small_gamma_is_stable(self):
        # for tiny gamma, s is within rounding of -1 but exp(s/gamma) ~ exp(-1/gamma)
        for g in (0.01, 0.02):
            v = worst_case_error("LCS", g).value
            assert v == pytest.approx(math.exp(-1 / g), rel=1e-9, abs=0)

    def test_conservative_kind(self):
        for c in EClass:
            assert worst_case_error(c, 0.3).exact == (c not in CONSERVATIVE)

    @pytest.mark.parametrize("gamma", [0.0, -0.1, 1.01, math.nan])
    def test_domain(self, gamma):
        with pytest.raises(ValueError):
            worst_case_error("D", gamma)

    def test_markov_dominance(self):
        for c in EClass:
            for g in GAMMAS:
                assert worst_case_error(c, g).value <= g + 1e-15

    def test_monotone_in_gamma(self):
        for c in EClass:
            vals = [worst_case_error(c, g).value for g in GAMMAS[:-1]]
            assert np.all(np.diff(vals) >= -1e-15), c

    def test_nesting(self):
        for a in EClass:
            for b in superclasses(a):
                for g in GAMMAS:
                    assert worst_case_error(a, g).value <= worst_case_error(b, g).value + 1e-14, (a, b, g)


class TestThreshold:
    @pytest.mark.parametrize(
        "cls, alpha, want, kind",
        [
            ("D", 0.05, 10.0, "exact"),
            ("DGT1", 0.1, 5.05, "exact"),
            ("LCS", 0.02, 4.00, "exact"),
            ("LDGT0", 0.001, 368.25, "exact"),
            ("LUS", 0.2, 2.25, "conservative"),
            ("LS", 0.6, 1.0, "exact"),
        ],
    )
    def test_examples(self, cls, alpha, want, kind):
        r = threshold(cls, alpha)
        assert r.value == pytest.approx(want, abs=0.01)
        assert r.kind == kind

    def test_ln_small_alpha(self):
        assert threshold("LN", 0.001).value == pytest.approx(118, abs=0.5)

    def test_ln_sign(self):
        # exp(+q^2/2) exceeds 1; the minus-sign variant would not
        assert threshold("LN", 0.05).value == pytest.approx(3.87, abs=0.01)

    def test_at_least_one(self):
        for c in EClass:
            for a in ALPHAS:
                assert threshold(c, a).value >= 1.0

    def test_nonincreasing_in_alpha(self):
        for c in EClass:
            vals = [threshold(c, a).value for a in ALPHAS]
            assert np.all(np.diff(vals) <= 1e-12), c

    def test_nesting(self):
        for a in EClass:
            for b in superclasses(a):
                for al in ALPHAS:
                    assert threshold(a, al).value <= threshold(b, al).value + 1e-12, (a, b, al)

    def test_round_trip(self):
        for c in EClass:
            if c in CONSERVATIVE:
                continue
            for a in ALPHAS:
                t = threshold(c, a).value
                if t == 1.0:
                    continue  # R jumps to 1 at gamma = 1
                assert worst_case_error(c, 1.0 / t).value <= a + 1e-9, (c, a)

    def test_d_equals_u_below_one_third(self):
        for a in ALPHAS[ALPHAS <= 1 / 3]:
            assert threshold("D", a).value == threshold("U", a).value == 1 / (2 * a)

    @pytest.mark.parametrize("cls", ["D", "DGT1", "U", "LS", "LCS", "LDGT0", "LN", "LUS"])
    def test_inversion(self, cls):
        for a in np.geomspace(1e-4, 0.3, 50):
            assert threshold(cls, a).value == pytest.approx(threshold_by_inversion(cls, a), abs=1e-8, rel=1e-8)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
    def test_domain(self, alpha):
        with pytest.raises(ValueError):
            threshold("D", alpha)


class TestClasses:
    def test_parse(self):
        assert EClass.parse("ld>0") is EClass.LDGT0
        assert EClass.parse("D_GT1") is EClass.DGT1
        assert EClass.parse("E") is EClass.E0
        with pytest.raises(ValueError):
            EClass.parse("nope")

    def test_partial_order(self):
        assert is_subclass(EClass.LN, EClass.LS)
        assert is_subclass(EClass.LCD, EClass.E0)
        assert is_subclass(EClass.D, EClass.D)
        assert not is_subclass(EClass.U, EClass.D)
        assert all(EClass.E0 in superclasses(c) for c in EClass)


class TestCalibrate:
    def test_examples(self):
        assert calibrate("D", 4) == pytest.approx(1 / 8)
        assert calibrate("D", 0.5) == 1.0
        assert calibrate("E0", 2) == 0.5
        assert calibrate("E0", 0) == 1.0
        assert calibrate("LN", math.inf) == 0.0

    def test_negative(self):
        with pytest.raises(ValueError):
            calibrate("E0", -1)

    @pytest.mark.parametrize(
        "cls, draw",
        [
            ("D", lambda g, n: g.uniform(0, 2, n)),
            ("D", lambda g, n: g.exponential(1.0, n)),
            # extremal member of D at gamma = 0.1: atom 0.9 at zero, else uniform on [0, 20]
            ("D", lambda g, n: np.where(g.random(n) < 0.1, g.uniform(0, 20, n), 0.0)),
            ("LCS", lambda g, n: g.exponential(1.0, n)),
            ("LN", lambda g, n: g.lognormal(-0.5, 1.0, n)),
            ("LN", lambda g, n: g.lognormal(-2.0, 2.0, n)),
        ],
    )
    def test_p_validity(self, cls, draw):
        n = 10**5
        e = draw(RngStream(5).generator(), n)
        p = np.array([calibrate(cls, x) for x in e])
        for a in (0.01, 0.05, 0.1, 0.2, 0.5):
            se = math.sqrt(a * (1 - a) / n)
            assert np.mean(p <= a) <= a + 3 * se, a


class TestPreciseP:
    def test_examples(self):
        assert precise_p(lambda x: x, 0.3) == 0.3
        assert precise_p(lambda x: 1 - math.exp(-x), 0.0) == 0.0
        assert precise_p(normal_cdf, 1.6449) == pytest.approx(0.95, abs=1e-5)
