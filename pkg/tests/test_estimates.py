"""Rate fits, two-sided checks, inequality margins and decay rates."""
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from besovlab.errors import InvalidParameterError, PreconditionViolation
from besovlab.estimates import (
    InequalityMargin,
    apply_constant,
    check_two_sided,
    cos_lp_norm,
    d1_dominant_exponent,
    d1_exponents,
    d2_dominant_exponent,
    fit_constant,
    fit_loglog_slope,
    rate_d1,
    rate_d2,
    single_mode_besov,
    verify_algebra,
    verify_interpolation,
    verify_moser,
)
from besovlab.grid import Grid, GridFunction
from besovlab.lp_core import partition_for
from besovlab.norms import INF, BesovParams, besov_norm_lp

G = Grid(2, 64)


def _mode(k, c=0.0):
    x1 = G.coords()[0]
    return GridFunction(G, np.broadcast_to(c + np.cos(k * x1), G.shape).copy())


def _random(seed, modes=6):
    rng = np.random.default_rng(seed)
    c = (rng.standard_normal(G.shape) + 1j * rng.standard_normal(G.shape)) * (G.index_max() <= modes)
    return GridFunction(G, np.fft.ifftn(c).real * G.N ** 2 + rng.normal())


class TestFitLogLogSlope:
    def test_square(self):
        x = [1.0, 2.0, 4.0, 8.0, 16.0]
        fit = fit_loglog_slope(x, [v * v for v in x])
        assert abs(fit.slope - 2) < 1e-12 and fit.max_rel_residual < 1e-12

    def test_intercept(self):
        x = [2.0, 3.0, 5.0, 7.0]
        fit = fit_loglog_slope(x, [5 / v for v in x])
        assert fit.slope == pytest.approx(-1.0, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(5), abs=1e-12)
        assert fit.predict(4.0) == pytest.approx(1.25)

    @given(st.floats(-4, 4), st.floats(0.1, 10))
    def test_pure_power_law_exact(self, a, c):
        x = np.array([3.0, 5.0, 9.0, 17.0, 33.0])
        fit = fit_loglog_slope(x, c * x ** a)
        assert abs(fit.slope - a) < 1e-10 and fit.max_rel_residual < 1e-12

    def test_nonpositive(self):
        with pytest.raises(InvalidParameterError):
            fit_loglog_slope([1, 2, 3, 4], [1, 0, 1, 1])

    def test_min_points(self):
        with pytest.raises(InvalidParameterError):
            fit_loglog_slope([1, 2, 3], [1, 2, 3])
        assert fit_loglog_slope([1, 2, 3], [1, 2, 3], min_points=3).slope == pytest.approx(1.0)

    def test_increasing(self):
        with pytest.raises(InvalidParameterError):
            fit_loglog_slope([1, 3, 2, 4], [1, 1, 1, 1])

    def test_tlemp_slope(self):
        ns = [16, 32, 64, 128, 256, 512]
        vals = []
        for n in ns:
            g = Grid(1, 4 * n)
            vals.append(besov_norm_lp(GridFunction(g, np.cos(n * g.coords()[0])), BesovParams(2.0, 2.0, 3.0)))
        assert fit_loglog_slope(ns, vals).slope == pytest.approx(2.0, abs=0.05)


class TestTwoSided:
    @given(st.floats(1.0, 100.0))
    def test_equal_values(self, C):
        assert check_two_sided([3.0, 3.0, 3.0], C).passed

    def test_pair(self):
        r = check_two_sided([0.5, 2.0], 2.0)
        assert r.passed and r.ratio == 4.0

    def test_fail(self):
        assert not check_two_sided([0.1, 2.0], 2.0).passed

    def test_nonpositive(self):
        with pytest.raises(InvalidParameterError):
            check_two_sided([1.0, -1.0], 2.0)


class TestMargins:
    def test_margin_and_constant(self):
        m = InequalityMargin(2.0, 1.0)
        assert m.ratio == 2.0 and not m.passed
        assert m.with_constant(2.0).passed

    def test_zero_left(self):
        assert InequalityMargin(0.0, 0.0).passed

    def test_fit_constant(self):
        ms = [InequalityMargin(1.0, 2.0), InequalityMargin(3.0, 1.0)]
        C = fit_constant(ms)
        assert C == 3.0 and all(m.passed for m in apply_constant(ms, C))

    def test_fit_constant_at_least_one(self):
        assert fit_constant([InequalityMargin(1.0, 4.0)]) == 1.0

    def test_negative_rejected(self):
        with pytest.raises(InvalidParameterError):
            InequalityMargin(-1.0, 1.0)


class TestMoser:
    def test_exponent_mismatch(self):
        f = _mode(3)
        with pytest.raises(InvalidParameterError):
            verify_moser(f, f, 1.0, 2.0, 2.0, 2.0, 2.0, INF, 2.0)

    def test_g_one(self):
        f = _random(1)
        one = GridFunction(G, np.ones(G.shape))
        assert verify_moser(f, one, 1.5, 2.0, 2.0, INF, 2.0, INF, 2.0).passed

    def test_single_mode_oracle(self):
        part = partition_for(G)
        f = _mode(4)
        m = verify_moser(f, f, 2.0, 2.0, 2.0, INF, 2.0, INF, 2.0)
        left = single_mode_besov(part, 8.0, 2.0, 2.0, 2.0, 0.5, 0.5)
        right = 2 * single_mode_besov(part, 4.0, 2.0, 2.0, 2.0)
        assert m.left == pytest.approx(left, rel=1e-10)
        assert m.raw_right == pytest.approx(right, rel=1e-10)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
    def test_corpus_constant_bounded(self, a, b):
        m = verify_moser(_random(a), _random(b), 1.5, 2.0, 2.0, INF, 2.0, INF, 2.0)
        assert m.ratio <= 100


class TestAlgebra:
    def test_precondition(self):
        with pytest.raises(PreconditionViolation):
            verify_algebra(_mode(2), _mode(3), 1.0, 2.0, 2.0)

    def test_zero(self):
        z = GridFunction(G, np.zeros(G.shape))
        m = verify_algebra(z, _mode(3), 1.5, 2.0, 2.0)
        assert m.left == 0 and m.passed

    def test_single_mode_oracle(self):
        part = partition_for(G)
        m = verify_algebra(_mode(5), _mode(5), 1.5, 2.0, 2.0)
        assert m.left == pytest.approx(single_mode_besov(part, 10.0, 1.5, 2.0, 2.0, 0.5, 0.5), rel=1e-10)
        assert m.raw_right == pytest.approx(single_mode_besov(part, 5.0, 1.5, 2.0, 2.0) ** 2, rel=1e-10)


class TestInterpolation:
    def test_theta_range(self):
        with pytest.raises(InvalidParameterError):
            verify_interpolation(_mode(3), 1.0, 2.0, 1.5, 2.0, 2.0)

    def test_theta_one_equality(self):
        m = verify_interpolation(_random(2), 1.0, 3.0, 1.0, 2.0, 2.0)
        assert m.left == pytest.approx(m.raw_right, rel=1e-14)

    @given(st.floats(0.0, 1.0), st.integers(2, 20))
    def test_single_mode_within_constant(self, theta, k):
        m = verify_interpolation(_mode(k), 1.0, 3.0, theta, 2.0, 2.0)
        assert 1 / 4 <= m.left / m.raw_right <= 4


class TestOracles:
    @pytest.mark.parametrize("p,want", [(1.0, 2 / math.pi), (2.0, 1 / math.sqrt(2)), (4.0, (3 / 8) ** 0.25),
                                        (INF, 1.0)])
    def test_cos_lp_norm(self, p, want):
        assert cos_lp_norm(p) == pytest.approx(want, rel=1e-14)

    def test_constant_and_mode_same_block(self):
        with pytest.raises(InvalidParameterError):
            single_mode_besov(partition_for(G), 1.0, 1.0, 2.0, 2.0, constant=1.0)


class TestRates:
    def test_d1_dominant_small_delta(self):
        s, sigma, delta = 2.5, 1.25, 0.05
        assert d1_dominant_exponent(s, sigma, delta) == pytest.approx(-(s + 1 - 2 * delta - sigma))

    def test_d1_limit(self):
        s = 2.5
        assert max(d1_exponents(s, 1.0 + 1e-12, 1e-12)) == pytest.approx(-s, abs=1e-9)

    def test_d1_needs_sigma_above_one(self):
        with pytest.raises(InvalidParameterError):
            rate_d1(8, 2.5, 1.0, 0.25)

    @settings(max_examples=50)
    @given(st.floats(2.05, 4.0), st.floats(0.01, 0.49), st.floats(0.01, 0.99), st.floats(0.1, 3.0))
    def test_d2_decreasing(self, s, delta, a, dk):
        sigma = 1 + a * (min(2.0, s - 1) - 1)
        assume(1 < sigma < min(2.0, s - 1))
        k = s + dk
        lams = np.geomspace(2 ** 10, 2 ** 40, 7)
        vals = [rate_d2(lam, s, sigma, delta, k) for lam in lams]
        assert np.all(np.diff(vals) < 0)
        assert d2_dominant_exponent(s, sigma, delta, k) < 0

    @pytest.mark.parametrize("args", [(2.0, 1.25, 0.25, 3), (2.5, 1.25, 0.5, 3), (2.5, 1.6, 0.25, 3),
                                      (2.5, 1.25, 0.25, 2.5)])
    def test_d2_constraints(self, args):
        s, sigma, delta, k = args
        with pytest.raises(InvalidParameterError):
            rate_d2(8, s, sigma, delta, k)

    def test_d2_value(self):
        lam, s, sigma, delta, k = 16.0, 2.5, 1.25, 0.25, 3
        base = lam ** -0.5 + lam ** -0.75 + lam ** -3.0
        assert rate_d2(lam, s, sigma, delta, k) == pytest.approx(base ** (0.5 / 1.75), rel=1e-14)
