"""Periodic and whole-space solution families and the Euler residual."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from besovlab.errors import DomainTruncationError, InvalidParameterError, ResolutionError
from besovlab.estimates import d1_dominant_exponent, fit_loglog_slope
from besovlab.euler import Trajectory, divergence, nonlinear_term
from besovlab.families import (
    DEFAULT_BUMPS,
    FamilyParams,
    approximate_solution,
    euler_residual,
    exact_family_2d,
    exact_family_3d,
    exact_family_dt,
    family_difference_closed_form,
    high_freq_dt,
    high_freq_field,
    low_freq_initial,
    nonperiodic_grid,
)
from besovlab.grid import Grid, VelocityField
from besovlab.lp_core import partition_for
from besovlab.norms import INF, BesovParams, besov_norm_lp, lp_norm


def _max_div(u):
    return float(np.max(np.abs(divergence(u).values)))


class TestFamilyParams:
    def test_omega_sign(self):
        with pytest.raises(InvalidParameterError):
            FamilyParams(0, 16, 2.0)

    def test_frequency(self):
        with pytest.raises(InvalidParameterError):
            FamilyParams(1, 1, 2.0)

    def test_delta_range(self):
        with pytest.raises(InvalidParameterError):
            FamilyParams(1, 16, 2.0, delta=1.0)

    def test_flipped(self):
        assert FamilyParams(1, 8, 2.5, 0.25).flipped().omega == -1


class TestBumps:
    def test_phi_plateau_support(self):
        b = DEFAULT_BUMPS
        assert np.all(b.phi(np.linspace(-1, 1, 21)) == 1.0)
        assert np.all(b.phi(np.array([-3.0, -2.0, 2.0, 5.0])) == 0.0)

    def test_psi_on_phi_support(self):
        x = np.linspace(-2, 2, 401)
        assert np.allclose(DEFAULT_BUMPS.psi2(x), 1.0, atol=0)
        assert np.allclose(DEFAULT_BUMPS.dpsi1(x), 1.0, atol=1e-15)

    def test_derivatives_match_finite_differences(self):
        x = np.linspace(-4.5, 4.5, 2001)
        h = 1e-6
        for f, df in ((DEFAULT_BUMPS.phi, DEFAULT_BUMPS.dphi), (DEFAULT_BUMPS.psi1, DEFAULT_BUMPS.dpsi1)):
            fd = (f(x + h) - f(x - h)) / (2 * h)
            assert np.max(np.abs(fd - df(x))) < 1e-6


class TestExactFamily:
    @pytest.mark.parametrize("omega", [1, -1])
    def test_formula_at_zero(self, omega):
        n, s = 8, 2.0
        g = Grid(2, 32)
        x1, x2 = g.coords()
        u = exact_family_2d(FamilyParams(omega, n, s), 0.0, g)
        assert np.allclose(u[0].values, omega / n + n ** -s * np.cos(n * x2), atol=1e-15)
        assert np.allclose(u[1].values, omega / n + n ** -s * np.cos(n * x1), atol=1e-15)

    @settings(max_examples=20, deadline=None)
    @given(st.sampled_from([1, -1]), st.integers(2, 16), st.floats(0, 1))
    def test_divergence_free(self, omega, n, t):
        g = Grid(2, 64)
        assert _max_div(exact_family_2d(FamilyParams(omega, n, 2.0), t, g)) < 1e-10

    def test_unresolved(self):
        with pytest.raises(ResolutionError):
            exact_family_2d(FamilyParams(1, 32, 2.0), 0.0, Grid(2, 64))

    def test_3d_zero_component_and_slices(self):
        g3, g2 = Grid(3, 32), Grid(2, 32)
        prm = FamilyParams(-1, 8, 2.5)
        u3 = exact_family_3d(prm, 0.4, g3)
        u2 = exact_family_2d(prm, 0.4, g2)
        assert np.all(u3[2].values == 0)
        for k in (0, 7, 19):
            assert np.allclose(u3[0].values[:, :, k], u2[0].values, atol=1e-15)
            assert np.allclose(u3[1].values[:, :, k], u2[1].values, atol=1e-15)
        assert _max_div(u3) < 1e-10

    def test_wrong_dimension(self):
        with pytest.raises(InvalidParameterError):
            exact_family_3d(FamilyParams(1, 4, 2.0), 0.0, Grid(2, 16))

    @pytest.mark.parametrize("n", [16, 64, 256])
    def test_bounded_in_besov(self, n):
        g = Grid(2, 4 * n)
        for t in (0.0, 0.5, 1.0):
            v = besov_norm_lp(exact_family_2d(FamilyParams(1, n, 2.5), t, g), BesovParams(2.5, 2.0, 2.0))
            assert 0.1 < v < 10


class TestDifferenceClosedForm:
    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 16), st.floats(0, 1), st.floats(1.5, 3.0))
    def test_angle_sum_identity(self, n, t, s):
        g = Grid(2, 64)
        d = exact_family_2d(FamilyParams(1, n, s), t, g) - exact_family_2d(FamilyParams(-1, n, s), t, g)
        assert lp_norm(d - family_difference_closed_form(n, s, t, g), INF) <= 1e-13

    def test_t0_constant(self):
        g = Grid(2, 32)
        d = family_difference_closed_form(8, 2.0, 0.0, g)
        assert np.allclose(d.stack(), 2 / 8, atol=0)

    @pytest.mark.parametrize("t", [0.25, 0.5, 1.0])
    def test_lower_envelope(self, t):
        n = 128
        g = Grid(2, 4 * n)
        d = family_difference_closed_form(n, 2.0, t, g)
        assert besov_norm_lp(d, BesovParams(2.0, 2.0, 2.0)) >= abs(math.sin(t)) - 1 / n


class TestWholeSpace:
    delta, s = 0.25, 2.5

    def _grid(self, lam, N=512):
        return nonperiodic_grid(lam, self.delta, N)

    def test_box_too_small(self):
        prm = FamilyParams(1, 8, self.s, self.delta)
        with pytest.raises(DomainTruncationError):
            high_freq_field(prm, 0.0, nonperiodic_grid(8, self.delta, 256, box_factor=6.0))

    def test_needs_delta(self):
        with pytest.raises(InvalidParameterError):
            low_freq_initial(FamilyParams(1, 8, self.s), self._grid(8))

    @pytest.mark.parametrize("lam", [8, 16])
    def test_divergence_free(self, lam):
        prm = FamilyParams(1, lam, self.s, self.delta)
        g = self._grid(lam)
        # analytic curls; the sampled bumps are not band-limited, so the
        # spectral divergence is only small relative to lam * sup |u|
        for u in (high_freq_field(prm, 0.3, g), low_freq_initial(prm, g)):
            assert _max_div(u) < 1e-6 * lam * lp_norm(u, INF)

    def test_low_frequency_plateau(self):
        lam = 16
        for omega in (1, -1):
            prm = FamilyParams(omega, lam, self.s, self.delta)
            g = self._grid(lam)
            u = low_freq_initial(prm, g)
            x1, x2 = g.coords()
            inside = (np.abs(x1) <= 2 * prm.scale) & (np.abs(x2) <= 2 * prm.scale)
            assert np.allclose(u[0].values[inside], 0.0, atol=1e-15)
            assert np.allclose(u[1].values[inside], omega / lam, rtol=1e-14)

    def test_high_frequency_sup_bound(self):
        for lam in (8, 16, 32):
            u = high_freq_field(FamilyParams(1, lam, self.s, self.delta), 0.0, self._grid(lam))
            assert lp_norm(u, INF) <= 2 * lam ** (-self.s - self.delta)

    def test_high_frequency_besov_slope(self):
        lams, sigma = [8, 16, 32], 1.25
        vals = []
        for lam in lams:
            g = self._grid(lam, 1024)
            u = high_freq_field(FamilyParams(1, lam, self.s, self.delta), 0.5, g)
            vals.append(besov_norm_lp(u, BesovParams(sigma, 2.0, 2.0), partition_for(g)))
        slope = fit_loglog_slope(lams, vals, min_points=3).slope
        # the L^2 mass of the bump adds lam^{delta/2} to the sup-norm prediction -s + sigma
        assert slope == pytest.approx(-self.s + sigma, abs=0.1 + self.delta / 2)

    def test_low_frequency_besov_slope(self):
        lams, sigma = [8, 16, 32], 1.25
        vals = []
        for lam in lams:
            g = self._grid(lam)
            u = low_freq_initial(FamilyParams(1, lam, self.s, self.delta), g)
            vals.append(besov_norm_lp(u, BesovParams(sigma, 2.0, 2.0), partition_for(g)))
        slope = fit_loglog_slope(lams, vals, min_points=3).slope
        assert slope <= -1 + self.delta + 0.1

    def test_approximate_solution_at_zero(self):
        lam = 8
        prm = FamilyParams(1, lam, self.s, self.delta)
        g = self._grid(lam, 256)
        ul0 = low_freq_initial(prm, g)
        traj = Trajectory.steady(ul0, [0.0])
        u = approximate_solution(prm, 0.0, traj, g)
        assert np.array_equal(u.stack(), (high_freq_field(prm, 0.0, g) + ul0).stack())
        with pytest.raises(InvalidParameterError):
            approximate_solution(prm, 0.5, traj, g)

    def test_approximate_difference_high_part(self):
        lam, t = 8, 0.7
        g = self._grid(lam, 256)
        prm = FamilyParams(1, lam, self.s, self.delta)
        diff = high_freq_field(prm, t, g) - high_freq_field(prm.flipped(), t, g)
        # angle sum: the difference is -2 sin t times the quarter-period shifted field
        quarter = high_freq_field(prm, -math.pi / 2, g)
        assert lp_norm(diff - quarter * (-2 * math.sin(t)), INF) < 1e-12 * lp_norm(quarter, INF)


class TestResidual:
    @pytest.mark.parametrize("omega", [1, -1])
    def test_exact_family_residual(self, omega):
        g = Grid(2, 64)
        prm = FamilyParams(omega, 8, 2.0)
        for t in (0.0, 0.6):
            r = euler_residual(exact_family_2d(prm, t, g), exact_family_dt(prm, t, g))
            assert r < 1e-8

    def test_zero(self):
        g = Grid(2, 16)
        z = VelocityField.zeros(g)
        assert euler_residual(z, z) == 0.0

    def test_unresolved_field(self):
        g = Grid(2, 32)
        x1, _ = g.coords()
        u = VelocityField.from_array(g, np.stack([np.zeros(g.shape), np.broadcast_to(np.cos(14 * x1), g.shape)]))
        with pytest.raises(ResolutionError):
            euler_residual(u, u)

    def test_initial_residual_decays(self):
        s, sigma, delta = 2.5, 1.25, 0.25
        lams, vals = [4, 8, 16], []
        for lam in lams:
            prm = FamilyParams(1, lam, s, delta)
            g = nonperiodic_grid(lam, delta, 512)
            ul0 = low_freq_initial(prm, g)
            u = high_freq_field(prm, 0.0, g) + ul0
            du = high_freq_dt(prm, 0.0, g) + nonlinear_term(ul0)
            vals.append(euler_residual(u, du, sigma, 2.0, partition_for(g)))
        assert fit_loglog_slope(lams, vals, min_points=3).slope <= d1_dominant_exponent(s, sigma, delta) + 0.2
