"""Explicit Euler solution families and the high/low-frequency approximate solutions.

Periodic family on the torus (``n`` a positive integer)::

    u^{w,n}(t, x) = (w/n + n^{-s} cos(n x2 - w t),  w/n + n^{-s} cos(n x1 - w t))

Whole-space construction, modelled on a centred periodic box::

    u^h = curl[ lam^{-delta-s-1} phi(x1/lam^delta) phi(x2/lam^delta) sin(lam x2 - w t) ]
    u^l(0) = curl[ -w lam^{delta-1} psi1(x1/lam^delta) psi2(x2/lam^delta) ]

with ``curl F = (d2 F, -d1 F)``.  All fields are differentiated by hand
(product and chain rule), never numerically.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainTruncationError, InvalidParameterError, ResolutionError
from .grid import BOX, TORUS, Grid, VelocityField, check_resolves
from .lp_core import smooth_step, smooth_step_deriv
from .norms import TAIL_TOL, BesovParams, besov_norm_lp, tail_fraction


@dataclass(frozen=True)
class FamilyParams:
    omega: int
    freq: float
    s: float
    delta: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        if self.omega not in (1, -1):
            raise InvalidParameterError(f"omega must be +1 or -1, got {self.omega}")
        if not self.freq >= 2:
            raise InvalidParameterError(f"frequency must be at least 2, got {self.freq}")
        if self.delta is not None and not 0 < self.delta < 1:
            raise InvalidParameterError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def scale(self):
        """Spatial dilation ``lam^delta`` of the whole-space bumps."""
        return self.freq ** self.delta

    def flipped(self):
        return FamilyParams(-self.omega, self.freq, self.s, self.delta, self.sigma)


# ---------------------------------------------------------------------------
# bump profiles

def plateau(x, inner, outer, profile=1.0):
    """Equal to 1 on ``|x| <= inner``, 0 on ``|x| >= outer``, smooth in between."""
    return smooth_step((outer - np.abs(x)) / (outer - inner), profile)


def plateau_deriv(x, inner, outer, profile=1.0):
    x = np.asarray(x, dtype=float)
    return -np.sign(x) * smooth_step_deriv((outer - np.abs(x)) / (outer - inner), profile) / (outer - inner)


@dataclass(frozen=True)
class BumpSet:
    """``phi`` (plateau on [-1,1], support [-2,2]) and the localizers ``psi1``, ``psi2``.

    ``psi2`` is a plateau on [-2, 2] supported in [-4, 4]; ``psi1(x) = x psi2(x)``
    so that ``psi1' = psi2 = 1`` on the support of ``phi``.
    """

    profile: float = 1.0

    def phi(self, x):
        return plateau(x, 1.0, 2.0, self.profile)

    def dphi(self, x):
        return plateau_deriv(x, 1.0, 2.0, self.profile)

    def psi2(self, x):
        return plateau(x, 2.0, 4.0, self.profile)

    def dpsi2(self, x):
        return plateau_deriv(x, 2.0, 4.0, self.profile)

    def psi1(self, x):
        return np.asarray(x, dtype=float) * self.psi2(x)

    def dpsi1(self, x):
        x = np.asarray(x, dtype=float)
        return self.psi2(x) + x * self.dpsi2(x)

    @property
    def phi_support(self):
        return 2.0

    @property
    def psi_support(self):
        return 4.0


DEFAULT_BUMPS = BumpSet()


# ---------------------------------------------------------------------------
# periodic family

def _torus_check(grid, n, dims):
    if grid.kind != TORUS or grid.d not in dims:
        raise InvalidParameterError(f"periodic family needs a torus grid of dimension {dims}")
    if abs(grid.L - 2 * math.pi) > 1e-12:
        raise InvalidParameterError("periodic family lives on the 2*pi torus")
    if int(n) != n:
        raise InvalidParameterError(f"periodic family needs an integer frequency, got {n}")
    check_resolves(grid, n)


def _periodic_components(prm, t, grid, kind):
    n, s, w = prm.freq, prm.s, prm.omega
    x = grid.coords()
    amp = n ** (-s)
    if kind == "u":
        u1 = w / n + amp * np.cos(n * x[1] - w * t)
        u2 = w / n + amp * np.cos(n * x[0] - w * t)
    else:
        u1 = w * amp * np.sin(n * x[1] - w * t)
        u2 = w * amp * np.sin(n * x[0] - w * t)
    comps = [np.broadcast_to(u1, grid.shape), np.broadcast_to(u2, grid.shape)]
    if grid.d == 3:
        comps.append(np.zeros(grid.shape))
    return VelocityField.from_array(grid, np.array(comps), divergence_free=True)


def exact_family_2d(prm, t, grid):
    _torus_check(grid, prm.freq, (2,))
    return _periodic_components(prm, t, grid, "u")


def exact_family_3d(prm, t, grid):
    _torus_check(grid, prm.freq, (3,))
    return _periodic_components(prm, t, grid, "u")


def exact_family_dt(prm, t, grid):
    """Analytic time derivative of the periodic family (2D or 3D)."""
    _torus_check(grid, prm.freq, (2, 3))
    return _periodic_components(prm, t, grid, "dt")


def family_difference_closed_form(n, s, t, grid):
    """``u^{+1,n}(t) - u^{-1,n}(t)`` via the angle-sum identity."""
    _torus_check(grid, n, (2, 3))
    x = grid.coords()
    a = 2 * n ** (-s) * math.sin(t)
    comps = [np.broadcast_to(2 / n + a * np.sin(n * x[1]), grid.shape),
             np.broadcast_to(2 / n + a * np.sin(n * x[0]), grid.shape)]
    if grid.d == 3:
        comps.append(np.zeros(grid.shape))
    return VelocityField.from_array(grid, np.array(comps), divergence_free=True)


# ---------------------------------------------------------------------------
# whole-space construction on a box

def nonperiodic_grid(lam, delta, N, d=2, box_factor=10.0):
    """Centred box of side ``box_factor * lam**delta``."""
    return Grid(d, N, box_factor * lam ** delta, BOX)


def _box_check(prm, grid, reach):
    if prm.delta is None:
        raise InvalidParameterError("whole-space construction needs delta")
    if grid.kind != BOX or grid.d not in (2, 3):
        raise InvalidParameterError("whole-space construction needs a 2D or 3D box grid")
    if grid.L < 2 * reach * prm.scale:
        raise DomainTruncationError(
            f"box side {grid.L:g} cannot hold the support [-{reach:g}, {reach:g}] * lam^delta "
            f"= {2 * reach * prm.scale:g}"
        )


def _high_freq_parts(prm, grid, bumps):
    """Velocity of ``u^h`` split as ``a sin(theta) + b cos(theta)`` (theta = lam x2 - w t)."""
    # same box requirement as the low-frequency part so the two can be summed
    _box_check(prm, grid, bumps.psi_support)
    check_resolves(grid, prm.freq)
    lam, ell = prm.freq, prm.scale
    x = [xi / ell for xi in grid.coords()]
    p1, p2 = bumps.phi(x[0]), bumps.phi(x[1])
    dp1, dp2 = bumps.dphi(x[0]), bumps.dphi(x[1])
    if grid.d == 2:
        amp = lam ** (-prm.delta - prm.s - 1)
        extra = 1.0
    else:
        amp = lam ** (-1.5 * prm.delta - prm.s - 1)
        extra = bumps.phi(x[2])
    z = np.zeros(grid.shape)
    a = [amp * p1 * dp2 / ell * extra, -amp * dp1 / ell * p2 * extra]
    b = [amp * p1 * p2 * lam * extra, z]
    if grid.d == 3:
        a.append(z)
        b.append(z)
    a = np.array([np.broadcast_to(c, grid.shape) for c in a])
    b = np.array([np.broadcast_to(c, grid.shape) for c in b])
    return a, b


def _theta(prm, grid, t):
    return prm.freq * grid.coords()[1] - prm.omega * t


def high_freq_field(prm, t, grid, bumps=DEFAULT_BUMPS):
    a, b = _high_freq_parts(prm, grid, bumps)
    th = _theta(prm, grid, t)
    return VelocityField.from_array(grid, a * np.sin(th) + b * np.cos(th), divergence_free=True)


def high_freq_dt(prm, t, grid, bumps=DEFAULT_BUMPS):
    """Analytic ``d/dt u^h``."""
    a, b = _high_freq_parts(prm, grid, bumps)
    th = _theta(prm, grid, t)
    w = prm.omega
    return VelocityField.from_array(grid, -w * a * np.cos(th) + w * b * np.sin(th), divergence_free=True)


def low_freq_initial(prm, grid, bumps=DEFAULT_BUMPS):
    _box_check(prm, grid, bumps.psi_support)
    lam, ell, w = prm.freq, prm.scale, prm.omega
    x = [xi / ell for xi in grid.coords()]
    amp = w / lam
    u1 = -amp * bumps.psi1(x[0]) * bumps.dpsi2(x[1])
    u2 = amp * bumps.dpsi1(x[0]) * bumps.psi2(x[1])
    comps = [u1, u2]
    if grid.d == 3:
        p3 = bumps.psi2(x[2])
        comps = [u1 * p3, u2 * p3, np.zeros(grid.shape)]
    comps = np.array([np.broadcast_to(c, grid.shape) for c in comps])
    return VelocityField.from_array(grid, comps, divergence_free=True)


def approximate_solution(prm, t, u_l_trajectory, grid, bumps=DEFAULT_BUMPS):
    """``u^{w,lam}(t) = u^h(t) + u^l(t)`` with ``u^l`` read from a solver trajectory."""
    ul = u_l_trajectory.at(t)
    if ul.grid != grid:
        raise InvalidParameterError("low-frequency trajectory lives on a different grid")
    return high_freq_field(prm, t, grid, bumps) + ul


def euler_residual(u, du_dt, sigma=1.25, q=2.0, partition=None):
    """``||du_dt + P(u . grad u)||`` in ``B^sigma_{2,q}`` on the resolved band.

    The nonlinear term is dealiased, so the difference is truncated to the
    same 2/3 band before it is measured.
    """
    from .euler import dealias, nonlinear_term

    share = tail_fraction(u)
    if share > TAIL_TOL:
        need = 2 * u.grid.N
        raise ResolutionError(
            f"{share:.2e} of the field energy lies outside the resolved band; refine to N >= {need}",
            required_n=need,
        )
    res = dealias(du_dt - nonlinear_term(u))
    return besov_norm_lp(res, BesovParams(sigma, 2.0, q), partition)
