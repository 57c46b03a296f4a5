"""Dyadic partitions of unity and Littlewood-Paley blocks."""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidParameterError, ResolutionError
from .grid import GridFunction


def smooth_step(y, a=1.0):
    """C-infinity step rising from 0 (y <= 0) to 1 (y >= 1).

    Built from ``g(y) = exp(-a / y)`` as ``g(y) / (g(y) + g(1 - y))``.
    """
    y = np.asarray(y, dtype=float)
    num = _g(y, a)
    return num / (num + _g(1.0 - y, a))


def smooth_step_deriv(y, a=1.0):
    y = np.asarray(y, dtype=float)
    g0, g1 = _g(y, a), _g(1.0 - y, a)
    d0, d1 = _dg(y, a), _dg(1.0 - y, a)
    return (d0 * g1 + g0 * d1) / (g0 + g1) ** 2


def _g(y, a):
    out = np.zeros_like(y)
    pos = y > 0
    with np.errstate(over="ignore"):
        # a / y overflows only where exp(-a / y) is 0 anyway
        out[pos] = np.exp(-a / y[pos])
    return out


def _dg(y, a):
    # exp(-a/y) underflows well before a/y**2 overflows once y > a/700
    out = np.zeros_like(y)
    pos = y > a / 700.0
    yp = y[pos]
    out[pos] = a * np.exp(-a / yp) / (yp * yp)
    return out


@dataclass(frozen=True)
class DyadicPartition:
    """Radial dyadic partition ``phi_0, ..., phi_J``.

    ``phi_0`` equals one on the closed unit ball and vanishes for ``|xi| >= 2``;
    ``phi_j(xi) = phi_0(xi / 2**j) - phi_0(xi / 2**(j-1))`` for ``j >= 1``.
    """

    J: int
    profile: float = 1.0

    @property
    def identifier(self):
        return f"exp(-{self.profile:g}/x) plateau transition, J={self.J}"

    def phi0(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        return smooth_step(2.0 - r, self.profile)

    def symbol(self, j, r):
        """Vectorized ``phi_j`` evaluated at radii ``r``."""
        if not 0 <= j <= self.J:
            raise InvalidParameterError(f"block index {j} outside 0..{self.J}")
        if j == 0:
            return self.phi0(r)
        r = np.asarray(r, dtype=float)
        return self.phi0(r / 2.0 ** j) - self.phi0(r / 2.0 ** (j - 1))

    def support(self, j):
        """Closed annulus outside of which ``phi_j`` vanishes."""
        if j == 0:
            return 0.0, 2.0
        return 2.0 ** (j - 1), 2.0 ** (j + 1)


def build_partition(J, profile=1.0):
    if int(J) != J or J < 1:
        raise InvalidParameterError(f"block count J must be a positive integer, got {J}")
    if not profile > 0:
        raise InvalidParameterError(f"profile steepness must be positive, got {profile}")
    return DyadicPartition(int(J), float(profile))


def partition_for(grid, profile=1.0):
    """Smallest partition whose blocks sum to one on every lattice frequency."""
    kmax = math.sqrt(grid.d) * grid.nyquist
    return build_partition(max(1, math.ceil(math.log2(kmax))), profile)


def eval_block_symbol(partition, j, xi):
    """``phi_j(xi)`` for a single frequency vector (or scalar) ``xi``."""
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(xi, dtype=float))))
    return float(partition.symbol(j, r))


def block_is_resolved(grid, j):
    lo, hi = (0.0, 2.0) if j == 0 else (2.0 ** (j - 1), 2.0 ** (j + 1))
    return hi <= grid.nyquist * (1 + 1e-12)


def apply_block(f, partition, j):
    """Frequency restriction ``phi_j(D) f``."""
    if not 0 <= j <= partition.J:
        raise InvalidParameterError(f"block index {j} outside 0..{partition.J}")
    grid = f.grid
    if not block_is_resolved(grid, j):
        need = grid.required_n(2.0 ** (j + 1), samples_per_wave=2.0)
        raise ResolutionError(
            f"block {j} reaches frequency {2 ** (j + 1)}, beyond the Nyquist frequency "
            f"{grid.nyquist:g}; need N >= {need}",
            required_n=need,
        )
    w = partition.symbol(j, grid.kmag())
    return GridFunction.from_spectrum(grid, w * f.spectrum, real=f.is_real)


def spectral_derivative(f, axis):
    grid = f.grid
    if not 0 <= axis < grid.d:
        raise InvalidParameterError(f"axis {axis} outside 0..{grid.d - 1}")
    k = grid.wavenumbers(deriv=True)[axis]
    return GridFunction.from_spectrum(grid, 1j * k * f.spectrum, real=f.is_real)
