"""Uniform periodic grids and the sampled fields that live on them.

Two kinds of grid are used throughout:

* ``"torus"`` -- the flat torus of side ``L`` (default ``2*pi``) with
  normalized (probability) measure, coordinates in ``[0, L)``.
* ``"box"`` -- a large periodic box standing in for the whole space.
  Coordinates are centred at the origin and Lebesgue measure is used, so
  that dilations ``f(x / a)`` scale like they do on R^d.

Spectral coefficients are normalized so that
``f(x) = sum_k c_k exp(i k.x)`` with ``k`` the physical frequency.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
import math

import numpy as np
from scipy import fft as sfft

from .errors import InvalidParameterError, ResolutionError

TORUS = "torus"
BOX = "box"


def _is_pow2(n):
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    d: int
    N: int
    L: float = 2 * math.pi
    kind: str = TORUS

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise InvalidParameterError(f"dimension must be 1, 2 or 3, got {self.d}")
        if not _is_pow2(int(self.N)):
            raise InvalidParameterError(f"points per axis must be a power of two, got {self.N}")
        if not self.L > 0:
            raise InvalidParameterError(f"box side must be positive, got {self.L}")
        if self.kind not in (TORUS, BOX):
            raise InvalidParameterError(f"unknown grid kind {self.kind!r}")

    @property
    def shape(self):
        return (self.N,) * self.d

    @property
    def dx(self):
        return self.L / self.N

    @property
    def nyquist(self):
        """Largest physical frequency represented along one axis."""
        return math.pi * self.N / self.L

    @property
    def k0(self):
        """Lattice spacing in frequency."""
        return 2 * math.pi / self.L

    def axis(self):
        x = np.arange(self.N) * self.dx
        if self.kind == BOX:
            x = x - self.L / 2
        return x

    def coords(self):
        """Open (broadcastable) coordinate arrays, one per axis."""
        x = self.axis()
        return tuple(
            x.reshape([-1 if a == b else 1 for b in range(self.d)]) for a in range(self.d)
        )

    def wavenumbers(self, deriv=False):
        """Broadcastable physical frequencies per axis.

        With ``deriv=True`` the Nyquist entry is zeroed, the convention used by
        every odd-order spectral operator so that div, grad and the projection
        stay mutually consistent on real fields.
        """
        k = sfft.fftfreq(self.N, d=1.0 / self.N) * self.k0
        if deriv:
            k = k.copy()
            k[self.N // 2] = 0.0
        return tuple(
            k.reshape([-1 if a == b else 1 for b in range(self.d)]) for a in range(self.d)
        )

    def kmag(self):
        return _kmag(self)

    def index_max(self):
        """max_axis |lattice index| for every mode."""
        return _index_max(self)

    @property
    def cell_volume(self):
        return self.dx ** self.d

    @property
    def volume(self):
        return self.L ** self.d

    def required_n(self, freq, samples_per_wave=4.0):
        """Smallest power of two resolving ``freq`` at the given sampling density."""
        n = 2
        while n * 2 * math.pi / self.L < samples_per_wave * freq:
            n *= 2
        return n

    def with_n(self, N):
        return Grid(self.d, N, self.L, self.kind)


@lru_cache(maxsize=4)
def _kmag(grid):
    ks = grid.wavenumbers()
    out = np.zeros(grid.shape)
    for k in ks:
        out = out + k * k
    return np.sqrt(out)


@lru_cache(maxsize=4)
def _index_max(grid):
    idx = np.abs(sfft.fftfreq(grid.N, d=1.0 / grid.N))
    out = np.zeros(grid.shape)
    for a in range(grid.d):
        out = np.maximum(out, idx.reshape([-1 if a == b else 1 for b in range(grid.d)]))
    return out


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A scalar field sampled on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.shape:
            raise InvalidParameterError(f"samples have shape {v.shape}, grid expects {self.grid.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid, fn):
        vals = np.broadcast_to(fn(*grid.coords()), grid.shape)
        return cls(grid, np.array(vals))

    @classmethod
    def from_spectrum(cls, grid, coeffs, real=True):
        vals = sfft.ifftn(coeffs * grid.N ** grid.d)
        if real:
            vals = vals.real
        out = cls(grid, vals)
        if not real:
            out.__dict__["spectrum"] = coeffs
        return out

    @cached_property
    def spectrum(self):
        return sfft.fftn(self.values) / self.grid.N ** self.grid.d

    @property
    def is_real(self):
        return not np.iscomplexobj(self.values)

    def _wrap(self, other):
        return other.values if isinstance(other, GridFunction) else other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._wrap(other))

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._wrap(other))

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._wrap(other))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class VelocityField:
    """A vector of grid functions, one per spatial dimension."""

    components: tuple
    divergence_free: bool = False

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise InvalidParameterError("a velocity field needs at least one component")
        g = comps[0].grid
        if any(c.grid != g for c in comps):
            raise InvalidParameterError("all components must share one grid")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_array(cls, grid, arr, divergence_free=False):
        return cls(tuple(GridFunction(grid, a) for a in arr), divergence_free)

    @classmethod
    def zeros(cls, grid, dim=None):
        dim = grid.d if dim is None else dim
        return cls.from_array(grid, np.zeros((dim,) + grid.shape), True)

    @property
    def grid(self):
        return self.components[0].grid

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def stack(self):
        return np.stack([c.values for c in self.components])

    def spectra(self):
        return np.stack([c.spectrum for c in self.components])

    def __add__(self, other):
        return VelocityField(
            tuple(a + b for a, b in zip(self, other)),
            self.divergence_free and other.divergence_free,
        )

    def __sub__(self, other):
        return VelocityField(
            tuple(a - b for a, b in zip(self, other)),
            self.divergence_free and other.divergence_free,
        )

    def __mul__(self, scalar):
        return VelocityField(tuple(c * scalar for c in self), self.divergence_free)

    __rmul__ = __mul__

    def __neg__(self):
        return VelocityField(tuple(-c for c in self), self.divergence_free)


def check_resolves(grid, freq, samples_per_wave=4.0):
    """Raise :class:`ResolutionError` unless ``grid`` samples ``freq`` densely enough."""
    if grid.N * 2 * math.pi / grid.L < samples_per_wave * freq - 1e-9:
        need = grid.required_n(freq, samples_per_wave)
        raise ResolutionError(
            f"frequency {freq:g} needs N >= {need} points per axis on a box of side "
            f"{grid.L:g} (have N = {grid.N})",
            required_n=need,
        )
