"""Lebesgue, Besov and Hölder-type norms of sampled fields.

Besov norms come in two flavours:

* :func:`besov_norm_lp` -- the Littlewood-Paley definition,
  ``(sum_j 2^{jsq} ||phi_j(D) f||_p^q)^{1/q}``.
* :func:`besov_norm_diff` -- the modulus-of-smoothness characterization
  ``||f||_p + (int_0^1 t^{-sigma q} sup_{|h|<=t} ||Delta_h^m f||_p^q dt/t)^{1/q}``.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import fft as sfft
from scipy.special import comb

from .errors import DomainTruncationError, InvalidParameterError, ResolutionError
from .grid import BOX, TORUS, GridFunction, VelocityField
from .lp_core import partition_for

INF = math.inf
TAIL_TOL = 1e-8


def _check_pq(name, v):
    if not (v >= 1):
        raise InvalidParameterError(f"{name} must lie in [1, inf], got {v}")


@dataclass(frozen=True)
class BesovParams:
    s: float
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        _check_pq("p", self.p)
        _check_pq("q", self.q)


@dataclass(frozen=True)
class DifferenceNormParams:
    sigma: float
    m: int = 0
    p: float = 2.0
    q: float = 2.0
    n_t: int = 64
    n_h: int = 32

    def __post_init__(self):
        if self.m == 0:
            object.__setattr__(self, "m", int(math.floor(self.sigma)) + 1)
        if not 0 < self.sigma < self.m:
            raise InvalidParameterError(
                f"difference norm needs 0 < sigma < m, got sigma={self.sigma}, m={self.m}"
            )
        _check_pq("p", self.p)
        _check_pq("q", self.q)


def _spectra(f):
    if isinstance(f, VelocityField):
        return f.spectra(), all(c.is_real for c in f)
    return f.spectrum[None], f.is_real


def _pointwise_abs(arr):
    """Euclidean magnitude over the leading component axis."""
    if arr.shape[0] == 1:
        return np.abs(arr[0])
    return np.sqrt(np.sum(np.abs(arr) ** 2, axis=0))


def _lp_of_samples(a, grid, p):
    if p == INF:
        return float(a.max())
    if grid.kind == TORUS:
        return float(np.mean(a ** p) ** (1.0 / p))
    return float((np.sum(a ** p) * grid.cell_volume) ** (1.0 / p))


def _l2_measure(grid):
    """Factor turning sum |c_k|^2 into ||f||_2^2."""
    return 1.0 if grid.kind == TORUS else grid.volume


def lp_norm(f, p):
    """L^p norm; normalized measure on tori, Lebesgue measure on boxes."""
    _check_pq("p", p)
    if isinstance(f, VelocityField):
        a = _pointwise_abs(f.stack())
    else:
        a = np.abs(f.values)
    return _lp_of_samples(a, f.grid, p)


def tail_fraction(f):
    """Share of spectral energy outside the 2/3-Nyquist band."""
    c, _ = _spectra(f)
    grid = f.grid
    e = np.sum(np.abs(c) ** 2, axis=0)
    total = e.sum()
    if total == 0:
        return 0.0
    return float(e[grid.index_max() > grid.N / 3].sum() / total)


def block_norms(f, p, partition=None, tail_tol=TAIL_TOL):
    """``||phi_j(D) f||_p`` for every block of ``partition``.

    Raises :class:`ResolutionError` if more than ``tail_tol`` of the spectral
    energy sits outside the 2/3-Nyquist band or beyond the last block.
    """
    _check_pq("p", p)
    grid = f.grid
    c, real = _spectra(f)
    energy = np.sum(np.abs(c) ** 2, axis=0)
    total = energy.sum()
    if partition is None:
        partition = partition_for(grid)
    out = np.zeros(partition.J + 1)
    if total == 0:
        return out
    kmag = grid.kmag()
    tail = energy[grid.index_max() > grid.N / 3].sum() + energy[kmag > 2.0 ** partition.J].sum()
    if tail > tail_tol * total:
        need = 2 * grid.N
        raise ResolutionError(
            f"{tail / total:.2e} of the spectral energy is unresolved "
            f"(tolerance {tail_tol:g}); refine to N >= {need}",
            required_n=need,
        )
    for j in range(partition.J + 1):
        lo, hi = partition.support(j)
        mask = (kmag >= lo) & (kmag <= hi)
        if not energy[mask].any():
            continue
        w = partition.symbol(j, kmag[mask])
        if p == 2:
            out[j] = math.sqrt(_l2_measure(grid) * float(np.sum(w * w * energy[mask])))
            continue
        blk = np.zeros_like(c)
        blk[:, mask] = c[:, mask] * w
        vals = sfft.ifftn(blk * grid.N ** grid.d, axes=tuple(range(1, grid.d + 1)))
        if real:
            vals = vals.real
        out[j] = _lp_of_samples(_pointwise_abs(vals), grid, p)
    return out


def besov_from_blocks(blocks, s, q):
    _check_pq("q", q)
    j = np.arange(len(blocks))
    w = 2.0 ** (j * s) * np.asarray(blocks)
    if q == INF:
        return float(w.max())
    return float(np.sum(w ** q) ** (1.0 / q))


def besov_norm_lp(f, prm, partition=None):
    return besov_from_blocks(block_norms(f, prm.p, partition), prm.s, prm.q)


def sobolev_norm(f, s):
    """``(sum (1 + |k|^2)^s |c_k|^2)^{1/2}`` in the grid's L^2 measure."""
    c, _ = _spectra(f)
    grid = f.grid
    e = np.sum(np.abs(c) ** 2, axis=0)
    return math.sqrt(_l2_measure(grid) * float(np.sum((1 + grid.kmag() ** 2) ** s * e)))


# ---------------------------------------------------------------------------
# iterated differences

def _as_shift(h, d):
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if h.size == 1 and d > 1:
        h = np.concatenate([h, np.zeros(d - 1)])
    if h.size != d:
        raise InvalidParameterError(f"shift has {h.size} entries, grid has dimension {d}")
    return h


def _difference_multiplier(grid, h, m):
    """Spectral symbol of ``Delta_h^m``: ``(exp(i k.h) - 1)^m`` without cancellation."""
    phase = sum(k * hk for k, hk in zip(grid.wavenumbers(), h))
    return (2j * np.sin(phase / 2)) ** m * np.exp(0.5j * m * phase)


def _difference_scalar(f, h, m, interpolate):
    grid = f.grid
    steps = h / grid.dx
    on_grid = np.allclose(steps, np.round(steps), rtol=0, atol=1e-9)
    if on_grid:
        steps = np.round(steps).astype(int)
        out = np.zeros_like(f.values)
        for k in range(m + 1):
            shifted = f.values
            for axis, st in enumerate(steps):
                if st:
                    shifted = np.roll(shifted, -k * st, axis=axis)
            out = out + (-1) ** (m - k) * comb(m, k, exact=True) * shifted
        return GridFunction(grid, out)
    if not interpolate:
        raise InvalidParameterError(
            f"shift {h.tolist()} is not a multiple of the grid spacing {grid.dx:g}; "
            "pass interpolate=True for spectral translation"
        )
    return GridFunction.from_spectrum(grid, f.spectrum * _difference_multiplier(grid, h, m), real=f.is_real)


def iterated_difference(f, h, m, interpolate=False):
    """``Delta_h^m f(x) = sum_k (-1)^{m-k} C(m,k) f(x + k h)``.

    Grid-multiple shifts are applied exactly by index rolling; other shifts
    need ``interpolate=True`` and use spectral (band-limited) translation.
    """
    if int(m) != m or m < 1:
        raise InvalidParameterError(f"difference order must be a positive integer, got {m}")
    m = int(m)
    h = _as_shift(h, f.grid.d)
    if isinstance(f, VelocityField):
        return VelocityField(tuple(_difference_scalar(c, h, m, interpolate) for c in f), f.divergence_free)
    return _difference_scalar(f, h, m, interpolate)


def _directions(d, n_dir=8):
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        a = np.pi * np.arange(n_dir) / n_dir
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    v = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1),
         (0, 1, 1), (0, 1, -1), (1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1)]
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def difference_norms(f, shifts, m, p):
    """``||Delta_h^m f||_p`` for each row of ``shifts`` (spectral translation)."""
    grid = f.grid
    c, real = _spectra(f)
    out = np.empty(len(shifts))
    if p == 2:
        e = np.sum(np.abs(c) ** 2, axis=0)
        keep = e > 0
        e = e[keep]
        ks = [np.broadcast_to(k, grid.shape)[keep] for k in grid.wavenumbers()]
        meas = _l2_measure(grid)
        for i, h in enumerate(shifts):
            phase = sum(k * hk for k, hk in zip(ks, h))
            mult = (2 * np.sin(phase / 2)) ** (2 * m)
            out[i] = math.sqrt(meas * float(np.sum(mult * e)))
        return out
    axes = tuple(range(1, grid.d + 1))
    for i, h in enumerate(shifts):
        vals = sfft.ifftn(c * _difference_multiplier(grid, h, m) * grid.N ** grid.d, axes=axes)
        if real:
            vals = vals.real
        out[i] = _lp_of_samples(_pointwise_abs(vals), grid, p)
    return out


def _check_inside_box(f, rel_tol=1e-8):
    grid = f.grid
    if grid.kind != BOX:
        return
    arr = f.stack() if isinstance(f, VelocityField) else f.values[None]
    a = _pointwise_abs(arr)
    peak = a.max()
    if peak == 0:
        return
    edge = max(1, grid.N // 16)
    for axis in range(grid.d):
        lo = np.take(a, np.arange(edge), axis=axis)
        hi = np.take(a, np.arange(grid.N - edge, grid.N), axis=axis)
        if max(lo.max(), hi.max()) > rel_tol * peak:
            raise DomainTruncationError(
                "field is not negligible near the box boundary; enlarge the box"
            )


def besov_norm_diff(f, prm):
    """Difference-characterization Besov norm.

    The t-integral is a trapezoid rule in ``log t`` over ``n_t`` points in
    ``[dx, 1]``; the piece on ``(0, dx)`` is added in closed form assuming the
    smooth-regime behaviour ``||Delta_h^m f|| ~ h^m``.  For ``q = inf`` the
    supremum runs over ``dx <= |h| <= max(1, L / 2m)``.
    """
    _check_inside_box(f)
    grid = f.grid
    sigma, m, q = prm.sigma, prm.m, prm.q
    t_lo = grid.dx
    sub = max(1, prm.n_h // 4)
    n_mag = (prm.n_t - 1) * sub + 1
    mags = np.geomspace(t_lo, 1.0, n_mag)
    h_top = max(1.0, grid.L / (2 * m))
    if q == INF and h_top > 1.0:
        n_extra = max(2, math.ceil(math.log(h_top) / math.log(mags[1] / mags[0])) + 1)
        extra = np.geomspace(1.0, h_top, n_extra)
        mags = np.concatenate([mags, extra[1:]])
    dirs = _directions(grid.d)
    shifts = (mags[:, None, None] * dirs[None]).reshape(-1, grid.d)
    vals = difference_norms(f, shifts, m, prm.p).reshape(len(mags), len(dirs)).max(axis=1)
    base = lp_norm(f, prm.p)
    if q == INF:
        return base + float(np.max(mags ** -sigma * vals))
    sup = np.maximum.accumulate(vals[:n_mag])
    t = mags[:n_mag][::sub]
    g = t ** (-sigma * q) * sup[::sub] ** q
    integral = float(np.trapezoid(g, np.log(t)))
    integral += float(g[0]) / ((m - sigma) * q)
    return base + integral ** (1.0 / q)


# ---------------------------------------------------------------------------
# Hölder quotient of first derivatives

def holder_modulus_curve(u, sigma, hs, n_r=12):
    """``sup_{0<|x-y|<=h} |d^a u(x) - d^a u(y)| / |x-y|^sigma`` for each ``h``.

    Pairs are ``(x, x + r e)`` with ``x`` on the grid, ``e`` drawn from a fixed
    direction set and ``|r|`` from a geometric ladder below each ``h``.
    Translations are spectral, so sub-grid offsets are exact for band-limited
    fields and free of cancellation.
    """
    if not 0 < sigma < 1:
        raise InvalidParameterError(f"Hölder exponent must lie in (0, 1), got {sigma}")
    if isinstance(u, GridFunction):
        u = VelocityField((u,))
    grid = u.grid
    hs = np.atleast_1d(np.asarray(hs, dtype=float))
    c = u.spectra()
    real = all(comp.is_real for comp in u)
    kd = grid.wavenumbers(deriv=True)
    kf = grid.wavenumbers()
    derivs = np.concatenate([1j * kd[a] * c for a in range(grid.d)]) * grid.N ** grid.d
    if real:
        # half spectrum along the last axis
        half = grid.N // 2 + 1
        derivs = derivs[..., :half]
        kf = [k[..., :half] for k in kf]
    radii = np.unique(np.concatenate([h * 2.0 ** (-np.arange(n_r) / 2) for h in hs]))
    radii = radii[radii > 0]
    dirs = _directions(grid.d)
    axes = tuple(range(1, grid.d + 1))
    q = np.zeros(len(radii))
    for i, r in enumerate(radii):
        best = 0.0
        for e in dirs:
            phase = sum(k * (r * ek) for k, ek in zip(kf, e))
            mult = 2j * np.sin(phase / 2) * np.exp(0.5j * phase)
            if real:
                vals = sfft.irfftn(derivs * mult, s=grid.shape, axes=axes)
            else:
                vals = sfft.ifftn(derivs * mult, axes=axes)
            mag = np.sum(np.abs(vals.reshape((grid.d, -1) + grid.shape)) ** 2, axis=1)
            best = max(best, math.sqrt(float(mag.max())))
        q[i] = best / r ** sigma
    return np.array([q[radii <= h * (1 + 1e-12)].max(initial=0.0) for h in hs])


def holder_quotient_sup(u, sigma, h):
    return float(holder_modulus_curve(u, sigma, [h])[0])
