"""Pseudo-spectral incompressible Euler solver, Leray projection and linear transport.

All operators work on real-to-complex FFTs with the same derivative
convention as :meth:`Grid.wavenumbers` (Nyquist entry zeroed), so that
``divergence(leray_project(f))`` vanishes to rounding error.

Snapshot binary layout (little-endian)::

    int32 d, int32 N, float64 L, float64 time, then d blocks of N**d float64
    samples in C order.

A trajectory file is a plain concatenation of snapshots.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math
import struct

import numpy as np
from scipy import fft as sfft

from .errors import BlowupError, ConfigError, InvalidParameterError, ReportIOError
from .grid import TORUS, Grid, GridFunction, VelocityField
from .lp_core import partition_for
from .norms import INF, BesovParams, besov_norm_lp, lp_norm

BLOWUP_FACTOR = 1e3


# ---------------------------------------------------------------------------
# spectral operators

class _Ops:
    """Cached real-FFT wavenumbers, projection weights and the 2/3 mask for a grid."""

    def __init__(self, grid):
        self.grid = grid
        d, N = grid.d, grid.N
        axes_k = []
        full = sfft.fftfreq(N, d=1.0 / N)
        half = sfft.rfftfreq(N, d=1.0 / N)
        for a in range(d):
            idx = half if a == d - 1 else full
            k = idx * grid.k0
            k[np.abs(idx) == N // 2] = 0.0
            shape = [1] * d
            shape[a] = -1
            axes_k.append(k.reshape(shape))
            if a == 0:
                imax = np.abs(idx).reshape(shape)
            else:
                imax = np.maximum(imax, np.abs(idx).reshape(shape))
        self.k = axes_k
        ksq = sum(k * k for k in axes_k)
        self.inv_ksq = np.where(ksq > 0, 1.0 / np.where(ksq > 0, ksq, 1.0), 0.0)
        self.mask = (imax <= N / 3).astype(float)
        self.axes = tuple(range(-d, 0))

    def fwd(self, arr):
        return sfft.rfftn(arr, axes=self.axes)

    def inv(self, arr_hat):
        return sfft.irfftn(arr_hat, s=self.grid.shape, axes=self.axes)

    def project(self, vh):
        kv = sum(self.k[a] * vh[a] for a in range(len(vh)))
        out = np.array(vh, copy=True)
        for a in range(self.grid.d):
            out[a] = vh[a] - self.k[a] * kv * self.inv_ksq
        return out

    def grad(self, fh):
        """Physical-space gradient of every component: shape (d, ncomp, *grid)."""
        return np.stack([self.inv(1j * self.k[a] * fh) for a in range(self.grid.d)])

    def advect_hat(self, a, bh):
        """Dealiased transform of ``(a . grad) b`` with ``a`` in physical space."""
        g = self.grad(bh)
        prod = sum(a[j] * g[j] for j in range(self.grid.d))
        return self.mask * self.fwd(prod)

    def euler_rhs(self, uh):
        return -self.project(self.advect_hat(self.inv(uh), uh))


@lru_cache(maxsize=8)
def _ops(grid):
    return _Ops(grid)


def _check_dim(u):
    if len(u) != u.grid.d:
        raise InvalidParameterError(
            f"velocity has {len(u)} components on a {u.grid.d}D grid"
        )


def _field(grid, arr, divergence_free=False):
    return VelocityField.from_array(grid, np.ascontiguousarray(arr), divergence_free)


def leray_project(f):
    """Orthogonal projection onto divergence-free fields; the mean passes through."""
    _check_dim(f)
    ops = _ops(f.grid)
    return _field(f.grid, ops.inv(ops.project(ops.fwd(f.stack()))), True)


def divergence(u):
    _check_dim(u)
    ops = _ops(u.grid)
    uh = ops.fwd(u.stack())
    return GridFunction(u.grid, ops.inv(sum(1j * ops.k[a] * uh[a] for a in range(u.grid.d))))


def nonlinear_term(u):
    """``-P((u . grad) u)``, the right-hand side of the Euler system."""
    _check_dim(u)
    ops = _ops(u.grid)
    return _field(u.grid, ops.inv(ops.euler_rhs(ops.fwd(u.stack()))), True)


def dealias(u):
    """Truncate every component to the 2/3 band kept by the nonlinear term."""
    ops = _ops(u.grid)
    return _field(u.grid, ops.inv(ops.mask * ops.fwd(u.stack())), u.divergence_free)


def _relative_divergence(u):
    scale = max(lp_norm(u, INF) * u.grid.nyquist, 1e-300)
    return lp_norm(divergence(u), INF) / scale


# ---------------------------------------------------------------------------
# configuration and trajectories

@dataclass(frozen=True)
class SolverConfig:
    """Time stepping settings.

    ``N`` and ``L`` are optional consistency checks against the grid of the
    initial data.  Snapshots are stored every ``save_every`` steps (default:
    ten evenly spaced snapshots) and always at ``t = 0`` and ``t = T``.
    """

    dt: float = 1e-3
    T: float = 1.0
    N: int | None = None
    L: float | None = None
    dealias: bool = True
    integrator: str = "rk4"
    cfl: float = 0.5
    save_every: int | None = None

    def __post_init__(self):
        if not self.dt > 0 or not self.T > 0:
            raise ConfigError(f"dt and T must be positive, got dt={self.dt}, T={self.T}")
        if self.T > 1.0 + 1e-12:
            raise ConfigError(f"final time T={self.T} exceeds 1")
        if self.integrator != "rk4":
            raise ConfigError(f"only the rk4 integrator is available, got {self.integrator!r}")
        steps = self.T / self.dt
        if abs(steps - round(steps)) > 1e-9 * steps:
            raise ConfigError(f"T={self.T} is not a whole number of steps dt={self.dt}")
        if self.save_every is not None and self.save_every < 1:
            raise ConfigError(f"save_every must be a positive step count, got {self.save_every}")

    @property
    def n_steps(self):
        return int(round(self.T / self.dt))

    @property
    def stride(self):
        if self.save_every is not None:
            return self.save_every
        return max(1, self.n_steps // 10)

    def check_grid(self, grid):
        if self.N is not None and self.N != grid.N:
            raise ConfigError(f"configured N={self.N} but the data has N={grid.N}")
        if self.L is not None and abs(self.L - grid.L) > 1e-12 * grid.L:
            raise ConfigError(f"configured L={self.L} but the data has L={grid.L}")

    def check_cfl(self, grid, umax):
        limit = self.cfl * grid.dx / umax if umax > 0 else INF
        if self.dt > limit * (1 + 1e-12):
            raise ConfigError(
                f"time step {self.dt:g} violates the CFL limit {limit:g} "
                f"(CFL {self.cfl:g}, dx {grid.dx:g}, max|u| {umax:g})"
            )


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: tuple
    fields: tuple
    energy_drift: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        fields = tuple(self.fields)
        if len(times) != len(fields) or not times:
            raise InvalidParameterError("a trajectory needs one field per time and at least one snapshot")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidParameterError("trajectory times must increase strictly")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "fields", fields)

    def __len__(self):
        return len(self.times)

    @property
    def grid(self):
        return self.fields[0].grid

    def index(self, t, tol=1e-9):
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        if abs(self.times[i] - t) > tol * max(1.0, abs(t)):
            raise InvalidParameterError(f"no snapshot at t={t:g}")
        return i

    def at(self, t):
        return self.fields[self.index(t)]

    def has_time(self, t, tol=1e-9):
        try:
            self.index(t, tol)
        except InvalidParameterError:
            return False
        return True

    @classmethod
    def steady(cls, u, times):
        """A time-independent field sampled at ``times``."""
        return cls(tuple(times), (u,) * len(times))


def _l2(ops, uh):
    # Parseval for the half spectrum: double every column except 0 and Nyquist
    w = np.full(uh.shape[-1], 2.0)
    w[0] = 1.0
    if ops.grid.N % 2 == 0:
        w[-1] = 1.0
    return math.sqrt(float(np.sum(w * np.abs(uh) ** 2)))


def _rk4(rhs, yh, t, dt):
    k1 = rhs(yh, t)
    k2 = rhs(yh + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = rhs(yh + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = rhs(yh + dt * k3, t + dt)
    return yh + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def solve(u0, cfg):
    """Integrate the Euler system from ``u0`` up to ``cfg.T`` with RK4."""
    _check_dim(u0)
    grid = u0.grid
    cfg.check_grid(grid)
    if _relative_divergence(u0) > 1e-6:
        raise InvalidParameterError("initial data is not divergence free")
    ops = _ops(grid)
    uh = ops.project(ops.fwd(u0.stack()))
    umax0 = lp_norm(u0, INF)
    cfg.check_cfl(grid, umax0)

    if cfg.dealias:
        rhs = lambda yh, t: ops.euler_rhs(yh)  # noqa: E731
    else:
        def rhs(yh, t):
            y = ops.inv(yh)
            g = ops.grad(yh)
            return -ops.project(ops.fwd(sum(y[j] * g[j] for j in range(grid.d))))

    e0 = _l2(ops, uh)
    drift = 0.0
    times, fields = [0.0], [_field(grid, ops.inv(uh), True)]
    n, stride = cfg.n_steps, cfg.stride
    for step in range(1, n + 1):
        t_prev = (step - 1) * cfg.dt
        uh = _rk4(rhs, uh, t_prev, cfg.dt)
        t = step * cfg.dt
        if e0 > 0:
            drift = max(drift, abs(_l2(ops, uh) - e0) / e0)
        if step % stride == 0 or step == n:
            u = ops.inv(uh)
            _check_blowup(u, umax0, t)
            times.append(t)
            fields.append(_field(grid, u, True))
        elif not np.all(np.isfinite(uh)):
            raise BlowupError(f"non-finite values at t={t:g}", time=t)
    return Trajectory(tuple(times), tuple(fields), drift, {"steps": n, "dt": cfg.dt})


def _check_blowup(u, umax0, t):
    if not np.all(np.isfinite(u)):
        raise BlowupError(f"non-finite values at t={t:g}", time=t)
    umax = float(np.sqrt(np.sum(u * u, axis=0)).max())
    if umax0 > 0 and umax > BLOWUP_FACTOR * umax0:
        raise BlowupError(
            f"max|u| grew from {umax0:g} to {umax:g} by t={t:g}", time=t
        )


# ---------------------------------------------------------------------------
# linear transport

def _forcing_lookup(forcing, grid):
    if forcing is None:
        return None
    if isinstance(forcing, Trajectory):
        def get(t):
            if not forcing.has_time(t):
                raise InvalidParameterError(f"forcing has no snapshot at t={t:g}")
            return forcing.at(t)
        return get
    if callable(forcing):
        return forcing
    raise InvalidParameterError("forcing must be a Trajectory, a callable of t, or None")


def transport_solve(advector, forcing, f0, cfg):
    """RK4 for ``df/dt + (mu . grad) f = F`` componentwise.

    ``advector`` must hold snapshots at every multiple of ``cfg.dt / 2`` up
    to ``cfg.T`` (the RK4 stage times); a Trajectory ``forcing`` likewise.
    """
    grid = f0.grid
    cfg.check_grid(grid)
    if advector.grid != grid:
        raise InvalidParameterError("advector and initial data live on different grids")
    half = cfg.dt / 2
    n_half = 2 * cfg.n_steps
    stage_times = [i * half for i in range(n_half + 1)]
    missing = [t for t in stage_times if not advector.has_time(t)]
    if missing:
        raise InvalidParameterError(
            f"advector lacks snapshots at {len(missing)} RK4 stage times (first t={missing[0]:g}); "
            f"it must be sampled every dt/2 = {half:g}"
        )
    get_force = _forcing_lookup(forcing, grid)
    if isinstance(forcing, Trajectory):
        for t in stage_times:
            get_force(t)
    ops = _ops(grid)
    mu = {}
    umax = 0.0
    for t in stage_times:
        m = advector.at(t)
        if _relative_divergence(m) > 1e-6:
            raise InvalidParameterError(f"advector is not divergence free at t={t:g}")
        mu[round(t / half)] = m.stack()
        umax = max(umax, lp_norm(m, INF))
    cfg.check_cfl(grid, umax)

    def rhs(fh, t):
        out = -ops.advect_hat(mu[round(t / half)], fh)
        if get_force is not None:
            out = out + ops.fwd(get_force(t).stack())
        return out

    fh = ops.fwd(f0.stack())
    times, fields = [0.0], [f0]
    stride = cfg.stride
    for step in range(1, cfg.n_steps + 1):
        fh = _rk4(rhs, fh, (step - 1) * cfg.dt, cfg.dt)
        if step % stride == 0 or step == cfg.n_steps:
            t = step * cfg.dt
            f = ops.inv(fh)
            if not np.all(np.isfinite(f)):
                raise BlowupError(f"non-finite values at t={t:g}", time=t)
            times.append(t)
            fields.append(_field(grid, f))
    return Trajectory(tuple(times), tuple(fields), 0.0, {"steps": cfg.n_steps, "dt": cfg.dt})


def gradient_field(u):
    """All ``d * ncomp`` first derivatives ``d_a u_b`` as one vector field."""
    ops = _ops(u.grid)
    g = ops.grad(ops.fwd(u.stack()))
    return _field(u.grid, g.reshape((-1,) + u.grid.shape))


def transport_rate(mu, p=2.0, partition=None):
    """``||grad mu||_{B^{d/p}_{p,inf}} + ||grad mu||_inf`` for one snapshot."""
    g = gradient_field(mu)
    return besov_norm_lp(g, BesovParams(mu.grid.d / p, p, INF), partition) + lp_norm(g, INF)


def transport_V(advector, p=2.0, partition=None):
    """Cumulative trapezoid ``V(t_i)`` over the advector snapshots."""
    if partition is None:
        partition = partition_for(advector.grid)
    rates = np.array([transport_rate(m, p, partition) for m in advector.fields])
    t = np.asarray(advector.times)
    v = np.concatenate([[0.0], np.cumsum(0.5 * (rates[1:] + rates[:-1]) * np.diff(t))])
    return v


# ---------------------------------------------------------------------------
# binary snapshots

_HEADER = struct.Struct("<iidd")


def _pack(u, time):
    grid = u.grid
    arr = np.ascontiguousarray(u.stack(), dtype="<f8")
    if arr.shape[0] != grid.d:
        raise InvalidParameterError("snapshots store exactly d components")
    return _HEADER.pack(grid.d, grid.N, float(grid.L), float(time)) + arr.tobytes(order="C")


def _unpack(buf, offset, kind):
    if len(buf) - offset < _HEADER.size:
        raise InvalidParameterError("truncated snapshot header")
    d, N, L, time = _HEADER.unpack_from(buf, offset)
    offset += _HEADER.size
    count = d * N ** d
    if len(buf) - offset < 8 * count:
        raise InvalidParameterError("truncated snapshot payload")
    arr = np.frombuffer(buf, dtype="<f8", count=count, offset=offset).reshape((d,) + (N,) * d)
    grid = Grid(d, N, L, kind)
    return time, _field(grid, arr.astype(float)), offset + 8 * count


def write_snapshot(path, u, time):
    try:
        with open(path, "wb") as fh:
            fh.write(_pack(u, time))
    except OSError as exc:
        raise ReportIOError(f"cannot write snapshot: {exc}", path=str(path)) from exc


def read_snapshot(path, kind=TORUS):
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise ReportIOError(f"cannot read snapshot: {exc}", path=str(path)) from exc
    time, u, _ = _unpack(buf, 0, kind)
    return time, u


def write_trajectory(path, traj):
    try:
        with open(path, "wb") as fh:
            for t, u in zip(traj.times, traj.fields):
                fh.write(_pack(u, t))
    except OSError as exc:
        raise ReportIOError(f"cannot write trajectory: {exc}", path=str(path)) from exc


def read_trajectory(path, kind=TORUS):
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise ReportIOError(f"cannot read trajectory: {exc}", path=str(path)) from exc
    times, fields, off = [], [], 0
    while off < len(buf):
        t, u, off = _unpack(buf, off, kind)
        times.append(t)
        fields.append(u)
    return Trajectory(tuple(times), tuple(fields))
