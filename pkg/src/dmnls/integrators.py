"""Time steppers for the dispersion-managed and the averaged equations.

Dispersion-managed NLS, u-frame::

    i u_t + (d_av + d0(t/eps)/eps) u_xx + |u|^alpha u = 0

is advanced by Strang splitting.  The linear flow is exact for any interval
without a breakpoint ``t = k eps`` (multiplier ``exp(-i xi^2 Phi)``, ``Phi`` the
integrated dispersion), so the stiff ``1/eps`` part costs nothing.  Samples
are reported in the averaging frame ``v = T_{-D(t/eps)} u``.

Averaged equation::

    i v_t + d_av v_xx + <Q>(v) = 0

is advanced by Strang splitting with an exact linear half step and classical
RK4 for ``v_t = i <Q>(v)``.
"""
from __future__ import annotations

import hashlib
import math
import time as _time
from dataclasses import dataclass, field

import numpy as np

from .dispersion import DispersionMap, breakpoints_in, integrated_dispersion
from .nonlinearity import Quadrature, avg_Q_hat, make_quadrature
from .spectral import (
    ComplexField,
    SpatialGrid,
    averaged_energy,
    boundary_amplitude,
    fft,
    free_propagate,
    ifft,
    mass,
    propagator_symbol,
    sobolev_norm_hat,
)


class BlowUpError(RuntimeError):
    """H^1 norm exceeded the configured cap or the state became non-finite."""

    def __init__(self, message, last_good_time):
        super().__init__(message)
        self.last_good_time = last_good_time


class BreakpointError(ValueError):
    """A step would straddle a discontinuity of the dispersion map."""


@dataclass(frozen=True)
class DmStepperConfig:
    map: DispersionMap
    alpha: float
    n_sub: int = 16
    h1_cap_factor: float = 1e3

    def __post_init__(self):
        if int(self.n_sub) != self.n_sub or self.n_sub < 4:
            raise ValueError(f"n_sub must be an integer >= 4, got {self.n_sub}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @property
    def dt(self) -> float:
        return self.map.epsilon / self.n_sub


@dataclass(frozen=True)
class AvgStepperConfig:
    d_av: float
    alpha: float
    dt: float = 2.5e-3
    quadrature: Quadrature = field(default_factory=make_quadrature)
    h1_cap_factor: float = 1e3

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


@dataclass
class Trajectory:
    """Sampled solution with per-sample diagnostics.

    Samples are stored in integration order, so ``times`` increases for
    forward runs and decreases for backward runs.  ``completed`` is False when
    the blow-up guard stopped the run; ``blowup_time`` is then the last time
    at which the state was still acceptable.
    """

    grid: SpatialGrid
    times: np.ndarray
    fields: np.ndarray
    mass: np.ndarray
    h1_norm: np.ndarray
    energy: np.ndarray
    boundary: np.ndarray
    meta: dict = field(default_factory=dict)
    completed: bool = True
    blowup_time: float | None = None

    def field(self, k: int) -> ComplexField:
        return ComplexField(self.grid, self.fields[k], float(self.times[k]))

    def __len__(self):
        return len(self.times)

    def lookup(self, times) -> np.ndarray:
        """Indices of the given sample times (matched to 1e-10)."""
        index = {round(float(t), 10): k for k, t in enumerate(self.times)}
        try:
            return np.array([index[round(float(t), 10)] for t in times], dtype=int)
        except KeyError as exc:
            raise KeyError(f"time {exc.args[0]} is not a sample of this trajectory") from None


def config_hash(*parts) -> str:
    return hashlib.sha256(repr(parts).encode()).hexdigest()[:12]


# --- dispersion-managed stepper -------------------------------------------------

def _check_no_breakpoint(t0, t1, epsilon):
    lo, hi = min(t0, t1), max(t0, t1)
    if hi > lo and breakpoints_in(lo, hi, epsilon):
        raise BreakpointError(f"interval ({t0}, {t1}) straddles a breakpoint of the dispersion map")


def dm_linear_substep(u: ComplexField, t0: float, t1: float, map: DispersionMap) -> ComplexField:
    """Exact linear flow of the managed equation from ``t0`` to ``t1``."""
    _check_no_breakpoint(t0, t1, map.epsilon)
    return free_propagate(u, integrated_dispersion(t0, t1, map))


def dm_nonlinear_substep(u: ComplexField, dt: float, alpha: float) -> ComplexField:
    """Exact flow of ``i u_t + |u|^alpha u = 0``: a pointwise phase rotation."""
    w = u.values
    return u.with_values(w * np.exp(1j * dt * np.abs(w) ** alpha))


def dm_step(u: ComplexField, t: float, dt: float, cfg: DmStepperConfig) -> ComplexField:
    """One Strang step ``L(dt/2) N(dt) L(dt/2)`` from ``t`` to ``t + dt``."""
    _check_no_breakpoint(t, t + dt, cfg.map.epsilon)
    half = dm_linear_substep(u, t, t + dt / 2, cfg.map)
    half = dm_nonlinear_substep(half, dt, cfg.alpha)
    out = dm_linear_substep(half, t + dt / 2, t + dt, cfg.map)
    return out.with_values(out.values, time=t + dt)


def to_averaging_frame(u: ComplexField, t: float, map: DispersionMap) -> ComplexField:
    """``v = T_{-D(t/eps)} u``."""
    return free_propagate(u, -map.frame_shift(t))


def from_averaging_frame(v: ComplexField, t: float, map: DispersionMap) -> ComplexField:
    """``u = T_{D(t/eps)} v``."""
    return free_propagate(v, map.frame_shift(t))


# --- averaged stepper -------------------------------------------------------------

def avg_rhs(v: ComplexField, alpha: float, quadrature: Quadrature) -> ComplexField:
    """Right side ``i <Q>(v)`` of the nonlinear part of the averaged equation."""
    return v.with_values(ifft(1j * avg_Q_hat(fft(v.values), v.grid, alpha, quadrature)))


def _rk4_hat(vh, h, grid, alpha, quadrature):
    def rhs(w):
        return 1j * avg_Q_hat(w, grid, alpha, quadrature)

    k1 = rhs(vh)
    k2 = rhs(vh + 0.5 * h * k1)
    k3 = rhs(vh + 0.5 * h * k2)
    k4 = rhs(vh + h * k3)
    return vh + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def avg_step(v: ComplexField, t: float, dt: float, cfg: AvgStepperConfig) -> ComplexField:
    """One Strang step of the averaged equation (exact linear half steps, RK4)."""
    grid = v.grid
    lin_half = propagator_symbol(grid, cfg.d_av * dt / 2)
    vh = fft(v.values) * lin_half
    vh = _rk4_hat(vh, dt, grid, cfg.alpha, cfg.quadrature) * lin_half
    h1 = sobolev_norm_hat(vh, grid, 1.0)
    cap = cfg.h1_cap_factor * max(sobolev_norm_hat(fft(v.values), grid, 1.0), 1e-300)
    if not np.isfinite(h1) or h1 > cap:
        raise BlowUpError(f"averaged step blew up at t={t + dt}", t)
    return ComplexField(grid, ifft(vh), t + dt)


# --- drivers ------------------------------------------------------------------------

class _Recorder:
    def __init__(self, grid, alpha, d_av, quadrature):
        self.grid, self.alpha, self.d_av, self.quadrature = grid, alpha, d_av, quadrature
        self.times, self.fields = [], []

    def add(self, t, values):
        self.times.append(t)
        self.fields.append(np.array(values))

    def build(self, meta, completed=True, blowup_time=None) -> Trajectory:
        grid = self.grid
        fields = np.array(self.fields).reshape(len(self.fields), grid.N)
        samples = [ComplexField(grid, w, t) for t, w in zip(self.times, fields)]
        return Trajectory(
            grid=grid,
            times=np.array(self.times, dtype=float),
            fields=fields,
            mass=np.array([mass(f) for f in samples]),
            h1_norm=sobolev_norm_hat(fft(fields), grid, 1.0) if len(samples) else np.zeros(0),
            energy=np.array([averaged_energy(f, self.alpha, self.d_av, self.quadrature) for f in samples]),
            boundary=np.array([boundary_amplitude(f) for f in samples]),
            meta=meta,
            completed=completed,
            blowup_time=blowup_time,
        )


def _schedule(t_start, t_end, output_times, breaks):
    """Integration nodes and the set of output times, in integration order."""
    sign = 1.0 if t_end >= t_start else -1.0
    outs = sorted({round(float(t), 12) for t in output_times} | {round(t_start, 12), round(t_end, 12)},
                  key=lambda t: sign * t)
    lo, hi = min(t_start, t_end), max(t_start, t_end)
    for t in outs:
        if t < lo - 1e-12 or t > hi + 1e-12:
            raise ValueError(f"output time {t} outside [{lo}, {hi}]")
    nodes = sorted(set(outs) | {round(b, 12) for b in breaks}, key=lambda t: sign * t)
    return nodes, set(outs)


def _n_steps(a, b, dt):
    return max(1, math.ceil(abs(b - a) / dt - 1e-9))


def _default_times(t_start, t_end, spacing):
    n = _n_steps(t_start, t_end, spacing) if t_end != t_start else 0
    grid = [t_start + k * spacing * np.sign(t_end - t_start) for k in range(n)]
    return [t for t in grid if abs(t - t_start) < abs(t_end - t_start)] + [t_end]


def evolve_dm(phi: ComplexField, cfg: DmStepperConfig, horizon: float, output_times=None,
              samples_per_period: int | None = None,
              quadrature: Quadrature | None = None) -> Trajectory:
    """Evolve the managed equation from ``phi.time`` to ``horizon``.

    ``phi`` is given in the averaging frame (at ``t = 0`` both frames agree)
    and samples are returned in the averaging frame.  Without explicit
    ``output_times`` the samples sit at full fast periods ``t = 2 k eps``;
    ``samples_per_period`` adds evenly spaced samples inside each period.
    A breach of the blow-up guard ends the run with a partial trajectory.
    """
    eps = cfg.map.epsilon
    grid = phi.grid
    t_start, t_end = float(phi.time), float(horizon)
    quadrature = quadrature or make_quadrature()
    if output_times is None:
        spacing = 2 * eps / (samples_per_period or 1)
        output_times = _default_times(t_start, t_end, spacing)
    breaks = breakpoints_in(min(t_start, t_end), max(t_start, t_end), eps) if t_end != t_start else []
    nodes, outputs = _schedule(t_start, t_end, output_times, breaks)
    rec = _Recorder(grid, cfg.alpha, cfg.map.d_av, quadrature)
    meta = {"kind": "dm", "epsilon": eps, "d_av": cfg.map.d_av, "alpha": cfg.alpha,
            "n_sub": cfg.n_sub, "hash": config_hash(cfg, grid, t_start, t_end)}
    clock = _time.perf_counter()

    uh = fft(from_averaging_frame(phi, t_start, cfg.map).values)
    cap = cfg.h1_cap_factor * max(sobolev_norm_hat(uh, grid, 1.0), 1e-300)
    rec.add(t_start, phi.values)
    xi2 = grid.xi**2
    for a, b in zip(nodes[:-1], nodes[1:]):
        n = _n_steps(a, b, cfg.dt)
        h = (b - a) / n
        half = np.exp(-1j * xi2 * integrated_dispersion(a, a + h / 2, cfg.map))
        full = np.exp(-1j * xi2 * integrated_dispersion(a, a + h, cfg.map))
        uh = uh * half
        for k in range(n):
            u = ifft(uh)
            u *= np.exp(1j * h * np.abs(u) ** cfg.alpha)
            uh = fft(u)
            h1 = sobolev_norm_hat(uh, grid, 1.0)
            if not np.isfinite(h1) or h1 > cap:
                meta["wall_time"] = _time.perf_counter() - clock
                return rec.build(meta, completed=False, blowup_time=a + k * h)
            uh = uh * (full if k < n - 1 else half)
        if b in outputs:
            v = ifft(uh * np.conj(propagator_symbol(grid, cfg.map.frame_shift(b))))
            rec.add(b, v)
    meta["wall_time"] = _time.perf_counter() - clock
    return rec.build(meta)


def evolve_avg(phi: ComplexField, cfg: AvgStepperConfig, horizon: float, output_times=None) -> Trajectory:
    """Evolve the averaged equation from ``phi.time`` to ``horizon``.

    Between consecutive output times the step is shrunk so that it divides
    the interval exactly.
    """
    grid = phi.grid
    t_start, t_end = float(phi.time), float(horizon)
    if output_times is None:
        output_times = np.linspace(t_start, t_end, 101)
    nodes, _ = _schedule(t_start, t_end, output_times, [])
    rec = _Recorder(grid, cfg.alpha, cfg.d_av, cfg.quadrature)
    meta = {"kind": "avg", "d_av": cfg.d_av, "alpha": cfg.alpha, "dt": cfg.dt,
            "n_r": cfg.quadrature.count, "hash": config_hash(cfg, grid, t_start, t_end)}
    clock = _time.perf_counter()

    vh = fft(phi.values)
    cap = cfg.h1_cap_factor * max(sobolev_norm_hat(vh, grid, 1.0), 1e-300)
    rec.add(t_start, phi.values)
    xi2 = grid.xi**2
    for a, b in zip(nodes[:-1], nodes[1:]):
        n = _n_steps(a, b, cfg.dt)
        h = (b - a) / n
        half = np.exp(-0.5j * xi2 * cfg.d_av * h)
        vh = vh * half
        for k in range(n):
            vh = _rk4_hat(vh, h, grid, cfg.alpha, cfg.quadrature)
            h1 = sobolev_norm_hat(vh, grid, 1.0)
            if not np.isfinite(h1) or h1 > cap:
                meta["wall_time"] = _time.perf_counter() - clock
                return rec.build(meta, completed=False, blowup_time=a + k * h)
            vh = vh * (half * half if k < n - 1 else half)
        rec.add(b, ifft(vh))
    meta["wall_time"] = _time.perf_counter() - clock
    return rec.build(meta)


def evolve_constant(phi: ComplexField, d: float, alpha: float, dt: float, horizon: float,
                    output_times=None, h1_cap_factor: float = 1e3,
                    quadrature: Quadrature | None = None) -> Trajectory:
    """Unmanaged NLS ``i u_t + d u_xx + |u|^alpha u = 0`` by Strang splitting.

    Used as the contrast run next to the managed equation.
    """
    grid = phi.grid
    t_start, t_end = float(phi.time), float(horizon)
    if output_times is None:
        output_times = np.linspace(t_start, t_end, 101)
    nodes, _ = _schedule(t_start, t_end, output_times, [])
    rec = _Recorder(grid, alpha, d, quadrature or make_quadrature())
    meta = {"kind": "constant", "d": d, "alpha": alpha, "dt": dt}
    clock = _time.perf_counter()

    uh = fft(phi.values)
    cap = h1_cap_factor * max(sobolev_norm_hat(uh, grid, 1.0), 1e-300)
    rec.add(t_start, phi.values)
    xi2 = grid.xi**2
    for a, b in zip(nodes[:-1], nodes[1:]):
        n = _n_steps(a, b, dt)
        h = (b - a) / n
        half = np.exp(-0.5j * xi2 * d * h)
        uh = uh * half
        for k in range(n):
            u = ifft(uh)
            u = u * np.exp(1j * h * np.abs(u) ** alpha)
            uh = fft(u)
            h1 = sobolev_norm_hat(uh, grid, 1.0)
            if not np.isfinite(h1) or h1 > cap:
                meta["wall_time"] = _time.perf_counter() - clock
                return rec.build(meta, completed=False, blowup_time=a + k * h)
            uh = uh * (half * half if k < n - 1 else half)
        rec.add(b, ifft(uh))
    meta["wall_time"] = _time.perf_counter() - clock
    return rec.build(meta)
