"""Numerical studies of the averaging limit eps -> 0.

* :func:`convergence_study` -- sup-in-time H^1 distance between the managed
  solution ``v_eps`` and the averaged solution ``v`` along a sweep of eps.
* :func:`oscillatory_residual` -- the filtered oscillatory integral
  ``sup_t || int_0^t e^{i d_av (t-s) d_x^2} [Q(s/eps, v(s)) - <Q>(v(s))] ds ||_{H^1}``
  along an averaged trajectory.
* :func:`lemma_bound_suite` -- empirical constants of the nonlinear estimates
  over a seeded random ensemble.
* :func:`uniform_bound_check`, :func:`supercritical_exploration`,
  :func:`estimate_order`.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .dispersion import D, DispersionMap, breakpoints_in
from .integrators import (
    AvgStepperConfig,
    BlowUpError,
    DmStepperConfig,
    Trajectory,
    evolve_avg,
    evolve_constant,
    evolve_dm,
)
from .nonlinearity import (
    Q_hat,
    avg_Q_hat,
    conjugated_power_hat,
    gauss_panels,
    make_quadrature,
)
from .spectral import (
    InitialDatum,
    ResolutionError,
    SpatialGrid,
    fft,
    gaussian,
    make_grid,
    sample_initial_datum,
    sobolev_norm_hat,
    spectral_tail,
)

DEFAULT_EPSILONS = (0.2, 0.1, 0.05, 0.025)


@dataclass(frozen=True)
class StudyConfig:
    """Everything needed to reproduce a study."""

    alpha: float
    d_av: float
    M: float
    datum: InitialDatum = field(default_factory=gaussian)
    epsilons: tuple = DEFAULT_EPSILONS
    L: float = 50.0
    N: int = 1024
    n_sub: int = 16
    avg_dt: float = 2.5e-3
    quadrature: str = "gauss_legendre"
    n_r: int = 24
    samples_per_period: int = 8
    h1_cap_factor: float = 1e3
    seed: int = 0
    workers: int = 1
    trials: int = 200
    timings: bool = True

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        if not self.alpha > 0:
            raise ValueError(f"physics.alpha must be positive, got {self.alpha}")
        if not math.isfinite(self.d_av):
            raise ValueError("physics.d_av must be finite")
        if not self.M > 0:
            raise ValueError(f"study.M must be positive, got {self.M}")
        if not self.epsilons or any(not e > 0 for e in self.epsilons):
            raise ValueError("study.epsilons must be a non-empty list of positive numbers")
        if any(a <= b for a, b in zip(self.epsilons, self.epsilons[1:])):
            raise ValueError("study.epsilons must be strictly descending")
        if self.samples_per_period < 1:
            raise ValueError("stepper.samples_per_period must be >= 1")
        if self.workers < 1:
            raise ValueError("study.workers must be >= 1")
        if not self.avg_dt > 0:
            raise ValueError("stepper.avg_dt must be positive")
        for section, check in (
            ("grid", lambda: make_grid(self.L, self.N)),
            ("quadrature", lambda: make_quadrature(self.quadrature, self.n_r)),
            ("stepper", lambda: DmStepperConfig(DispersionMap(self.d_av, self.epsilons[0]),
                                                self.alpha, self.n_sub)),
        ):
            try:
                check()
            except ValueError as exc:
                raise ValueError(f"{section}: {exc}") from None

    def grid(self) -> SpatialGrid:
        return make_grid(self.L, self.N)

    def avg_config(self, dt_factor=1.0, n_r=None) -> AvgStepperConfig:
        return AvgStepperConfig(self.d_av, self.alpha, self.avg_dt * dt_factor,
                                make_quadrature(self.quadrature, n_r or self.n_r), self.h1_cap_factor)

    def dm_config(self, epsilon, n_sub=None) -> DmStepperConfig:
        return DmStepperConfig(DispersionMap(self.d_av, epsilon), self.alpha,
                               n_sub or self.n_sub, self.h1_cap_factor)


def warn_outside_hypotheses(cfg: StudyConfig):
    if cfg.alpha < 2:
        warnings.warn(f"alpha = {cfg.alpha} < 2: outside the range alpha >= 2 where the "
                      "averaging limit is known for H^1 data; convergence is not guaranteed",
                      stacklevel=3)


# --- order estimation -------------------------------------------------------------

@dataclass(frozen=True)
class OrderFit:
    slope: float
    intercept: float
    residual: float
    slope_stderr: float


def estimate_order(records=None, *, epsilons=None, errors=None) -> OrderFit:
    """Least-squares fit ``log(error) = slope * log(eps) + intercept``.

    Accepts either ConvergenceRecords or explicit ``epsilons``/``errors``.
    ``residual`` is the RMS misfit in log space.
    """
    if records is not None:
        epsilons = [r.epsilon for r in records]
        errors = [r.sup_h1_error for r in records]
    x = np.asarray(epsilons, dtype=float)
    y = np.asarray(errors, dtype=float)
    keep = np.isfinite(y) & (y > 0) & (x > 0)
    if keep.sum() < 3:
        raise ValueError(f"need at least 3 positive errors to fit an order, got {int(keep.sum())}")
    lx, ly = np.log(x[keep]), np.log(y[keep])
    (slope, intercept), ssr, *_ = np.polyfit(lx, ly, 1, full=True)
    n = len(lx)
    ssr = float(ssr[0]) if len(ssr) else 0.0
    stderr = math.sqrt(ssr / (n - 2) / np.sum((lx - lx.mean()) ** 2)) if n > 2 else math.inf
    return OrderFit(float(slope), float(intercept), math.sqrt(ssr / n), stderr)


# --- convergence study ---------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRecord:
    epsilon: float
    sup_h1_error: float
    sup_l2_error: float
    mass_drift: float
    wall_time_seconds: float
    completed: bool = True
    argmax_time: float = 0.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass
class ConvergenceResult:
    config: StudyConfig
    records: list
    fit: OrderFit | None
    reference_error: float
    dt_sensitivity: float | None = None
    flagged: list = field(default_factory=list)

    def errors(self):
        return np.array([r.sup_h1_error for r in self.records])


def sample_times(epsilon, M, samples_per_period):
    """Uniform samples with ``samples_per_period`` points per fast period ``2 eps``."""
    spacing = 2 * epsilon / samples_per_period
    n = int(math.floor(M / spacing + 1e-9))
    times = [round(k * spacing, 12) for k in range(n + 1)]
    if abs(times[-1] - M) > 1e-12:
        times.append(round(M, 12))
    return times


def _dm_job(args):
    phi, cfg, M, times, quadrature = args
    return evolve_dm(phi, cfg, M, times, quadrature=quadrature)


def _distance(traj, ref, times):
    grid = traj.grid
    idx_a, idx_b = traj.lookup(times), ref.lookup(times)
    diff_hat = fft(traj.fields[idx_a] - ref.fields[idx_b])
    return sobolev_norm_hat(diff_hat, grid, 1.0), sobolev_norm_hat(diff_hat, grid, 0.0)


def _run_dm_sweep(phi, cfg, epsilons, per_eps_times, n_sub=None):
    quad = make_quadrature(cfg.quadrature, cfg.n_r)
    jobs = [(phi, cfg.dm_config(e, n_sub), cfg.M, per_eps_times[e], quad) for e in epsilons]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_dm_job, jobs))
    return [_dm_job(j) for j in jobs]


def convergence_study(cfg: StudyConfig, check_resolution: bool = True) -> ConvergenceResult:
    """Sweep eps and measure ``max_k ||v_eps(t_k) - v(t_k)||`` on shared samples.

    The averaged reference is computed once (plus once at half step for the
    refinement check).  Each eps is sampled ``samples_per_period`` times per
    fast period so the sup also sees mid-period times, where the frames differ.

    Raises ResolutionError if the reference's own error estimate exceeds 1% of
    the smallest measured gap, or (``check_resolution``) if halving both time
    steps moves the smallest-eps error by 10% or more.
    """
    warn_outside_hypotheses(cfg)
    grid = cfg.grid()
    phi = sample_initial_datum(cfg.datum, grid)
    per_eps = {e: sample_times(e, cfg.M, cfg.samples_per_period) for e in cfg.epsilons}
    union = sorted(set().union(*per_eps.values()))

    ref = evolve_avg(phi, cfg.avg_config(), cfg.M, union)
    ref_half = evolve_avg(phi, cfg.avg_config(0.5), cfg.M, union)
    if not (ref.completed and ref_half.completed):
        raise BlowUpError("averaged reference tripped the blow-up guard", ref.blowup_time)
    ref_err = float(_distance(ref, ref_half, union)[0].max()) * 4.0 / 3.0

    runs = _run_dm_sweep(phi, cfg, cfg.epsilons, per_eps)
    records, flagged = [], []
    m0 = runs[0].mass[0]
    for e, traj in zip(cfg.epsilons, runs):
        wall = traj.meta["wall_time"] if cfg.timings else 0.0
        if not traj.completed:
            flagged.append(e)
            records.append(ConvergenceRecord(e, math.nan, math.nan, math.nan, wall, False))
            continue
        h1, l2 = _distance(traj, ref, per_eps[e])
        k = int(np.argmax(h1))
        drift = float(np.max(np.abs(traj.mass - m0)) / m0) if m0 > 0 else 0.0
        records.append(ConvergenceRecord(e, float(h1.max()), float(l2.max()), drift, wall,
                                         True, float(per_eps[e][k])))

    good = [r for r in records if r.completed]
    fit = estimate_order(good) if len(good) >= 3 else None
    result = ConvergenceResult(cfg, records, fit, ref_err, flagged=flagged)
    # gaps at round-off level (e.g. single-mode data) carry no averaging error to resolve
    floor = 1e-9 * max(float(ref.h1_norm[0]), 1e-300)
    if good:
        smallest_gap = min(r.sup_h1_error for r in good)
        if smallest_gap > floor and ref_err >= 0.01 * smallest_gap:
            raise ResolutionError(f"averaged reference error estimate {ref_err:.3e} is not below 1% "
                                  f"of the smallest gap {smallest_gap:.3e}; reduce stepper.avg_dt")
    if check_resolution and good and good[-1].sup_h1_error > floor:
        e_min = good[-1].epsilon
        fine = _run_dm_sweep(phi, cfg, [e_min], per_eps, n_sub=2 * cfg.n_sub)[0]
        fine_err = float(_distance(fine, ref_half, per_eps[e_min])[0].max())
        result.dt_sensitivity = abs(fine_err - good[-1].sup_h1_error) / good[-1].sup_h1_error
        if result.dt_sensitivity >= 0.10:
            raise ResolutionError(f"halving the time steps changed the eps={e_min} error by "
                                  f"{100 * result.dt_sensitivity:.1f}% (>= 10%)")
    return result


# --- oscillatory residual -----------------------------------------------------------

def oscillatory_residual_profile(v_traj: Trajectory, epsilon: float, alpha: float, d_av: float,
                                 quadrature=None, n_gauss: int = 6):
    """``||I(t_k)||_{H^1}`` at every sample time, where
    ``I(t) = int_0^t e^{i d_av (t-s) d_x^2} [Q(s/eps, v(s)) - <Q>(v(s))] ds``.

    ``v`` is interpolated in time by cubic splines through the samples; the
    s-integral uses ``n_gauss`` Gauss points on every panel between
    consecutive samples and breakpoints ``k eps``.
    """
    quadrature = quadrature or make_quadrature()
    times = np.asarray(v_traj.times, dtype=float)
    if len(times) < 4 or abs(times[0]) > 1e-12:
        raise ValueError("trajectory must start at t = 0 and have at least 4 samples")
    max_gap = np.max(np.abs(np.diff(times)))
    if max_gap > 2 * epsilon / 8 * (1 + 1e-9):
        raise ValueError(f"trajectory under-sampled: spacing {max_gap:.4g} > 2*eps/8 = {epsilon / 4:.4g}")
    grid = v_traj.grid
    order = np.argsort(times)
    spline = CubicSpline(times[order], fft(v_traj.fields[order]), axis=0)
    lo, hi = times.min(), times.max()
    breaks = np.union1d(np.round(times, 12), np.round(breakpoints_in(lo, hi, epsilon), 12)) if hi > lo else times
    forward = times[-1] >= times[0]
    if not forward:
        breaks = breaks[::-1]
    # J(t) = int_0^t T_{-d_av s} g(s) ds has the same H^1 norm as I(t)
    phase = grid.xi**2 * d_av
    J = np.zeros(grid.N, dtype=complex)
    norms = {round(breaks[0], 12): 0.0}
    for a, b in zip(breaks[:-1], breaks[1:]):
        s, w = gauss_panels([a, b], n_gauss)
        vh = spline(s)
        fast = conjugated_power_hat(vh, grid, D(s / epsilon), alpha)
        slow = np.array([avg_Q_hat(row, grid, alpha, quadrature) for row in vh])
        J = J + w @ (np.exp(1j * phase * s[:, None]) * (fast - slow))
        norms[round(b, 12)] = float(sobolev_norm_hat(J, grid, 1.0))
    return times, np.array([norms[round(t, 12)] for t in times])


def oscillatory_residual(v_traj: Trajectory, epsilon: float, alpha: float, d_av: float,
                         quadrature=None, n_gauss: int = 6) -> float:
    """Discrete sup over the samples of :func:`oscillatory_residual_profile`."""
    return float(oscillatory_residual_profile(v_traj, epsilon, alpha, d_av, quadrature, n_gauss)[1].max())


def residual_study(cfg: StudyConfig, epsilons=None):
    """Residual for each eps along one averaged trajectory sampled at the finest eps."""
    epsilons = tuple(epsilons or cfg.epsilons)
    grid = cfg.grid()
    phi = sample_initial_datum(cfg.datum, grid)
    times = sample_times(min(epsilons), cfg.M, max(8, cfg.samples_per_period))
    traj = evolve_avg(phi, cfg.avg_config(), cfg.M, times)
    if not traj.completed:
        raise BlowUpError("averaged trajectory tripped the blow-up guard", traj.blowup_time)
    quad = make_quadrature(cfg.quadrature, cfg.n_r)
    return [(e, oscillatory_residual(traj, e, cfg.alpha, cfg.d_av, quad)) for e in epsilons]


# --- lemma ensembles -----------------------------------------------------------------

@dataclass(frozen=True)
class RatioStats:
    maximum: float
    median: float
    minimum: float
    count: int
    worst: str

    @property
    def spread(self) -> float:
        return self.maximum / self.median

    @classmethod
    def from_ratios(cls, ratios, descriptors):
        ratios = np.asarray(ratios)
        k = int(np.argmax(ratios))
        return cls(float(ratios.max()), float(np.median(ratios)), float(ratios.min()),
                   len(ratios), descriptors[k])


@dataclass
class EnsembleReport:
    alpha: float
    trials: int
    seed: int
    ratios: dict
    refused: dict
    homogeneity_error: float


def random_ensemble(grid: SpatialGrid, count: int, rng: np.random.Generator,
                    h1_range=(0.1, 10.0), bumps: int = 3):
    """Seeded multi-bump fields rescaled to log-uniform H^1 norms.

    Each field is a sum of ``bumps`` Gaussians with centers ``|x_j| <= L/4``,
    widths in [0.5, 3], carriers ``|k_j| <= 5``, amplitudes in [0.1, 2] and
    random phases.
    """
    x = grid.x
    fields, descriptors = [], []
    for i in range(count):
        c = rng.uniform(-grid.L / 4, grid.L / 4, bumps)
        w = rng.uniform(0.5, 3.0, bumps)
        k = rng.uniform(-5.0, 5.0, bumps)
        a = rng.uniform(0.1, 2.0, bumps) * np.exp(2j * np.pi * rng.uniform(size=bumps))
        values = np.sum(a[:, None] * np.exp(-0.5 * ((x - c[:, None]) / w[:, None]) ** 2
                                              + 1j * k[:, None] * x), axis=0)
        target = math.exp(rng.uniform(math.log(h1_range[0]), math.log(h1_range[1])))
        values *= target / sobolev_norm_hat(fft(values), grid, 1.0)
        fields.append(values)
        descriptors.append(f"#{i}: centers={np.round(c, 2).tolist()} widths={np.round(w, 2).tolist()} "
                           f"carriers={np.round(k, 2).tolist()} h1={target:.3g}")
    return fields, descriptors


def lemma_bound_suite(alpha: float, trials: int = 200, seed: int = 0, grid: SpatialGrid | None = None,
                      pairs: int | None = None, quadrature=None) -> EnsembleReport:
    """Empirical constants hidden in the nonlinear estimates.

    Ratios collected (one random frame time ``s`` in [0, 2) per field):

    * ``Q``      -- ``||Q(s,f)||_{H1} / ||f||_{H1}^(alpha+1)``
    * ``avg_Q``  -- ``||<Q>(f)||_{H1} / ||f||_{H1}^(alpha+1)``
    * ``Q_H3``   -- ``||d_x^2 Q(s,f)||_{H1} / ||f||_{H3}^(alpha+1)``  (alpha >= 2)
    * ``lipschitz`` -- ``||Q(s,f)-Q(s,g)||_{H1} / ((||f||^a + ||g||^a) ||f-g||_{H1})``  (alpha >= 1)
    """
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    grid = grid or make_grid(50.0, 4096)
    quadrature = quadrature or make_quadrature()
    pairs = pairs or trials
    rng = np.random.default_rng(seed)
    fields, desc = random_ensemble(grid, trials, rng)
    s_values = rng.uniform(0.0, 2.0, max(trials, pairs))
    xi2 = grid.xi**2
    refused = {}

    r_q, r_avg, r_h3 = [], [], []
    for f, s in zip(fields, s_values):
        fh = fft(f)
        n1 = sobolev_norm_hat(fh, grid, 1.0)
        qh = Q_hat(s, fh, grid, alpha)
        r_q.append(sobolev_norm_hat(qh, grid, 1.0) / n1 ** (alpha + 1))
        r_avg.append(sobolev_norm_hat(avg_Q_hat(fh, grid, alpha, quadrature), grid, 1.0) / n1 ** (alpha + 1))
        if alpha >= 2:
            r_h3.append(sobolev_norm_hat(xi2 * qh, grid, 1.0) / sobolev_norm_hat(fh, grid, 3.0) ** (alpha + 1))
    ratios = {"Q": RatioStats.from_ratios(r_q, desc), "avg_Q": RatioStats.from_ratios(r_avg, desc)}
    if alpha >= 2:
        ratios["Q_H3"] = RatioStats.from_ratios(r_h3, desc)
    else:
        refused["Q_H3"] = f"H^3 bound needs alpha >= 2 (got alpha = {alpha})"

    if alpha >= 1:
        r_lip, lip_desc = [], []
        for p in range(pairs):
            i = p % trials
            f = fields[i]
            if p % 2 == 0:
                j = (i + 1 + p // trials) % trials
                g = fields[j]
                tag = f"pair ({i}, {j})"
            else:
                # nearby pair: relative perturbation between 1e-3 and 1
                scale = 10 ** rng.uniform(-3, 0)
                h = fields[int(rng.integers(trials))]
                g = f + scale * h * (sobolev_norm_hat(fft(f), grid, 1.0) / sobolev_norm_hat(fft(h), grid, 1.0))
                tag = f"perturbed {i} (rel {scale:.2e})"
            fh, gh = fft(f), fft(g)
            s = s_values[p]
            num = sobolev_norm_hat(Q_hat(s, fh, grid, alpha) - Q_hat(s, gh, grid, alpha), grid, 1.0)
            nf, ng = sobolev_norm_hat(fh, grid, 1.0), sobolev_norm_hat(gh, grid, 1.0)
            den = (nf**alpha + ng**alpha) * sobolev_norm_hat(fh - gh, grid, 1.0)
            r_lip.append(num / den)
            lip_desc.append(tag)
        ratios["lipschitz"] = RatioStats.from_ratios(r_lip, lip_desc)
    else:
        refused["lipschitz"] = f"Lipschitz bound needs alpha >= 1 (got alpha = {alpha})"

    return EnsembleReport(alpha, trials, seed, ratios, refused, homogeneity_error(alpha, grid))


def homogeneity_error(alpha: float, grid: SpatialGrid, lambdas=(0.5, 2.0, 3.7), s: float = 0.7,
                      c: complex = 0.8 + 0.3j, k_index: int = 3) -> float:
    """Max relative deviation of ``||Q(s, l f)|| = l^(alpha+1) ||Q(s, f)||`` for a single mode."""
    k = k_index * np.pi / grid.L
    fh = fft(c * np.exp(1j * k * grid.x))
    base = sobolev_norm_hat(Q_hat(s, fh, grid, alpha), grid, 1.0)
    errs = [abs(sobolev_norm_hat(Q_hat(s, lam * fh, grid, alpha), grid, 1.0) / (lam ** (alpha + 1) * base) - 1)
            for lam in lambdas]
    return float(max(errs))


def require_h3_suite(alpha: float):
    """Refuse the H^3 estimate below its hypothesis."""
    if alpha < 2:
        raise ValueError(f"the H^3 bound on d_x^2 Q needs alpha >= 2 (got alpha = {alpha})")


# --- uniform bound ----------------------------------------------------------------

@dataclass
class BoundReport:
    holds: bool
    K: float
    max_norm: float
    margin: float
    offending: list


def uniform_bound_check(trajectories, K: float) -> BoundReport:
    """Check ``||v_eps(t)||_{H^1} <= 2K`` on every sample of every trajectory.

    ``trajectories`` maps eps to Trajectory (or is a list of trajectories
    whose ``meta['epsilon']`` is used).
    """
    items = trajectories.items() if isinstance(trajectories, dict) else \
        [(t.meta.get("epsilon"), t) for t in trajectories]
    offending, top = [], 0.0
    for eps, traj in items:
        if traj.h1_norm[0] > K * (1 + 1e-12):
            raise ValueError(f"initial datum has H^1 norm {traj.h1_norm[0]:.6g} > K = {K}")
        top = max(top, float(traj.h1_norm.max()))
        for t, n in zip(traj.times, traj.h1_norm):
            if n > 2 * K:
                offending.append((eps, float(t), float(n)))
    return BoundReport(not offending, K, top, 2 * K - top, offending)


# --- supercritical exploration -------------------------------------------------------

@dataclass
class SupercriticalRow:
    epsilon: float
    completed: bool
    max_h1: float
    terminal_h1: float
    reference_terminal_h1: float
    relative_mismatch: float
    boundary: float


@dataclass
class SupercriticalReport:
    alpha: float
    d_av: float
    rows: list
    reference_completed: bool
    reference_max_h1: float
    contrast_completed: bool
    contrast_max_h1: float
    contrast_blowup_time: float | None
    contrast_tail: float

    @property
    def contrast_resolved(self) -> bool:
        return self.contrast_tail < 1e-6


def supercritical_exploration(cfg: StudyConfig, contrast_dt: float | None = None) -> SupercriticalReport:
    """Managed runs above the mass-critical power next to the averaged reference.

    Also runs the same datum under constant dispersion ``d_av`` (no management)
    as an ungated contrast; its spectral tail at the end of the run is
    reported because on a fixed grid a collapse shows up as lost resolution
    before the H^1 cap can trip.
    """
    if not cfg.d_av > 0:
        raise ValueError(f"supercritical exploration needs d_av > 0, got {cfg.d_av}")
    if not 4 <= cfg.alpha < 8:
        raise ValueError(f"supercritical exploration needs 4 <= alpha < 8, got {cfg.alpha}")
    grid = cfg.grid()
    phi = sample_initial_datum(cfg.datum, grid)
    ref = evolve_avg(phi, cfg.avg_config(), cfg.M, sample_times(cfg.epsilons[-1], cfg.M, 2))
    ref_terminal = float(ref.h1_norm[-1]) if ref.completed else math.nan
    rows = []
    quad = make_quadrature(cfg.quadrature, cfg.n_r)
    for e in cfg.epsilons:
        traj = evolve_dm(phi, cfg.dm_config(e), cfg.M, sample_times(e, cfg.M, cfg.samples_per_period),
                         quadrature=quad)
        term = float(traj.h1_norm[-1]) if traj.completed else math.nan
        rows.append(SupercriticalRow(e, traj.completed, float(traj.h1_norm.max()), term, ref_terminal,
                                     abs(term - ref_terminal) / ref_terminal, float(traj.boundary.max())))
    dt = contrast_dt or cfg.epsilons[-1] / cfg.n_sub
    contrast = evolve_constant(phi, cfg.d_av, cfg.alpha, dt, cfg.M, h1_cap_factor=cfg.h1_cap_factor,
                               quadrature=quad)
    tail = spectral_tail(contrast.field(len(contrast) - 1))
    return SupercriticalReport(cfg.alpha, cfg.d_av, rows, ref.completed, float(ref.h1_norm.max()),
                               contrast.completed, float(contrast.h1_norm.max()), contrast.blowup_time, tail)
