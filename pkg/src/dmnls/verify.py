"""Structural checks run by ``dmnls verify``.

Each check returns a :class:`Check` with the measured value and the
tolerance it is held to.  All randomness comes from one seeded generator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .dispersion import D, DispersionMap, d0, integrated_dispersion
from .experiments import lemma_bound_suite
from .integrators import DmStepperConfig, evolve_dm
from .nonlinearity import Q, avg_Q, cumulative_Q, make_quadrature, tau_average_Q
from .spectral import (
    ComplexField,
    free_propagate,
    from_spectrum,
    gaussian,
    make_grid,
    sample_initial_datum,
    sobolev_norm,
    to_spectrum,
)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.tolerance)


def random_band_limited(grid, rng, k_max=8.0, amplitude=1.0):
    """Random field with Gaussian-damped random spectrum (``|xi| <~ k_max``)."""
    coeffs = rng.normal(size=grid.N) + 1j * rng.normal(size=grid.N)
    coeffs *= np.exp(-0.5 * (grid.xi / (k_max / 3)) ** 2)
    f = from_spectrum(coeffs, grid)
    return f * (amplitude / np.abs(f.values).max())


def structural_checks(alpha=2.0, d_av=1.0, seed=0, trials=200):
    rng = np.random.default_rng(seed)
    grid = make_grid(50.0, 1024)
    quadrature = make_quadrature()
    gauss = sample_initial_datum(gaussian(), grid)
    f = random_band_limited(grid, rng)
    noise = ComplexField(grid, rng.normal(size=grid.N) + 1j * rng.normal(size=grid.N))
    checks = []

    rt = np.abs(from_spectrum(to_spectrum(noise), grid).values - noise.values).max()
    checks.append(Check("transform round trip (max abs)", rt, 1e-12))

    for s in (0, 1, 3):
        worst = 0.0
        for t in rng.uniform(-5, 5, 5):
            n0 = sobolev_norm(noise, s)
            worst = max(worst, abs(sobolev_norm(free_propagate(noise, t), s) - n0) / n0)
        checks.append(Check(f"T_t unitarity in H^{s} (relative)", worst, 1e-12))

    t1, t2 = rng.uniform(-5, 5, 2)
    lhs = free_propagate(noise, t1 + t2)
    rhs = free_propagate(free_propagate(noise, t2), t1)
    checks.append(Check("group law T_(t+s) = T_t T_s (relative L2)",
                        sobolev_norm(lhs - rhs, 0) / sobolev_norm(noise, 0), 1e-12))

    scale = sobolev_norm(f, 1) ** (alpha + 1)
    worst = 0.0
    for s in rng.uniform(-3, 3, 5):
        worst = max(worst, sobolev_norm(Q(s + 2, f, alpha) - Q(s, f, alpha), 1) / scale)
    checks.append(Check("Q 2-periodic in s (relative H1)", worst, 1e-12))

    theta = rng.uniform(0, 2 * np.pi)
    phase = np.exp(1j * theta)
    s = rng.uniform(0, 2)
    g1 = sobolev_norm(Q(s, f * phase, alpha) - Q(s, f, alpha) * phase, 1) / scale
    g2 = sobolev_norm(avg_Q(f * phase, alpha, quadrature) - avg_Q(f, alpha, quadrature) * phase, 1) / scale
    checks.append(Check("gauge covariance of Q and <Q> (relative H1)", max(g1, g2), 1e-12))

    gap = sobolev_norm(avg_Q(gauss, alpha, quadrature) - tau_average_Q(gauss, alpha, panels=256), 1)
    checks.append(Check("<Q> equals the tau-average of Q (H1)", gap, 1e-8))

    checks.append(Check("cumulative Q over one period vanishes (H1)",
                        sobolev_norm(cumulative_Q(2.0, gauss, alpha, 512, quadrature), 1), 1e-8))

    worst = 0.0
    for tau in np.concatenate([rng.uniform(-4, 4, 4), [-0.5]]):
        lo, hi = sorted((0.0, tau))
        pts = [p for p in np.arange(np.ceil(lo), np.floor(hi) + 1) if lo < p < hi]
        val = quad(d0, lo, hi, points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-13)[0]
        worst = max(worst, abs(np.sign(tau) * val - D(tau)))
    checks.append(Check("D matches quadrature of d0", worst, 1e-10))

    m = DispersionMap(d_av, 0.1)
    a, b, c = np.sort(rng.uniform(-1, 1, 3))
    add = abs(integrated_dispersion(a, b, m) + integrated_dispersion(b, c, m) - integrated_dispersion(a, c, m))
    checks.append(Check("integrated dispersion additivity", add, 1e-14))

    traj = evolve_dm(gauss, DmStepperConfig(DispersionMap(d_av, 0.05), alpha), 1.0, quadrature=quadrature)
    checks.append(Check("managed stepper mass conservation (relative)",
                        float(np.max(np.abs(traj.mass / traj.mass[0] - 1))), 1e-9))

    report = lemma_bound_suite(alpha, trials, seed)
    checks.append(Check("single-mode homogeneity of Q", report.homogeneity_error, 1e-10))
    for name, stats in report.ratios.items():
        checks.append(Check(f"lemma ensemble '{name}' max/median", stats.spread, 50.0))
    return checks, report
