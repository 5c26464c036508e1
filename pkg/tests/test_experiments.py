import warnings

import numpy as np
import pytest

from dmnls.dispersion import DispersionMap
from dmnls.experiments import (
    ConvergenceRecord,
    StudyConfig,
    convergence_study,
    estimate_order,
    homogeneity_error,
    lemma_bound_suite,
    oscillatory_residual,
    oscillatory_residual_profile,
    require_h3_suite,
    sample_times,
    supercritical_exploration,
    uniform_bound_check,
)
from dmnls.integrators import AvgStepperConfig, DmStepperConfig, evolve_avg, evolve_dm
from dmnls.spectral import gaussian, make_grid, sample_initial_datum, single_mode

SMALL = dict(L=25.0, N=256, M=0.5, epsilons=(0.2, 0.1, 0.05))


def test_estimate_order_exact():
    eps = np.array([0.2, 0.1, 0.05, 0.025])
    assert estimate_order(epsilons=eps, errors=3 * eps).slope == pytest.approx(1.0, abs=1e-12)
    fit = estimate_order(epsilons=eps, errors=0.5 * eps**2)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(0.5), abs=1e-12)
    assert fit.residual < 1e-12


def test_estimate_order_noisy(rng):
    eps = np.geomspace(0.2, 0.0125, 5)
    fit = estimate_order(epsilons=eps, errors=2 * eps * np.exp(rng.normal(0, 0.05, eps.size)))
    assert abs(fit.slope - 1) < 4 * fit.slope_stderr + 1e-12
    assert fit.residual < 0.1


def test_estimate_order_needs_three_points():
    with pytest.raises(ValueError):
        estimate_order(epsilons=[0.2, 0.1], errors=[1.0, 0.5])
    recs = [ConvergenceRecord(0.2, 0.1, 0.1, 0, 0, True), ConvergenceRecord(0.1, np.nan, np.nan, 0, 0, False),
            ConvergenceRecord(0.05, 0.02, 0.02, 0, 0, True)]
    with pytest.raises(ValueError):
        estimate_order(recs)


def test_sample_times():
    t = sample_times(0.1, 1.0, 8)
    assert t[0] == 0 and t[-1] == 1.0 and len(t) == 41
    assert np.allclose(np.diff(t), 0.025)


def test_study_config_validation():
    with pytest.raises(ValueError, match="physics.alpha"):
        StudyConfig(alpha=-1, d_av=1, M=1)
    with pytest.raises(ValueError, match="descending"):
        StudyConfig(alpha=2, d_av=1, M=1, epsilons=(0.1, 0.2))
    with pytest.raises(ValueError, match="grid"):
        StudyConfig(alpha=2, d_av=1, M=1, N=1023)


def test_hypothesis_warning():
    cfg = StudyConfig(alpha=1.5, d_av=1, M=0.2, L=25, N=256, epsilons=(0.2, 0.1, 0.05))
    with pytest.warns(UserWarning, match="alpha"):
        convergence_study(cfg, check_resolution=False)


def test_single_mode_study_has_no_averaging_error():
    cfg = StudyConfig(alpha=2, d_av=1, datum=single_mode(0.8, 4 * np.pi / 25), **SMALL)
    res = convergence_study(cfg, check_resolution=False)
    assert all(r.sup_h1_error < 1e-9 for r in res.records)


def test_study_phase_invariance():
    a = convergence_study(StudyConfig(alpha=2, d_av=1, **SMALL), check_resolution=False)
    b = convergence_study(StudyConfig(alpha=2, d_av=1, datum=gaussian(np.exp(0.9j)), **SMALL),
                          check_resolution=False)
    assert np.max(np.abs(b.errors() / a.errors() - 1)) < 1e-8
    assert np.all(np.diff(a.errors()) < 0)


def test_parallel_matches_serial():
    a = convergence_study(StudyConfig(alpha=2, d_av=1, timings=False, **SMALL), check_resolution=False)
    b = convergence_study(StudyConfig(alpha=2, d_av=1, timings=False, workers=2, **SMALL),
                          check_resolution=False)
    assert np.array_equal(a.errors(), b.errors())


def test_sup_over_subset_is_smaller():
    cfg = StudyConfig(alpha=2, d_av=1, **SMALL)
    fine = convergence_study(cfg, check_resolution=False).errors()
    coarse = convergence_study(StudyConfig(alpha=2, d_av=1, samples_per_period=2, **SMALL),
                               check_resolution=False).errors()
    assert np.all(coarse <= fine + 1e-15)


def _avg_traj(datum, eps_min, M=0.5, grid=None):
    grid = grid or make_grid(25.0, 256)
    phi = sample_initial_datum(datum, grid)
    return evolve_avg(phi, AvgStepperConfig(1.0, 2.0), M, sample_times(eps_min, M, 8))


def test_residual_single_mode_vanishes():
    traj = _avg_traj(single_mode(0.7, 2 * np.pi / 25), 0.05)
    assert oscillatory_residual(traj, 0.05, 2.0, 1.0) < 1e-10


def test_residual_decreases_and_rejects_undersampling():
    traj = _avg_traj(gaussian(), 0.05)
    vals = [oscillatory_residual(traj, e, 2.0, 1.0) for e in (0.2, 0.1, 0.05)]
    assert vals[0] > vals[1] > vals[2] > 0
    with pytest.raises(ValueError, match="under-sampled"):
        oscillatory_residual(traj, 0.02, 2.0, 1.0)


def test_residual_interpolation_converged():
    # doubling the sample rate leaves the residual essentially unchanged
    grid = make_grid(25.0, 256)
    phi = sample_initial_datum(gaussian(), grid)
    a = evolve_avg(phi, AvgStepperConfig(1.0, 2.0), 0.5, sample_times(0.1, 0.5, 8))
    b = evolve_avg(phi, AvgStepperConfig(1.0, 2.0), 0.5, sample_times(0.1, 0.5, 16))
    ta, ra = oscillatory_residual_profile(a, 0.1, 2.0, 1.0)
    tb, rb = oscillatory_residual_profile(b, 0.1, 2.0, 1.0)
    common = np.isin(np.round(tb, 10), np.round(ta, 10))
    assert np.max(np.abs(ra - rb[common])) / rb.max() < 1e-3


def test_lemma_suite_refusals():
    grid = make_grid(50.0, 1024)
    rep = lemma_bound_suite(1.5, trials=100, seed=3, grid=grid)
    assert "Q_H3" in rep.refused and "alpha >= 2" in rep.refused["Q_H3"]
    assert "lipschitz" in rep.ratios
    rep = lemma_bound_suite(0.5, trials=100, seed=3, grid=grid)
    assert "lipschitz" in rep.refused
    with pytest.raises(ValueError):
        lemma_bound_suite(2.0, trials=10)
    with pytest.raises(ValueError, match="alpha >= 2"):
        require_h3_suite(1.5)
    require_h3_suite(2.0)


def test_lemma_suite_reproducible_and_finite():
    grid = make_grid(50.0, 1024)
    a = lemma_bound_suite(2.0, trials=100, seed=5, grid=grid)
    b = lemma_bound_suite(2.0, trials=100, seed=5, grid=grid)
    assert a.ratios == b.ratios
    assert all(np.isfinite(s.maximum) and s.minimum > 0 for s in a.ratios.values())


@pytest.mark.parametrize("alpha", [2.0, 3.0, 1.5])
def test_homogeneity(alpha):
    assert homogeneity_error(alpha, make_grid(50.0, 1024)) < 1e-10


def test_uniform_bound():
    grid = make_grid(25.0, 256)
    phi = sample_initial_datum(gaussian(1e-6), grid)
    trajs = {e: evolve_dm(phi, DmStepperConfig(DispersionMap(1.0, e), 2.0), 0.5) for e in (0.1, 0.05)}
    K = float(trajs[0.1].h1_norm[0])
    rep = uniform_bound_check(trajs, K)
    assert rep.holds and rep.margin > 0
    assert np.allclose(trajs[0.05].h1_norm, K, rtol=1e-12)
    phi = sample_initial_datum(gaussian(1.0), grid)
    big = {0.1: evolve_dm(phi, DmStepperConfig(DispersionMap(1.0, 0.1), 2.0), 0.5)}
    n0 = float(big[0.1].h1_norm[0])
    rep = uniform_bound_check(big, n0 * 1.0000001)
    assert rep.holds
    with pytest.raises(ValueError):
        uniform_bound_check(big, 0.5 * n0)


def test_uniform_bound_violation():
    grid = make_grid(25.0, 256)
    phi = sample_initial_datum(gaussian(1.0), grid)
    traj = evolve_dm(phi, DmStepperConfig(DispersionMap(1.0, 0.1), 2.0), 0.5)
    traj.h1_norm = traj.h1_norm.copy()
    traj.h1_norm[3] = 10 * traj.h1_norm[0]
    rep = uniform_bound_check({0.1: traj}, float(traj.h1_norm[0]))
    assert not rep.holds
    assert rep.offending == [(0.1, float(traj.times[3]), float(traj.h1_norm[3]))]


def test_supercritical_small_amplitude_completes():
    cfg = StudyConfig(alpha=5, d_av=1, M=0.2, L=25, N=256, epsilons=(0.05,), datum=gaussian(0.1))
    rep = supercritical_exploration(cfg)
    assert rep.reference_completed and rep.contrast_completed and rep.contrast_resolved
    assert rep.rows[0].completed and rep.rows[0].relative_mismatch < 1e-6
    with pytest.raises(ValueError):
        supercritical_exploration(StudyConfig(alpha=2, d_av=1, M=0.2))
    with pytest.raises(ValueError):
        supercritical_exploration(StudyConfig(alpha=5, d_av=-1, M=0.2))
