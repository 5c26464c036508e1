# %% [markdown]
# # Above the critical power
#
# Without management, focusing NLS with alpha >= 4 can collapse. With
# management and d_av > 0 the averaged equation is better behaved, and the
# managed solution follows it. Here alpha = 5 and eps = 0.01.

# %%
from dmnls.experiments import StudyConfig, supercritical_exploration
from dmnls.spectral import gaussian

for amplitude in (1.0, 1.5):
    cfg = StudyConfig(alpha=5.0, d_av=1.0, M=1.0, epsilons=(0.01,), datum=gaussian(amplitude))
    rep = supercritical_exploration(cfg)
    row = rep.rows[0]
    print(f"amplitude {amplitude}:")
    print(f"  managed   completed={row.completed} max H1 {row.max_h1:.3f} terminal {row.terminal_h1:.5f}")
    print(f"  averaged  terminal {row.reference_terminal_h1:.5f}  mismatch {row.relative_mismatch:.1e}")
    print(f"  constant dispersion: completed={rep.contrast_completed} max H1 {rep.contrast_max_h1:.3f} "
          f"spectral tail {rep.contrast_tail:.1e} ({'resolved' if rep.contrast_resolved else 'NOT resolved'})")

# %% [markdown]
# At amplitude 1.5 the unmanaged run focuses until the grid can no longer
# represent it (large spectral tail), while the managed and averaged runs
# stay smooth and agree. On a fixed grid a collapse shows up as lost
# resolution long before an H^1 cap could trip, which is why the tail is
# reported.
