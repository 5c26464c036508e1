# %% [markdown]
# # The oscillatory residual
#
# Along the averaged trajectory v(t), the difference between the fast
# nonlinearity Q(t/eps, v) and its average <Q>(v), filtered through the
# slow linear flow, is
#
#     I_eps(t) = int_0^t e^{i d_av (t-s) d_x^2} [Q(s/eps, v(s)) - <Q>(v(s))] ds.
#
# Its sup over t should vanish linearly in eps for smooth data.

# %%
import numpy as np

from dmnls.experiments import oscillatory_residual_profile, sample_times
from dmnls.integrators import AvgStepperConfig, evolve_avg
from dmnls.spectral import gaussian, make_grid, sample_initial_datum

grid = make_grid(50.0, 1024)
phi = sample_initial_datum(gaussian(), grid)
traj = evolve_avg(phi, AvgStepperConfig(1.0, 2.0), 1.0, sample_times(0.05, 1.0, 8))

prev = None
for eps in (0.2, 0.1, 0.05):
    t, r = oscillatory_residual_profile(traj, eps, 2.0, 1.0)
    line = f"eps = {eps:5.3f}: sup = {r.max():.4e} at t = {t[np.argmax(r)]:.3f}"
    if prev:
        line += f"  ratio {r.max() / prev:.3f}"
    print(line)
    prev = r.max()

# %% [markdown]
# The residual oscillates in t with period 2 eps (the integrand has mean
# zero over each period), so the sup is attained inside a period.
