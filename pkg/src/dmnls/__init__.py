"""Dispersion-managed NLS and its averaged equation on a periodic grid."""

__version__ = "0.1.0"

from .dispersion import D, DispersionMap, breakpoints_in, d0, integrated_dispersion
from .integrators import (
    AvgStepperConfig,
    BlowUpError,
    DmStepperConfig,
    Trajectory,
    avg_step,
    dm_step,
    evolve_avg,
    evolve_dm,
    from_averaging_frame,
    to_averaging_frame,
)
from .nonlinearity import Q, avg_Q, cumulative_Q, make_quadrature, power_nl
from .spectral import (
    ComplexField,
    ResolutionError,
    SpatialGrid,
    free_propagate,
    gaussian,
    make_grid,
    mass,
    sample_initial_datum,
    sech,
    single_mode,
    sobolev_norm,
)
