"""Fisher-KPP equation with nonlocal advection, u_t + [(K*u) u]_x = u_xx + u(1 - u).

Simulation on an expanding 1-D grid, explicit bounds (spreading speed,
L-infinity, heat-kernel envelopes, tails, plateaus) and diagnostics to check
runs against them.
"""
from ._backend import BACKEND
from .bounds import (
    INAPPLICABLE,
    BoundInputs,
    BoundReport,
    cstar,
    fp_tail,
    gamma_envelope,
    hill_lower,
    hill_uniform_upper,
    hill_upper,
    linf_bound,
    phi_max,
    plateau,
)
from .convolve import Convolver, Field, Grid, conv, conv_dx
from .diagnostics import RateFit, TimeSeries, bulk_burning, fit_rate, front, level_measures, mass
from .kernel import Kernel, KernelFacts, eval_kernel, facts, sample
from .solver import (
    BlowUpError,
    DomainLimitError,
    DriftSpec,
    InitialData,
    NumericalError,
    SimConfig,
    SimState,
    init,
    load_checkpoint,
    run,
    run_drift_diffusion,
    save_checkpoint,
    step,
)

__version__ = "0.1.0"
