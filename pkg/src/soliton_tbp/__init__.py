"""Multi-soliton pulse synthesis and time-bandwidth product analysis.

Builds N-soliton pulses from a discrete nonlinear spectrum, verifies them by
forward scattering and split-step propagation, measures duration/bandwidth
under modulation- and link-aware definitions, optimizes the time-bandwidth
product per eigenvalue by exhaustive search, and evaluates the closed-form
asymptotic estimates and bound curves.
"""

from .darboux import SampledSignal, TimeGrid, auto_grid, synthesize
from .errors import (
    AliasingWarning,
    DegenerateRootError,
    DegenerateSpectrumError,
    GridTooNarrowWarning,
    MeasurementUnreliableError,
    SolitonError,
    SolitonWarning,
    SpectrumFileError,
)
from .metrics import MeasureConfig, TBReport, measure, t_hat_b_hat, t_max_b_max
from .propagation import PropagationPlan, propagate
from .spectrum import (
    DiscreteSpectrum,
    Eigenvalue,
    PhysicalScaling,
    SpectralAmplitude,
    delta_t,
    denormalize,
    eta_of,
    evolve,
    qd_init,
    qd_value,
    transform,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
