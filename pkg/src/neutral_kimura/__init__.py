"""Measure-valued solutions of the neutral Kimura equation via Gegenbauer expansions."""

from ._accel import backend_name
from .kimura import (
    ConservationReport,
    Delta,
    MeasureSolution,
    PolynomialDensity,
    SpectralCoefficients,
    Tabulated,
    asymptotic_fixation,
    asymptotic_remainder,
    conservation_report,
    extinction_probability,
    fixation_probability,
    interior_density,
    pde_residual,
    project_coefficients,
    solve,
)
from .special_functions import (
    f_closed,
    gegenbauer_eval,
    gegenbauer_shifted_eval,
    generalized_binomial,
    generating_fn_closed,
    integral_identity_const,
    integral_identity_linear,
    orthogonality_norm,
    xmoment_gen_closed,
)

__version__ = "0.1.0"
