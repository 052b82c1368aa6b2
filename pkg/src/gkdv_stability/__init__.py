"""Spectral stability of periodic traveling waves of generalized KdV near the origin."""

from .errors import *  # noqa: F401,F403
from .errors import __all__ as _error_names
from .nonlinearity import Nonlinearity, WaveParameters
from .profile import (ConservedSet, GradientSet, ProfileSamples, StepPolicy, TurningPoints,
                      conserved_quantities, find_turning_points, gradients,
                      reconstruct_profile, schaaf_check, time_of_flight)
from .monodromy import (ClosedFormM0, Monodromy, MonodromyDerivatives, closed_form_m0,
                        coefficient_matrix, evans, integrate_monodromy, monodromy_derivatives)
from .indices import (Classification, StabilityIndices, classify, compute_indices,
                      rescale_to_unit_speed, solitary_limit_report)
from .spectrum import (hill_spectrum, normal_form_roots, null_basis, real_axis_scan,
                       trace_bands)
from .validation import run_invariant_suite

__version__ = "0.1.0"

__all__ = list(_error_names) + [
    "Nonlinearity", "WaveParameters",
    "ConservedSet", "GradientSet", "ProfileSamples", "StepPolicy", "TurningPoints",
    "conserved_quantities", "find_turning_points", "gradients", "reconstruct_profile",
    "schaaf_check", "time_of_flight",
    "ClosedFormM0", "Monodromy", "MonodromyDerivatives", "closed_form_m0",
    "coefficient_matrix", "evans", "integrate_monodromy", "monodromy_derivatives",
    "Classification", "StabilityIndices", "classify", "compute_indices",
    "rescale_to_unit_speed", "solitary_limit_report",
    "hill_spectrum", "normal_form_roots", "null_basis", "real_axis_scan", "trace_bands",
    "run_invariant_suite", "__version__",
]
