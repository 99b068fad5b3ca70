"""Steady water waves over shear currents with a free surface.

The package computes stream (shear) solutions of U'' + omega(U) = 0 whose
free surface is still, checks the spectral hypotheses under which no
genuinely wavy small-amplitude state can accompany such a flow, probes
that prediction with a mapped finite-difference Newton solver for the
full free-boundary problem, and evaluates the weighted perturbation
functionals behind the smallness argument.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DepthMismatch, DivergentDepth,
                     InvalidFamilyParams, InvalidSweepCase, NewtonDiverged,
                     NonIntegrable, NoStillSolution, NotStill, OutOfDomain,
                     StepFailure, StillwaveError, SurfaceCollapse)
from .vorticity import (ConstantVorticity, LinearVorticity,
                        QuadraticTruncatedVorticity, TabulatedVorticity,
                        VorticityDistribution, make_distribution)
from .special import SingularIntegrandSpec, elliptic_F, singular_quadrature
from .stream import (CriticalSpeed, StreamProfile, StreamSolution,
                     critical_surface_speed, least_still_depth,
                     monotone_interval_lower, shear_solution, solve_cauchy,
                     still_depth_family)
from .hypotheses import HypothesisReport, check_hypotheses
from .wavesolver import (NewtonResult, ResidualNorms, StripGrid, SweepReport,
                         WaveState, bifurcation_branch, dispersion_mode,
                         dispersion_sigma, find_bifurcation_points,
                         flat_state, newton_solve, nonexistence_sweep,
                         perturbed_state, residual_fields, residual_norms)
from .diagnostics import (DiagnosticsReport, PerturbationFields,
                          bernoulli_check, default_decay_rate,
                          diagnostics_report, manufactured_fields,
                          perturbation_fields, quartic_scaling,
                          surface_quartic_weighted, trace_norm,
                          weighted_energy, windowed_norm)

__all__ = [
    "__version__",
    "StillwaveError", "InvalidFamilyParams", "StepFailure", "NotStill",
    "DivergentDepth", "NoStillSolution", "NonIntegrable", "OutOfDomain",
    "NewtonDiverged", "SurfaceCollapse", "DepthMismatch", "InvalidSweepCase",
    "ConfigError",
    "VorticityDistribution", "ConstantVorticity", "LinearVorticity",
    "QuadraticTruncatedVorticity", "TabulatedVorticity", "make_distribution",
    "SingularIntegrandSpec", "singular_quadrature", "elliptic_F",
    "StreamProfile", "StreamSolution", "CriticalSpeed", "solve_cauchy",
    "critical_surface_speed", "least_still_depth", "monotone_interval_lower",
    "still_depth_family", "shear_solution",
    "HypothesisReport", "check_hypotheses",
    "StripGrid", "WaveState", "ResidualNorms", "NewtonResult", "SweepReport",
    "flat_state", "perturbed_state", "residual_norms", "residual_fields",
    "newton_solve", "nonexistence_sweep", "dispersion_sigma",
    "dispersion_mode", "find_bifurcation_points", "bifurcation_branch",
    "PerturbationFields", "perturbation_fields", "windowed_norm",
    "weighted_energy", "surface_quartic_weighted", "trace_norm",
    "bernoulli_check", "default_decay_rate", "manufactured_fields",
    "quartic_scaling", "DiagnosticsReport", "diagnostics_report",
]
