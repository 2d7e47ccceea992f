"""Minimum-cost fail-safe sizing and placement of linear viscous dampers.

Public surface: structural model containers and assembly (`model`),
failure-scenario enumeration (`scenarios`), time integration (`dynamics`),
the smooth drift-constraint machinery (`constraints`), adjoint gradients
(`adjoint`), the cutting-plane SLP optimizer (`optimizer`), and the
expanding working-set driver (`failsafe`). The command-line entry point
lives in `cli`.
"""

from .adjoint import AdjointState, adjoint_gradient, dg_du, fd_gradient, gradient_check
from .constraints import (
    ConstraintParams,
    ConstraintValue,
    aggregate,
    evaluate_drift_constraint,
    exact_peak,
    smooth_drift_indices,
)
from .dynamics import (
    GroundMotion,
    ResponseHistory,
    equilibrium_residual,
    load_ground_motion,
    newmark_solve,
    select_dominant_record,
    spectral_displacement,
)
from .errors import ConvergenceError, InputError
from .failsafe import (
    FailSafeConfig,
    FinalDesign,
    WorkingSetState,
    evaluate_all,
    run_failsafe,
    select_critical,
)
from .model import (
    DesignVector,
    StructuralModel,
    assemble_added_damping,
    build_rayleigh,
    compute_lowest_modes,
)
from .optimizer import (
    CuttingPlane,
    EvalCounter,
    SlpConfig,
    SlpResult,
    slp_solve,
    solve_lp,
)
from .scenarios import FailureScenario, ScenarioSet, enumerate_scenarios, no_failure

__version__ = "0.1.0"

__all__ = [
    "AdjointState",
    "ConstraintParams",
    "ConstraintValue",
    "ConvergenceError",
    "CuttingPlane",
    "DesignVector",
    "EvalCounter",
    "FailSafeConfig",
    "FailureScenario",
    "FinalDesign",
    "GroundMotion",
    "InputError",
    "ResponseHistory",
    "ScenarioSet",
    "SlpConfig",
    "SlpResult",
    "StructuralModel",
    "WorkingSetState",
    "adjoint_gradient",
    "aggregate",
    "assemble_added_damping",
    "build_rayleigh",
    "compute_lowest_modes",
    "dg_du",
    "enumerate_scenarios",
    "equilibrium_residual",
    "evaluate_all",
    "evaluate_drift_constraint",
    "exact_peak",
    "fd_gradient",
    "gradient_check",
    "load_ground_motion",
    "newmark_solve",
    "no_failure",
    "run_failsafe",
    "select_critical",
    "select_dominant_record",
    "slp_solve",
    "smooth_drift_indices",
    "solve_lp",
    "spectral_displacement",
]
