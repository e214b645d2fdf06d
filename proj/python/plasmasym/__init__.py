"""Symmetry and equilibrium workbench for anisotropic plasmas."""

from ._plasmasym import (
    ConvergenceError,
    Error,
    MathError,
    State,
    ValidationError,
    determining_system,
    find_lambda,
    flux_to_cgl,
    infinite_transform,
    read_state,
    residual_norms,
    run_cli,
    solve_flux,
    two_grid_check,
    verify_generator,
    vortex,
)

__all__ = [
    "ConvergenceError",
    "Error",
    "MathError",
    "State",
    "ValidationError",
    "determining_system",
    "find_lambda",
    "flux_to_cgl",
    "infinite_transform",
    "read_state",
    "residual_norms",
    "run_cli",
    "solve_flux",
    "two_grid_check",
    "verify_generator",
    "vortex",
]
