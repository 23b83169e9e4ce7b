"""Averaging and stability analysis for single-mode hybrid systems."""

from ._core import (
    Error,
    NumericalError,
    SingularJacobian,
    System,
    UsageError,
    averaged_field,
    averaged_poincare_map,
    build_model,
    certify,
    check,
    default_settings,
    fixed_point,
    model_params,
    models,
    poincare_map,
    simulate_hopper,
    sweep,
    taylor_expansion,
)

__all__ = [
    "Error",
    "NumericalError",
    "SingularJacobian",
    "System",
    "UsageError",
    "averaged_field",
    "averaged_poincare_map",
    "build_model",
    "certify",
    "check",
    "default_settings",
    "fixed_point",
    "model_params",
    "models",
    "poincare_map",
    "simulate_hopper",
    "sweep",
    "taylor_expansion",
]
