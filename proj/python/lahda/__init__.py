"""Adaptive-mesh ensemble data assimilation (Python bindings)."""

from ._lahda import (
    ConfigError,
    SolverError,
    equidistribute,
    etkf_weights,
    fd_apply,
    hessian_metric,
    interp_linear,
    local_analysis,
    localization_radii,
    nagumo_exact,
    normalize_config,
    observe,
    run_twin,
    spd_intersect,
)

__all__ = [
    "ConfigError",
    "SolverError",
    "equidistribute",
    "etkf_weights",
    "fd_apply",
    "hessian_metric",
    "interp_linear",
    "local_analysis",
    "localization_radii",
    "nagumo_exact",
    "normalize_config",
    "observe",
    "run_twin",
    "spd_intersect",
]
