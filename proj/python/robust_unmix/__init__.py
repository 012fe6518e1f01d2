"""Robust hyperspectral unmixing.

Matrices are bands x pixels: Y is D x N, endmembers X are D x K and
abundances W are K x N.
"""

from ._core import (
    Error,
    IoError,
    NumericalError,
    SolverConfig,
    ValidationError,
    augmented_objective,
    band_weights,
    builtin_library,
    cenmf_objective,
    cenmf_solve_from,
    correntropy_loss,
    estimate_lambda,
    evaluate_run,
    frobenius_loss,
    generate_scene,
    init_abundances,
    init_endmembers,
    load_matrix,
    match_endmembers,
    rmse,
    sad,
    save_matrix,
    unmix,
    update_sigma2,
)

METHODS = ("nmf", "l1nmf", "l12nmf", "cenmf")

__all__ = [
    "Error",
    "IoError",
    "METHODS",
    "NumericalError",
    "SolverConfig",
    "ValidationError",
    "augmented_objective",
    "band_weights",
    "builtin_library",
    "cenmf_objective",
    "cenmf_solve_from",
    "correntropy_loss",
    "estimate_lambda",
    "evaluate_run",
    "frobenius_loss",
    "generate_scene",
    "init_abundances",
    "init_endmembers",
    "load_matrix",
    "match_endmembers",
    "rmse",
    "sad",
    "save_matrix",
    "unmix",
    "update_sigma2",
]

__version__ = "0.1.0"
