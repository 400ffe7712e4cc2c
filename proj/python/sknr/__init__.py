"""Accelerated Sinkhorn (SK-NR) solver for entropic optimal transport."""

from ._sknr import (
    IterationRecord,
    Problem,
    SolveResult,
    SpectralBasis,
    __version__,
    anneal,
    coupling,
    ctransform_of_f,
    ctransform_of_g,
    dual_value,
    gaussian_cloud,
    log_sum_exp,
    marginal_error,
    oracle_solve,
    osc_norm,
    semi_dual_gradient,
    semi_dual_hessian_quadform,
    semi_dual_value,
    solve,
    spectrum,
    sq_euclidean_cost,
    top_modes,
)

__all__ = [
    "IterationRecord",
    "Problem",
    "SolveResult",
    "SpectralBasis",
    "__version__",
    "anneal",
    "coupling",
    "ctransform_of_f",
    "ctransform_of_g",
    "dual_value",
    "gaussian_cloud",
    "log_sum_exp",
    "marginal_error",
    "oracle_solve",
    "osc_norm",
    "semi_dual_gradient",
    "semi_dual_hessian_quadform",
    "semi_dual_value",
    "solve",
    "spectrum",
    "sq_euclidean_cost",
    "top_modes",
]
