"""Numerical engine for Colombeau generalized functions.

Distributions are embedded as mollified families g_eps(x) that can be
multiplied and differentiated without restriction; results are classified
by their eps-asymptotics (moderate / negligible / non-moderate) and mapped
back to distribution theory through weak-limit pairings and association.
"""
from .errors import NumericalFailure
from .quadrature import QuadResult, integrate, integrate_decaying, integrate_pv
from .mollifier import (Mollifier, MomentMollifier, PlateauMollifier,
                        MomentEstimate, make_moment_mollifier,
                        make_ft_plateau_mollifier, mollifier_from_spec,
                        verify_moments)
from .gfcore import (Compose, Derivative, DistKind, EmbedDist, EmbedSmooth,
                     EvalConfig, GExpr, Product, Representative, Scale,
                     SmoothDirect, SmoothFn, SmoothResidual, Sum, absolute,
                     bump_dist, bump_value, delta, embed_eval, eval_expr,
                     expr_from_json, expr_to_json, gproduct, gsum, heaviside,
                     mollified_smooth, one, polynomial_dist, power_plus,
                     pv_inverse, represent, signum, smooth,
                     smooth_embedding_residual, smooth_residual, x_coordinate)
from .asymptotics import (AsymptoticReport, ClassifyConfig, EpsLadder,
                          classify, fit_exponent, sup_norm)
from .association import (ImpossibilityReport, PairingResult, TestFunction,
                          associated, default_probes, exact_identity_check_H2H,
                          h2h_identity_values, impossibility_demo, pair,
                          self_energy, self_energy_table, shadow_report)
from .config import RunConfig

__version__ = "0.1.0"

__all__ = [
    "NumericalFailure", "QuadResult", "integrate", "integrate_decaying",
    "integrate_pv", "Mollifier", "MomentMollifier", "PlateauMollifier",
    "MomentEstimate", "make_moment_mollifier", "make_ft_plateau_mollifier",
    "mollifier_from_spec", "verify_moments", "Compose", "Derivative",
    "DistKind", "EmbedDist", "EmbedSmooth", "EvalConfig", "GExpr", "Product",
    "Representative", "Scale", "SmoothDirect", "SmoothFn", "Sum", "absolute",
    "bump_dist", "bump_value", "delta", "embed_eval", "eval_expr",
    "expr_from_json", "expr_to_json", "gproduct", "gsum", "heaviside",
    "mollified_smooth", "one", "polynomial_dist", "power_plus", "pv_inverse",
    "represent", "signum", "smooth", "smooth_embedding_residual",
    "smooth_residual", "SmoothResidual", "x_coordinate",
    "AsymptoticReport", "ClassifyConfig", "EpsLadder",
    "classify", "fit_exponent", "sup_norm", "ImpossibilityReport",
    "PairingResult", "TestFunction", "associated", "default_probes",
    "exact_identity_check_H2H", "h2h_identity_values", "impossibility_demo",
    "pair", "self_energy", "self_energy_table", "shadow_report", "RunConfig",
]
