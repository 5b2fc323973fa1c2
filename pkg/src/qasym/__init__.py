"""High-precision q-series, q-polynomials, their asymptotics and zeros, and
the Wronskian partition function built from Stieltjes-Wigert polynomials."""

__version__ = "0.1.0"

from .numerics import QContext, ScaledReal, StabilizationError, det, make_context, stabilize
from .partition import PartitionSpec, closed_form_limit, convergence_table, partition_exact, predicted_scaled
from .qpoly import QPolynomial, eval_poly, get_family, q_laguerre, stieltjes_wigert
from .qseries import X_jm, gauss_binomial, q_pochhammer, theta, theta_j
from .zeros import ZeroSet, find_positive_zeros, sw_zeros, symmetry_products

__all__ = [
    "PartitionSpec",
    "QContext",
    "QPolynomial",
    "ScaledReal",
    "StabilizationError",
    "X_jm",
    "ZeroSet",
    "closed_form_limit",
    "convergence_table",
    "det",
    "eval_poly",
    "find_positive_zeros",
    "gauss_binomial",
    "get_family",
    "make_context",
    "partition_exact",
    "predicted_scaled",
    "q_laguerre",
    "q_pochhammer",
    "stabilize",
    "stieltjes_wigert",
    "sw_zeros",
    "symmetry_products",
    "theta",
    "theta_j",
]
