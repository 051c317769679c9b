"""Exact noncommutative calculus and random-matrix checks of spectral regularity."""

from .freetrace import SEMICIRCULAR, TraceFunctional, catalan, moments, semicircular_trace, trace_poly
from .matrix_model import (
    EmpiricalMeasure,
    MatrixTuple,
    bimodule_commutator_residual,
    empirical_measure,
    eval_poly,
    mc_moments,
)
from .nccalc import TensorPoly, diff, flip, fourier_extract, hochschild_defect, number_op, phi_t, sharp
from .ncpoly import NcPoly
from .parser import ParseError, format_poly, parse_poly
from .scalar import Scalar
from .spectral import decay_exponent, histogram, ks_distance, log_energy, max_window_mass

__version__ = "0.1.0"

__all__ = [
    "NcPoly", "Scalar", "TensorPoly", "TraceFunctional", "EmpiricalMeasure", "MatrixTuple",
    "ParseError", "SEMICIRCULAR",
    "parse_poly", "format_poly", "diff", "sharp", "flip", "number_op", "phi_t", "fourier_extract",
    "hochschild_defect", "semicircular_trace", "trace_poly", "moments", "catalan",
    "eval_poly", "empirical_measure", "mc_moments", "bimodule_commutator_residual",
    "histogram", "ks_distance", "max_window_mass", "decay_exponent", "log_energy",
]
