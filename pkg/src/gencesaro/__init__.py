"""Numerical lab for the generalized Cesaro operator on spaces of analytic functions."""

__version__ = "0.1.0"

from .analysis import (TestFamily, boundedness_scan, compactness_probe, dirichlet_divergence,
                       necessity_functionals, section_norm)
from .cesaro import OperatorSection, apply, apply_integral, matrix_section
from .dsl import WeightParameterError, WeightSyntaxError
from .kernels import averaged_kernel_eval, kernel_coeffs, kernel_eval
from .spaces import CoefficientSeries, SpaceSpec, norm, parse_space
from .weights import MomentTable, RadialWeight, classify, moment, parse_weight, scale, tail

__all__ = [
    "CoefficientSeries", "MomentTable", "OperatorSection", "RadialWeight", "SpaceSpec",
    "TestFamily", "WeightParameterError", "WeightSyntaxError", "apply", "apply_integral",
    "averaged_kernel_eval", "boundedness_scan", "classify", "compactness_probe",
    "dirichlet_divergence", "kernel_coeffs", "kernel_eval", "matrix_section", "moment",
    "necessity_functionals", "norm", "parse_space", "parse_weight", "scale", "section_norm",
    "tail",
]
