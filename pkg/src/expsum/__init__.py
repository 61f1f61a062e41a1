"""Certified zeros of exponential sums sum_k c_k e^{r_k z}."""
from .analytic import (CertificationError, QuadParams, RoucheData, StripBound, ZeroOnBoundary, count_zeros,
                       locate_zeros, omega_radius, rouche_certificate, strip_bounds, validate_certificate,
                       winding_number)
from .approx import CapExhausted, NotFound, RationalApprox, approx_schedule, kronecker_search
from .closedness import (PowersProblem, check_free_and_rotund, check_no_horizontal, check_no_vertical, check_rotund,
                         powers_problem_from_expsum)
from .core import (Basis, BasisReal, EmptyAfterMerge, ExactReal, ExpSum, ExpSumError, ProblemFormatError, Rectangle,
                   SingleTerm, ZeroCertificate, merge_terms, normalize, parse_problem)
from .pipeline import BudgetExhausted, ConstructiveParams, Trace, enumerate_zeros, solve_constructive
from .polyroots import Annulus, SparsePoly, find_one_root, find_roots, root_annulus, specialize
from .qlinalg import Step1Reduction, rational_rank, reduce_step1

__all__ = [
    "CertificationError",
    "QuadParams",
    "RoucheData",
    "StripBound",
    "ZeroOnBoundary",
    "count_zeros",
    "locate_zeros",
    "omega_radius",
    "rouche_certificate",
    "strip_bounds",
    "validate_certificate",
    "winding_number",
    "CapExhausted",
    "NotFound",
    "RationalApprox",
    "approx_schedule",
    "kronecker_search",
    "PowersProblem",
    "check_free_and_rotund",
    "check_no_horizontal",
    "check_no_vertical",
    "check_rotund",
    "powers_problem_from_expsum",
    "Basis",
    "BasisReal",
    "EmptyAfterMerge",
    "ExactReal",
    "ExpSum",
    "ExpSumError",
    "ProblemFormatError",
    "Rectangle",
    "SingleTerm",
    "ZeroCertificate",
    "merge_terms",
    "normalize",
    "parse_problem",
    "BudgetExhausted",
    "ConstructiveParams",
    "Trace",
    "enumerate_zeros",
    "solve_constructive",
    "Annulus",
    "SparsePoly",
    "find_one_root",
    "find_roots",
    "root_annulus",
    "specialize",
    "Step1Reduction",
    "rational_rank",
    "reduce_step1",
]

__version__ = "0.1.0"
