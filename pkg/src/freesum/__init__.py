"""Exact moments of polynomials in freely independent variables."""

from .errors import CapacityError, SizeLimitError
from .laws import Law, from_atoms, from_moments, law_from_json, rademacher, semicircular
from .nc_core import (
    SetPartition,
    catalan,
    enumerate_nc,
    enumerate_nc_pairings,
    free_cumulants_to_moments,
    is_noncrossing,
    is_refinement,
    kernel_of,
    moments_to_free_cumulants,
)
from .word_engine import (
    FreeEvaluator,
    NCPolynomial,
    centered_insertion_check,
    polynomial_moment,
    word_moment,
)
from .homsum import (
    CoefficientTensor,
    constant_linear,
    make_family,
    mirror_counterexample,
    qn_moment,
    quadratic_star,
    sliding_window,
)
from .wigner_calc import ChaosElement, DiscreteKernel, adjoint, chaos_moment, contract, embed, fourth_moment_report, multiply
from .hyper import BlockGraph, contract_graph, enumerate_graphs, hyper_constant, hypercontractivity_check, word_bound_check

__version__ = "0.1.0"
