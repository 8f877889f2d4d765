"""Affine expanded Lie point symmetries and parameter reduction.

The pipeline: parse a parametric ODE/algebraic system, build the linear
determining system of its affine expanded Lie point symmetries, solve it
exactly through random specialization with rank stabilization, sparsify the
basis with LLL, pick a generator through the Lie-bracket structure, rectify
it via a principal element, and substitute the associated hyperplane to
obtain a system with one variable fewer plus an explicit parameterization
back to the original.  Reductions are cross-checked numerically with RK4.
"""

from ._scalar import Scalar
from .canon import (
    AffineFlow,
    JordanData,
    NoPrincipalElement,
    PrincipalElement,
    char_poly,
    exp_flow,
    jordan_form,
    principal_element,
)
from .detsys import (
    AffineDerivation,
    DeterminingSystem,
    apply_derivation,
    build_determining_system,
    extract_coefficient_matrix,
)
from .liealg import BracketTable, bracket, build_bracket_table, choose_generator
from .linsolve import (
    SolveError,
    SpecializationTrace,
    SymGenerator,
    SymmetryBasis,
    SymredWarning,
    filter_spurious,
    lll_reduce,
    solve_kernel,
)
from .reducer import ReducedSystem, ReductionRejected, ReductionStep, invariantize, reduce_loop
from .sysio import (
    Expr,
    ParseError,
    PoleError,
    SymredError,
    SystemSpec,
    ZeroDenominator,
    differentiate,
    equivalent,
    evaluate,
    parse_system,
    print_expr,
    print_system,
    substitute,
)
from .verify import (
    TrajectoryCheck,
    check_reduction,
    check_symmetry_numeric,
    check_trajectory,
    integrate,
)

__version__ = "0.1.0"

__all__ = [
    "AffineDerivation",
    "AffineFlow",
    "BracketTable",
    "DeterminingSystem",
    "Expr",
    "JordanData",
    "NoPrincipalElement",
    "ParseError",
    "PoleError",
    "PrincipalElement",
    "ReducedSystem",
    "ReductionRejected",
    "ReductionStep",
    "Scalar",
    "SolveError",
    "SpecializationTrace",
    "SymGenerator",
    "SymmetryBasis",
    "SymredError",
    "SymredWarning",
    "SystemSpec",
    "TrajectoryCheck",
    "ZeroDenominator",
    "apply_derivation",
    "bracket",
    "build_bracket_table",
    "build_determining_system",
    "char_poly",
    "check_reduction",
    "check_symmetry_numeric",
    "check_trajectory",
    "choose_generator",
    "differentiate",
    "equivalent",
    "evaluate",
    "exp_flow",
    "extract_coefficient_matrix",
    "filter_spurious",
    "integrate",
    "invariantize",
    "jordan_form",
    "lll_reduce",
    "parse_system",
    "principal_element",
    "print_expr",
    "print_system",
    "reduce_loop",
    "solve_kernel",
    "substitute",
]
