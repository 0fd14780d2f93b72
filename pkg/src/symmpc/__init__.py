"""Explicit solutions of constrained LQ optimal control, exploiting symmetry.

The package enumerates optimal active sets of the condensed parametric QP
with a dynamic-programming sweep over the horizon.  When the problem has
linear symmetries, only one active set per symmetry orbit is tested and the
remaining pieces of the explicit solution are reconstructed afterwards.
"""

from .condense import CondensedQp, condense, subqp
from .enumeration import SolveState, brute_force, run_dp
from .errors import SymmpcError
from .lp import LpCounts, feasibility_test, optimality_test
from .ocp import OcpSpec, ValidatedOcp, load_problem, max_invariant_set, solve_dare, validate
from .polytope import Polytope
from .postprocess import ExplicitPiece, ExplicitSolution, build_solution
from .symmetry import (
    ConstraintPermutation,
    SymmetryGroup,
    SymmetryPair,
    close_group,
    constraint_permutation,
    orbit_of,
    validate_pair,
)

__version__ = "0.1.0"

__all__ = [
    "CondensedQp",
    "ConstraintPermutation",
    "ExplicitPiece",
    "ExplicitSolution",
    "LpCounts",
    "OcpSpec",
    "Polytope",
    "SolveState",
    "SymmetryGroup",
    "SymmetryPair",
    "SymmpcError",
    "ValidatedOcp",
    "brute_force",
    "build_solution",
    "close_group",
    "condense",
    "constraint_permutation",
    "feasibility_test",
    "load_problem",
    "max_invariant_set",
    "optimality_test",
    "orbit_of",
    "run_dp",
    "solve_dare",
    "subqp",
    "validate",
    "validate_pair",
]
