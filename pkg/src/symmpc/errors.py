"""Exception hierarchy.

Two broad families matter for the command line tool: problem data that
violates a documented requirement (exit code 3) and numerical routines
that failed to produce a trustworthy answer (exit code 4).
"""


class SymmpcError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SymmpcError):
    """Input data violates a documented requirement."""


class NumericalError(SymmpcError):
    """A numerical routine did not produce a trustworthy result."""


# -- polytopes ---------------------------------------------------------------

class NonPositiveOffset(ValidationError):
    """Offset normalisation needs the origin strictly inside the set."""


class EmptyPolytope(ValidationError):
    """Operation requires a nonempty set."""


class SingularMap(ValidationError):
    """Linear map must be invertible."""


class LpFailure(NumericalError):
    """An auxiliary linear program could not be solved."""


# -- problem validation ------------------------------------------------------

class BadWeights(ValidationError):
    """Cost matrices fail symmetry or definiteness requirements."""


class NotStabilizable(ValidationError):
    """(A, B) has an uncontrollable mode on or outside the unit circle."""


class NotDetectable(ValidationError):
    """(Q^1/2, A) has an unobservable mode on or outside the unit circle."""


class DegenerateConstraintSet(ValidationError):
    """Constraint set is unbounded, lower dimensional, or excludes the origin."""


class NoConvergence(NumericalError):
    """Fixed-point iteration for the terminal cost did not converge."""


class NoFiniteDetermination(NumericalError):
    """Invariant set iteration hit its iteration cap."""


# -- condensation ------------------------------------------------------------

class BadHorizon(ValidationError):
    """Horizon must be a positive integer."""


class CondenseFailure(NumericalError):
    """Condensed matrices are numerically unusable."""


# -- symmetries --------------------------------------------------------------

class NotASymmetry(ValidationError):
    """Candidate matrix pair does not leave the problem invariant."""


class GroupTooLarge(ValidationError):
    """Group closure exceeded the element cap."""


class NoMatch(NumericalError):
    """No constraint row matches under the symmetry; upstream data is wrong."""


# -- enumeration -------------------------------------------------------------

class IndexOverflow(ValidationError):
    """Shifted constraint index exceeds the constraint count."""


class TooLarge(ValidationError):
    """Exhaustive enumeration was asked for an infeasibly large powerset."""


class NumericalFailure(NumericalError):
    """LP backend reported failure or an impossible status."""


# -- post-processing ---------------------------------------------------------

class SingularKkt(NumericalError):
    """Active-set KKT system is singular; the active set was not filtered."""


# -- reporting ---------------------------------------------------------------

class NotPlanar(ValidationError):
    """Partition plots are only defined for two state dimensions."""
