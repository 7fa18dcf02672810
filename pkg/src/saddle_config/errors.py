"""Exception hierarchy.

Errors fall in two families: input errors (malformed files, invalid
combinatorics or geometry) and mathematical precondition failures
(unbalanced graph, missing rigidity, Newton divergence).  The CLI maps
the first family to exit code 1 or 2 depending on whether the problem is
syntactic, and the second to exit code 2.
"""


class SaddleConfigError(Exception):
    """Base class for all package errors."""


# --- schema / serialization -------------------------------------------------

class SchemaViolation(SaddleConfigError):
    pass


# --- invariants of the data model -------------------------------------------

class InvariantViolation(SaddleConfigError):
    """An input is well-formed but violates a structural invariant."""


class NotInvolution(InvariantViolation):
    pass


class NotTransitive(InvariantViolation):
    pass


class CoincidentVertices(InvariantViolation):
    pass


class EdgeInteriorOverlap(InvariantViolation):
    pass


class LoopEdge(InvariantViolation):
    pass


class RotationMismatch(InvariantViolation):
    """The rotation permutation disagrees with the anticlockwise order of angles."""


class EulerViolation(InvariantViolation):
    pass


class PhaseNotAntisymmetric(InvariantViolation):
    pass


class UpsilonNotPositive(InvariantViolation):
    pass


class NoClosedEdges(InvariantViolation):
    pass


class ZeroLengthEdge(InvariantViolation):
    pass


# --- mathematical preconditions ---------------------------------------------

class PreconditionError(SaddleConfigError):
    """A computation needs a property (balance, rigidity, ...) that fails."""


class NotBalanced(PreconditionError):
    pass


class NotRigid(PreconditionError):
    pass


class PhaseNotBalanced(PreconditionError):
    pass


class NewtonDivergence(PreconditionError):
    pass


class PreconditionViolated(PreconditionError):
    pass


class LeftEdgeLemmaFailure(PreconditionError):
    pass


class NotLineArrangement(PreconditionError):
    pass
