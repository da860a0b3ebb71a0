"""Exception hierarchy.

Every error carries a machine-readable ``code``; the CLI maps the three
families below onto exit codes 2 (validation), 3 (solver) and 4 (protocol).
Alternative and individual indices in messages are 1-based.
"""

from __future__ import annotations


class RanklabError(Exception):
    code = "RANKLAB_ERROR"


class ValidationError(RanklabError, ValueError):
    code = "VALIDATION"


class SolverError(RanklabError, ArithmeticError):
    code = "SOLVER"


class ProtocolError(RanklabError):
    code = "PROTOCOL"


# --- profile construction -------------------------------------------------


class ComplementarityViolation(ValidationError):
    code = "COMPLEMENTARITY"

    def __init__(self, p: int, i: int, j: int, total: float):
        self.p, self.i, self.j, self.total = p, i, j, total
        super().__init__(
            f"individual {p}: a[{i},{j}] + a[{j},{i}] = {total!r}, expected exactly 1"
        )


class NonzeroDiagonal(ValidationError):
    code = "NONZERO_DIAGONAL"

    def __init__(self, p: int, i: int, value: float):
        self.p, self.i, self.value = p, i, value
        super().__init__(f"individual {p}: a[{i},{i}] = {value!r}, expected 0")


class OutOfRange(ValidationError):
    code = "OUT_OF_RANGE"

    def __init__(self, p: int, i: int, j: int, value: float):
        self.p, self.i, self.j, self.value = p, i, j, value
        super().__init__(f"individual {p}: a[{i},{j}] = {value!r} is outside [0, 1]")


class DimensionMismatch(ValidationError):
    code = "DIMENSION_MISMATCH"


class MalformedOrder(ValidationError):
    code = "MALFORMED_ORDER"


class MalformedRanks(ValidationError):
    code = "MALFORMED_RANKS"


class ElementOutOfRange(ValidationError):
    code = "ELEMENT_OUT_OF_RANGE"


class NotLinearOrderProfile(ValidationError):
    code = "NOT_LINEAR_ORDER_PROFILE"


class NotSingleRelation(ValidationError):
    code = "NOT_SINGLE_RELATION"


class InvalidWeights(ValidationError):
    code = "INVALID_WEIGHTS"


# --- implicit solvers -----------------------------------------------------


class DomainViolation(ValidationError):
    code = "DOMAIN_VIOLATION"

    def __init__(self, kind: str, i: int, value: float):
        self.kind, self.i, self.value = kind, i, value
        super().__init__(f"{kind}: score of alternative {i} = {value!r} is outside the domain")


class NotConverged(SolverError):
    code = "NOT_CONVERGED"


class SingularSystem(SolverError):
    code = "SINGULAR_SYSTEM"


class FordConditionViolated(SolverError):
    code = "FORD_CONDITION"


class PositivityLost(SolverError):
    code = "POSITIVITY_LOST"


# --- axioms, orders, extension -------------------------------------------


class CardinalityMismatch(ValidationError):
    code = "CARDINALITY_MISMATCH"


class UnsupportedAxiomForProcedure(ValidationError):
    code = "UNSUPPORTED_AXIOM"


class TooLarge(ValidationError):
    code = "TOO_LARGE"

    def __init__(self, n: int, cap: int):
        self.n, self.cap = n, cap
        super().__init__(f"exhaustive search over {n}! orders exceeds the cap n <= {cap}")


class NotParetian(ValidationError):
    code = "NOT_PARETIAN"

    def __init__(self, z, z_prime):
        self.z = tuple(float(v) for v in z)
        self.z_prime = tuple(float(v) for v in z_prime)
        super().__init__(
            f"point {self.z} has no coordinate strictly above {self.z_prime}"
        )
