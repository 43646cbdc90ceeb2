"""Engine exception hierarchy.

Every error carries a stable machine-readable ``code`` so the HTTP API and
CLI can map failures one-to-one without string matching.
"""

from __future__ import annotations

from typing import Optional


class EngineError(Exception):
    """Base class for all engine failures."""

    code = "EngineError"

    def __init__(self, message: str, position: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.position = position


class SyntaxParseError(EngineError):
    code = "SyntaxError"


class UnknownOperatorError(SyntaxParseError):
    code = "UnknownOperator"


class UnknownClassNameError(EngineError):
    code = "UnknownClassName"


class InliningCycleError(EngineError):
    code = "InliningCycle"


class SizeBudgetExceededError(EngineError):
    code = "SizeBudgetExceeded"


class UnknownOidError(EngineError):
    code = "UnknownOid"


class EmptyValueListError(EngineError):
    code = "EmptyValueList"


class NameClashError(EngineError):
    code = "NameClash"


class CyclicCompositeError(EngineError):
    code = "CyclicComposite"


class UnknownRelationNameError(EngineError):
    code = "UnknownRelationName"


class NotExplicitError(EngineError):
    code = "NotExplicit"


class NonNumericAggregateError(EngineError):
    code = "NonNumericAggregate"


class EvaluationDepthError(EngineError):
    code = "EvaluationDepthExceeded"


class EmptyOidSetError(EngineError):
    code = "EmptyOidSet"


class UnknownAttributeError(EngineError):
    code = "UnknownAttribute"


class EmptyUniverseError(EngineError):
    code = "EmptyUniverse"


class ConstraintValidationError(EngineError):
    """Raised when a forbidden probability-constraint pattern is detected.

    ``violations`` is a list of (type_number, description) pairs.
    """

    code = "ForbiddenConstraint"

    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(f"Type {t}: {d}" for t, d in self.violations)
        super().__init__(f"forbidden constraint set: {detail}")


class UnsatisfiableError(EngineError):
    code = "Unsatisfiable"


class InconsistentBoundsError(EngineError):
    code = "InconsistentBounds"


class IntegrityError(EngineError):
    code = "IntegrityError"


class VersionMismatchError(EngineError):
    code = "VersionMismatch"


class DocumentParseError(EngineError):
    code = "ParseError"


class StaleRevisionError(EngineError):
    code = "StaleRevision"
