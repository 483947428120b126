"""
Error classes for the relations lab.

User-facing problems subclass ValueError. A theorem that fails numerically
raises InternalInconsistency instead, which is an AssertionError: it means a
tolerance or a rank decision is wrong, not that the input was bad.
"""


class RelabError(Exception):
    """Root of every error raised by the lab. `kind` is the slug used in reports."""

    kind = 'error'


class DimensionMismatch(RelabError, ValueError):
    kind = 'dimension-mismatch'


class NotSectorial(RelabError, ValueError):
    kind = 'not-sectorial'


class NotMaximalSectorial(NotSectorial):
    kind = 'not-maximal-sectorial'


class IllDefinedForm(RelabError, ValueError):
    """The multivalued part is not orthogonal to the domain."""

    kind = 'ill-defined-form'


class NotFactorizable(RelabError, ValueError):
    """A relation fails the kernel or multivalued-part condition for recovery."""

    kind = 'not-factorizable'

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class PreconditionError(RelabError, ValueError):
    kind = 'precondition'


class AssumptionNotMet(PreconditionError):
    kind = 'assumption-not-met'


class UnsupportedSide(PreconditionError):
    kind = 'unsupported-side'


class InternalInconsistency(RelabError, AssertionError):
    """An identity that must hold did not hold within tolerance."""

    kind = 'internal-inconsistency'

    def __init__(self, message, gap=None):
        if gap is not None:
            message = f'{message} (gap {gap:.3e})'
        super().__init__(message)
        self.gap = gap


class InstanceError(RelabError, ValueError):
    """Problem with an instance file: parse error, unknown op, bad dimensions."""

    def __init__(self, message, kind='parse-error'):
        super().__init__(message)
        self.kind = kind
