"""Exception hierarchy.

Exit-code contract for the CLI: usage and IO problems map to 1, a search
stage that honestly reports "not found" maps to 2.
"""

from __future__ import annotations


class ProdfreeError(Exception):
    """Base class for all library errors."""


class GroupSpecError(ProdfreeError):
    """Malformed or unsupported group spec string."""


class DomainMismatchError(ProdfreeError):
    """Operands live in different ambient groups."""


class NotASubgroupError(ProdfreeError):
    """A claimed subgroup failed closure, identity, or inverse checks."""


class NotNormalError(ProdfreeError):
    """Subgroup is not normal, so the quotient is undefined."""


class NotSolvableError(ProdfreeError):
    """Derived series stabilised above the trivial subgroup."""


class NotEnumerableError(ProdfreeError):
    """Operation needs a finite enumeration the oracle does not have."""


class BudgetExceededError(ProdfreeError):
    """A product-set or search loop exceeded its element budget."""


class PreconditionError(ProdfreeError):
    """Caller violated a documented precondition."""


class SearchExhaustedError(ProdfreeError):
    """A bounded search finished without finding the required object.

    This is the honest "not found" outcome, not an internal failure.
    """


class InvariantViolationError(ProdfreeError):
    """A mathematically guaranteed bound failed on recomputation.

    Indicates a bug in this library, never a property of the input.
    """


class StageFailedError(SearchExhaustedError):
    """A pipeline stage failed; carries the partial certificate."""

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class CertificateError(ProdfreeError):
    """Certificate file is malformed or internally inconsistent."""


class GroupAxiomError(ProdfreeError):
    """Sampled or exhaustive group-axiom verification failed."""
