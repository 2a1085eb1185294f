"""Exception hierarchy shared across the package.

Validation routines report rule violations as data (lists of messages);
exceptions are reserved for conditions a caller cannot reasonably continue
past, such as malformed wire bytes or unknown spaces.
"""

from __future__ import annotations


class DomainVecError(Exception):
    """Base class for all errors raised by this package."""


class ValueOutOfRange(DomainVecError):
    """Value does not fit the self-extending integer range."""


class Truncated(DomainVecError):
    """Byte input ended before a complete value could be read."""


class NonCanonical(DomainVecError):
    """A decoded value used more bytes than its canonical encoding."""


class ContextMissing(DomainVecError):
    """A same-as-before UL appeared with no preceding UL in the stream."""


class SchemaMismatch(DomainVecError):
    """Vector values disagree with the definition they were encoded against."""


class UnresolvedReference(DomainVecError):
    """A nested space reference could not be resolved."""


class CycleDetected(DomainVecError):
    """Nested space definitions form a reference cycle."""


class AppendOnlyViolation(DomainVecError):
    """A new definition version modifies or reorders existing components."""


class ValidationFailed(DomainVecError):
    """Definition or vector validation reported violations."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class NotFound(DomainVecError):
    """Unknown UL, space, version, or content hash."""


class Conflict(DomainVecError):
    """Operation target is not in the required state (e.g. non-empty replica)."""


class InvalidQuery(DomainVecError):
    """Search or statistics query violates the query contract."""


class NonPositiveWeight(DomainVecError):
    """Distance weights must be strictly positive."""


class NoContributingPeers(DomainVecError):
    """No peer returned usable statistics for a federated request."""


class CorruptLog(DomainVecError):
    """A store log frame failed its integrity check away from the tail."""
