"""Exception types shared across the package."""


class PatentQAError(Exception):
    """Base class for all package errors."""


class ParseError(PatentQAError):
    """Input document is malformed. Carries a path-like location when known."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{message} (at {location})" if location else message)


class StructuralError(ParseError):
    """Parsed input violates a document invariant."""


class ConfigurationError(PatentQAError):
    """Profile, policy, template, or endpoint configuration is invalid."""


class DomainError(PatentQAError):
    """An operation was called outside its domain (empty input, empty class, ...)."""


class EvaluationError(PatentQAError):
    """Predictions and annotations cannot be evaluated together."""


class GenerationError(PatentQAError):
    """Synthetic document parameters are infeasible."""


class InjectionError(PatentQAError):
    """A defect-injection spec cannot be placed on the target document."""


class BackendUnavailableError(PatentQAError):
    """The inference endpoint stayed unreachable after all retries."""


class ProtocolError(PatentQAError):
    """The inference endpoint answered, but never with a schema-valid payload."""


class VerificationUnavailableError(PatentQAError):
    """A figure pair has no resolvable observed-numeral set (no manifest, no backend)."""


class UsageError(PatentQAError):
    """Command-line usage error."""
