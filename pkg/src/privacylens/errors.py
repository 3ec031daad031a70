"""Exception types shared across the package."""


class PrivacyLensError(Exception):
    """Base class for all package-specific errors."""


class TaxonomyError(PrivacyLensError):
    """Malformed taxonomy file or violated taxonomy invariant."""


class UnknownLabelError(PrivacyLensError):
    """A record references a category/attribute/value missing from the taxonomy."""

    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = tuple(offenders)


class ParseError(PrivacyLensError):
    """Input document failed to parse; carries a location when known."""

    def __init__(self, message, line=None, field=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.field = field


class ModelPersistenceError(PrivacyLensError):
    """Corrupt, truncated, or version-mismatched model file."""


class NotTrainedError(PrivacyLensError):
    """A model was used before fit()."""


class AmbiguousQuestionError(PrivacyLensError):
    """The question vector carries no signal (all-zero coordinates)."""
