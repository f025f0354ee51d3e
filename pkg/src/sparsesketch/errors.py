"""Exception types shared across the package."""


class SketchError(Exception):
    """Base class for all errors raised by sparsesketch."""


class DomainError(SketchError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConfigurationError(SketchError, ValueError):
    """Parameters violate a structural assumption of a sketch."""


class OracleSizeError(SketchError, ValueError):
    """A brute-force oracle was asked to materialize something too large."""
