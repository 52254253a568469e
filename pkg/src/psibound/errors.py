"""Exception taxonomy shared across the package.

The CLI maps ``PreconditionError``/``ConfigError``/``DataFormatError`` to
exit code 1 and anything else to exit code 2.
"""


class PsiboundError(Exception):
    """Base class for package errors."""


class PreconditionError(PsiboundError):
    """An operation was called outside its contracted domain."""


class StructuralError(PsiboundError):
    """A domain object is malformed (bad piece list, bad ordering, ...)."""


class ConfigError(PsiboundError):
    """A configuration file is missing, malformed, or incomplete."""


class DataFormatError(PsiboundError):
    """An input data file violates its documented format."""


class DiagnosticError(PsiboundError):
    """A numeric routine could not reach its target accuracy."""
