"""Error types for the export tool; the CLI maps them to exit codes."""


class ExportError(Exception):
    """Base class for every error this package raises deliberately."""


class UsageError(ExportError):
    """Bad flags or parameter values."""


class UnavailableError(ExportError):
    """Model weights or dataset could not be retrieved."""


class DataError(ExportError):
    """An input corpus is malformed."""
