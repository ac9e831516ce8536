"""Error taxonomy shared by every module and mapped to CLI exit codes."""


class AsriError(Exception):
    """Base class; carries the process exit code for the CLI layer."""

    exit_code = 1


class UsageError(AsriError):
    """Bad arguments, unknown analysis names, malformed invocations."""

    exit_code = 2


class DataError(AsriError):
    """Missing series, malformed files, schema violations, conflicting records."""

    exit_code = 3


class NumericalError(AsriError):
    """Degenerate variance, singular matrices, divergent or infeasible fits."""

    exit_code = 4
