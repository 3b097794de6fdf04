"""Exception hierarchy shared by the library and the command line tool.

Library errors fall into three buckets that the CLI maps onto process exit
codes: parameter misuse (1), malformed or inconsistent data (2), and numeric
breakdown (3). Empty collections count as data problems since they normally
originate from files; out-of-range parameter values count as usage problems.
"""


class SurprisimError(Exception):
    exit_code = 1
    kind = "error"


class UsageError(SurprisimError):
    """A parameter or flag value outside its documented domain."""

    exit_code = 1
    kind = "usage"


class DataError(SurprisimError):
    """Malformed, inconsistent, or empty input data."""

    exit_code = 2
    kind = "data"


class NumericError(SurprisimError):
    """A computation produced non-finite or degenerate values."""

    exit_code = 3
    kind = "numeric"
