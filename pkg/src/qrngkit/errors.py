"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific one that applies rather than bare ValueError.
"""


class UsageError(ValueError):
    """Caller passed arguments that violate an operation's contract."""


class ResourceBudgetError(RuntimeError):
    """Requested computation exceeds the configured enumeration budget."""


class InputFormatError(ValueError):
    """An input file or stream is malformed."""
