"""Exception hierarchy shared across the package.

The CLI maps these onto its stable exit codes: usage errors exit 1,
data errors exit 2, numerical failures exit 3.
"""


class EmolatentError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(EmolatentError):
    """Bad command-line arguments or configuration."""


class DataError(EmolatentError):
    """Malformed or unusable input data (files, corpora, schemas)."""


class NumericalError(EmolatentError):
    """Numerical failure such as a diverging training run."""
