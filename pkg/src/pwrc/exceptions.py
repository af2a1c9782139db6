"""Exception hierarchy shared by the library and the command line."""


class PWRCError(ValueError):
    """Base class for every error raised by this package."""


class ValidationError(PWRCError):
    """Malformed or inconsistent input (bad shapes, NaNs, unknown tokens)."""


class AlignmentError(ValidationError):
    """Subjective scores and predictions do not describe the same items."""


class TiedRanksError(ValidationError):
    """Exact ties where the strict tie policy forbids them.

    ``ids`` holds the identifiers (or positions) of the tied items.
    """

    def __init__(self, message, ids=()):
        super().__init__(message)
        self.ids = tuple(ids)


class DegenerateDataError(PWRCError):
    """Data that admits no meaningful answer, e.g. a constant score pool."""
