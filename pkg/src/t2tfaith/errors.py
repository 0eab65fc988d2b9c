"""Exception hierarchy shared by the library and the command line front end."""


class T2TFaithError(Exception):
    """Base class for every error raised by this package."""


class ParseError(T2TFaithError, ValueError):
    """Input could not be parsed (bad JSON, unbalanced plan markup, ...)."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class ValidationError(T2TFaithError, ValueError):
    """Input parsed but violates a data invariant."""


class DegenerateInstance(T2TFaithError, ValueError):
    """Instance whose text tokenizes to nothing."""


class EmptyCorpus(T2TFaithError, ValueError):
    """Corpus-level reduction over zero instances."""


class UsageError(T2TFaithError, ValueError):
    """An operation was called with an invalid combination of arguments."""
