"""Exception types shared across the toolkit."""


class DataError(Exception):
    """Raised for malformed or inconsistent input data (CLI exit code 2)."""


class ParseError(DataError):
    """Raised when a file cannot be parsed; message names the line."""


class NumericError(Exception):
    """Raised when a computation produces non-finite values."""
