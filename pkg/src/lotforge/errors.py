class LotforgeError(Exception):
    """Base class for errors raised by this package."""


class InstanceFormatError(LotforgeError):
    """A JSON instance/schedule file is malformed; message names the field."""


class SizeCapError(LotforgeError):
    """A brute-force oracle refused an input above its enumeration cap."""


class RoundLimitError(LotforgeError):
    """The cutting-plane loop hit its round cap; carries the last state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class InvariantError(LotforgeError):
    """An internal guarantee failed.  Always a bug, never an input error."""
