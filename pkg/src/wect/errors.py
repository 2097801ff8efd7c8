class ContractError(ValueError):
    """An operation was called on an input violating its precondition."""


class IncompatibleWectError(ValueError):
    """Two WECTs were sampled on different direction/filtration grids."""


class ParseError(ValueError):
    """Malformed external file. ``offset`` is the byte position of the fault."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class BadMagicError(ParseError):
    pass


class TruncatedError(ParseError):
    pass


class TrailingDataError(ParseError):
    pass


class MaxvalError(ParseError):
    pass


class PixelRangeError(ParseError):
    pass


class HeaderError(ParseError):
    pass
