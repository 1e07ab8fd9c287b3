from __future__ import annotations


class BlockingCAError(ValueError):
    """Base class for every validation failure raised by the toolkit."""


class ParameterError(BlockingCAError):
    pass


class TapeFormatError(BlockingCAError):
    pass


class IllegalPositionError(BlockingCAError):
    pass


class GuardError(BlockingCAError):
    pass


class DiagramRangeError(BlockingCAError):
    """A cell outside the rows computed for a diagram was requested."""
