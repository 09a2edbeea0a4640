"""Exception hierarchy shared by every module of the package."""


class BlindAlignError(Exception):
    """Base class for all errors raised by :mod:`blindalign`."""


class InvalidArgument(BlindAlignError, ValueError):
    """An argument is out of range or inconsistent with the others."""


class InvalidMatrix(BlindAlignError, ValueError):
    """A matrix is malformed (non-finite entries, asymmetry, bad shape)."""


class DegenerateSubspace(BlindAlignError, ValueError):
    """A set of vectors that must be linearly independent is not."""


class UnsupportedConfiguration(BlindAlignError, ValueError):
    """The (M, K) pair does not admit the construction."""


class InvalidPattern(BlindAlignError, ValueError):
    """A switching pattern fails its alignment-block requirements."""


class ConstructionError(BlindAlignError, RuntimeError):
    """An internal combinatorial property that should always hold was violated."""
