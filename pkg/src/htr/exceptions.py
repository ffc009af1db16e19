"""Tensor rank toolkit exceptions."""


class HtrError(Exception):
    """Base class for every error raised by the toolkit."""


class PreconditionError(HtrError, ValueError):
    """An operation was called outside of its domain."""


class OrderMismatch(PreconditionError):
    """Tensor orders (or action sizes) do not agree."""


class InvalidPermutation(PreconditionError):
    """Mode permutation is not a bijection on the tensor modes."""


class SingularMatrixError(PreconditionError):
    """Matrix is singular within the working tolerance."""


class NotRankOne(PreconditionError):
    """Tensor expected to be rank one is not."""


class UnknownMethod(PreconditionError):
    """Local minimization method is not supported."""


class ConstructionFailure(HtrError):
    """Constructive search exhausted its schedule without success."""


class TensorFileError(HtrError):
    """Tensor or decomposition file cannot be read."""
