"""Rank upper bounds for tensors of order four and more."""

import itertools
import logging
import math
from collections import namedtuple

import numpy as np

from htr.bound2222 import bound_complex, bound_real
from htr.core import Decomposition, SlicePair, Tensor, as_tensor, rank_one_factors
from htr.exceptions import ConstructionFailure, PreconditionError
from htr.pencil import delta, delta_margin
from htr.rank222 import decompose222, matrix_terms
from htr.util import validate_field

LOGGER = logging.getLogger(__name__)

U = np.array([1.0, 1.0])
E2 = np.array([0.0, 1.0])
INTEGER_DRAWS = 64
CONTINUOUS_DRAWS = 64
MAX_DOUBLINGS = 40


class HigherBound(
    namedtuple("HigherBound", ["decomposition", "bound", "construction"])
):
    """Decomposition meeting ``bound``, built by ``construction``."""

    __slots__ = ()

    @property
    def terms(self):
        return len(self.decomposition)

    def to_dict(self):
        return {
            "terms": self.terms,
            "bound": self.bound,
            "construction": self.construction,
            "decomposition": self.decomposition.to_dict(),
        }


def maximal_rank_lower_bound(order):
    """``ceil(2**k / (k + 1))``, below the maximal rank of order-k tensors."""
    return int(math.ceil(2 ** order / (order + 1)))


def _vector_inner(block, field, rng):
    data = block.data if isinstance(block, Tensor) else np.asarray(block)
    if not np.any(data):
        return Decomposition([], 1), 1
    return Decomposition([[data]], 1), 1


def _matrix_inner(block, field, rng):
    return matrix_terms(as_tensor(block).data), 2


def _rank222_inner(block, field, rng):
    return decompose222(SlicePair.from_tensor(block), field, rng), 3


def _bound2222_inner(block, field, rng):
    if field == "complex":
        result = bound_complex(block, rng)
    else:
        result = bound_real(block, rng)
    return result.decomposition, result.bound


def _higher_inner(block, field, rng):
    result = decompose_higher(block, field, rng)
    return result.decomposition, result.bound


def default_inner(size):
    """Inner decomposer for blocks with ``size`` leading modes."""
    inners = {
        1: _vector_inner,
        2: _matrix_inner,
        3: _rank222_inner,
        4: _bound2222_inner,
    }
    return inners.get(size, _higher_inner)


def mode_group_bound(tensor, size, inner=None, field="real", rng=None):
    """Decompose every block of the first ``size`` modes and tensor with basis vectors.

    :param tensor: Tensor of order ``n``.
    :type tensor: Tensor
    :param size: Number of leading modes per block, ``1 <= size < n``.
    :type size: int
    :param inner: Callable ``(block, field, rng) -> (Decomposition, bound)``.
    :type inner: callable
    :returns: Bound ``inner bound * 2**(n - size)``.
    :rtype: HigherBound

    """
    tensor = as_tensor(tensor)
    validate_field(field)
    order = tensor.order
    if not 1 <= size < order:
        raise PreconditionError(
            "Block size must satisfy 1 <= s < {}: {}".format(order, size)
        )
    inner = inner or default_inner(size)
    rng = rng if rng is not None else np.random.default_rng(0)

    vector_lists = []
    inner_bound = 0
    for index in itertools.product((0, 1), repeat=order - size):
        block = tensor.data[(Ellipsis,) + index]
        if size > 1:
            block = Tensor(block, field=tensor.field)
        decomposition, inner_bound = inner(block, field, rng)
        basis = [np.eye(2)[position] for position in index]
        vector_lists.extend(list(term.vectors) + basis for term in decomposition)
    bound = inner_bound * 2 ** (order - size)
    LOGGER.debug(
        "Mode grouping at s=%d: %d terms, bound %d", size, len(vector_lists), bound
    )
    return HigherBound(Decomposition(vector_lists, order), bound, "mode-group")


def _candidates(rng):
    yield (1, 0, 1, 0)
    for _ in range(INTEGER_DRAWS):
        draw = tuple(int(value) for value in rng.integers(-3, 4, size=4))
        if draw[:2] == (0, 0) or draw[2:] == (0, 0):
            continue
        yield draw
    for _ in range(CONTINUOUS_DRAWS):
        yield tuple(rng.uniform(-1, 1, size=4))


def _scale_margin(active, direction):
    """Best scale ``2**e`` of ``direction`` and the smallest margin it leaves."""
    best_gamma, best_margin = None, -np.inf
    for exponent in range(MAX_DOUBLINGS + 1):
        gamma = 2.0 ** exponent
        margin = min(
            delta_margin(pair.a, pair.b + gamma * direction) for pair in active
        )
        if margin > best_margin:
            best_gamma, best_margin = gamma, margin
    return best_gamma, best_margin


def stabilizing_rank_one(pairs, rng=None):
    """Rank-one ``C`` giving every ``(A_j; B_j + C)`` a positive hyperdeterminant.

    Pairs with ``A_j = O`` are exempt. The scale of ``C`` maximizes the
    smallest hyperdeterminant margin over the doubling schedule.

    :param pairs: Real slice pairs.
    :type pairs: list of SlicePair
    :returns: The matrix ``C``.
    :rtype: numpy.ndarray
    :raises ConstructionFailure: when no direction or scale is found.

    """
    rng = rng if rng is not None else np.random.default_rng(0)
    pairs = list(pairs)
    if any(pair.field == "complex" for pair in pairs):
        raise PreconditionError("Stabilizing correction needs real slice pairs")
    active = [pair for pair in pairs if np.any(pair.a)]

    best = None
    for s, t, u, v in _candidates(rng):
        direction = np.outer([s, t], [u, v]).astype(float)
        if not active:
            return direction
        if not all(delta(pair.a, direction).sign == "positive" for pair in active):
            continue
        gamma, margin = _scale_margin(active, direction)
        if margin > 1:
            LOGGER.debug(
                "Stabilizing direction %s at scale %s (margin %.3g)",
                direction.tolist(),
                gamma,
                margin,
            )
            return gamma * direction
        if best is None or margin > best[1]:
            best = (direction, margin)

    if best is None:
        raise ConstructionFailure("No rank-one direction is positive for every pair")
    raise ConstructionFailure(
        "No scale up to 2**{} stabilizes every pair (best margin {:.3g})".format(
            MAX_DOUBLINGS, best[1]
        )
    )


def decompose_higher(tensor, field="real", rng=None):
    """At most ``2**(k-2) + 1`` terms, or ``2**(k-2)`` over the complex numbers.

    :param tensor: Tensor of order ``k``.
    :type tensor: Tensor
    :param field: ``real`` or ``complex``.
    :type field: str
    :rtype: HigherBound

    """
    tensor = as_tensor(tensor)
    validate_field(field)
    rng = rng if rng is not None else np.random.default_rng(0)
    order = tensor.order

    if order == 2:
        return HigherBound(matrix_terms(tensor.data), 2, "direct")
    if order == 3:
        decomposition = decompose222(SlicePair.from_tensor(tensor), field, rng)
        return HigherBound(decomposition, 3, "direct")
    if field == "complex" or tensor.field == "complex":
        if order == 4:
            decomposition, bound = _bound2222_inner(tensor, "complex", rng)
            return HigherBound(decomposition, bound, "direct")
        return mode_group_bound(tensor, 4, field="complex", rng=rng)

    scale = tensor.norm()
    if scale == 0:
        return HigherBound(Decomposition([], order), 2 ** (order - 2) + 1, "stabilized")
    data = tensor.data / scale
    indices = list(itertools.product((0, 1), repeat=order - 3))
    blocks = [
        SlicePair(data[(Ellipsis, 0) + index], data[(Ellipsis, 1) + index])
        for index in indices
    ]
    correction = stabilizing_rank_one(blocks, rng)

    vector_lists = []
    for index, block in zip(indices, blocks):
        corrected = SlicePair(block.a, block.b + correction)
        basis = [np.eye(2)[position] for position in index]
        vector_lists.extend(
            list(term.vectors) + basis for term in decompose222(corrected, "real", rng)
        )
    left, right = rank_one_factors(correction)
    vector_lists.append([-left, right, E2] + [U] * (order - 3))

    decomposition = Decomposition(vector_lists, order).scaled(scale)
    return HigherBound(decomposition, 2 ** (order - 2) + 1, "stabilized")
