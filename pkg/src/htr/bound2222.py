"""Constructive rank upper bounds for 2x2x2x2 tensors.

An order-4 tensor is handled as a pair of order-3 halves selected by its
third mode: ``(T11;T12)`` and ``(T21;T22)``. Each construction below
decomposes the halves (or a sheared version of them) with
:func:`htr.rank222.decompose222` and tensors the terms with a vector on the
half mode.

"""

import logging
from collections import namedtuple

import numpy as np

from htr.core import (
    ESSENTIAL_FLATTENINGS,
    Decomposition,
    GLAction,
    QuadTensor,
    SlicePair,
    as_tensor,
    det2,
    flattening_label,
    inv2,
    inverse_permutation,
    mode_unfolding,
    numerical_rank,
    rank_one_factors,
    reorder_modes,
)
from htr.exceptions import ConstructionFailure, NotRankOne, PreconditionError
from htr.pencil import delta_margin, find_parameter, pair_delta, theta_pencil
from htr.rank222 import canonicalize_rank3, classify, decompose222
from htr.util import GL_RTOL, RANK_ONE_RTOL, validate_field

LOGGER = logging.getLogger(__name__)

HALF_MODE = 2
HALF_MODES = (2, 3, 0, 1)

E = np.eye(2)
O = np.zeros((2, 2))
E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])

SPLITS = (
    (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])),
    (np.diag([0.0, 1.0]), np.diag([1.0, 0.0])),
    (np.array([[0.5, 0.5], [0.5, 0.5]]), np.array([[0.5, -0.5], [-0.5, 0.5]])),
    (np.array([[0.5, -0.5], [-0.5, 0.5]]), np.array([[0.5, 0.5], [0.5, 0.5]])),
)


class BoundResult(namedtuple("BoundResult", ["decomposition", "bound", "branch"])):
    """Decomposition with the bound it was built to meet and the construction used."""

    __slots__ = ()

    @property
    def terms(self):
        return len(self.decomposition)

    def to_dict(self):
        return {
            "terms": self.terms,
            "bound": self.bound,
            "branch": self.branch,
            "decomposition": self.decomposition.to_dict(),
        }


SliceRanks = namedtuple("SliceRanks", ["flattening", "ranks"])


def quad_of(value):
    if isinstance(value, QuadTensor):
        return value
    return QuadTensor.from_tensor(as_tensor(value, order=4))


def half_terms(pair, vector, field, rng):
    """Terms of ``pair (x) vector`` with ``vector`` on the half mode."""
    return decompose222(pair, field, rng).embed(HALF_MODE, vector)


def _rank_one_term(pair, field):
    if not np.any(pair.data):
        return None
    if classify(pair, field).rank > 1:
        raise NotRankOne("Split part is not a rank-one tensor")
    return rank_one_factors(pair.data)


def split_and_separate(first_part, second_part, other, field="real", rng=None):
    """Four terms for ``(A;B)`` with ``A = T1 + T2`` split into rank-one parts.

    Uses ``(A;B) = T1 (x) (1, -x) + T2 (x) e1 + (B + x T1) (x) e2`` for an
    ``x`` making ``B + x T1`` a rank-two tensor.

    :returns: The decomposition, or ``None`` when the schedule finds no ``x``.
    :raises NotRankOne: when a part is not rank one.

    """
    rng = rng if rng is not None else np.random.default_rng(0)
    first_vectors = _rank_one_term(first_part, field)
    second_vectors = _rank_one_term(second_part, field)

    def score(x):
        shifted = other + first_part.scaled(x)
        return delta_margin(shifted.a, shifted.b, field)

    x = find_parameter(score, rng)
    if x is None:
        return None
    vector_lists = []
    if first_vectors is not None:
        shear = np.array([1.0, -x])
        vector_lists.append(first_vectors[:2] + [shear] + first_vectors[2:])
    if second_vectors is not None:
        vector_lists.append(second_vectors[:2] + [E1] + second_vectors[2:])
    separated = Decomposition.collect(vector_lists, 4)
    return separated + half_terms(other + first_part.scaled(x), E2, field, rng)


def _is_eo(pair, scale):
    tolerance = RANK_ONE_RTOL * max(1.0, scale)
    return np.allclose(pair.a, E, rtol=0, atol=tolerance) and np.allclose(
        pair.b, O, rtol=0, atol=tolerance
    )


def decompose_eo_form(quad, field="real", rng=None):
    """At most four terms for a tensor whose first half is ``(E;O)``.

    :raises PreconditionError: when the first half is not ``(E;O)``.

    """
    quad = quad_of(quad)
    rng = rng if rng is not None else np.random.default_rng(0)
    first, second = quad.halves()
    if not _is_eo(first, quad.norm()):
        raise PreconditionError("First half is not (E;O)")

    b2 = second.b
    coefficients = (
        b2[1, 1],
        b2[0, 0],
        b2[0, 0] - b2[0, 1] - b2[1, 0] + b2[1, 1],
        b2[0, 0] + b2[0, 1] - b2[1, 0] - b2[1, 1],
    )
    threshold = RANK_ONE_RTOL * max(1.0, quad.norm())
    for index, coefficient in enumerate(coefficients):
        if abs(coefficient) <= threshold:
            continue
        split, complement = SPLITS[index]
        LOGGER.debug("Split %d selected by coefficient %s", index + 1, coefficient)
        result = split_and_separate(
            SlicePair(split, O), SlicePair(complement, O), second, field, rng
        )
        if result is not None:
            return result

    if any(abs(coefficient) > threshold for coefficient in coefficients):
        raise ConstructionFailure("No split of (E;O) separates the second half")
    # Second slice of the second half vanishes: the tensor lives on e1 of the last mode
    reduced = SlicePair(E.copy(), second.a)
    return decompose222(reduced, field, rng).embed(3, E1)


decompose_EO_form = decompose_eo_form


def _slice_mode_factor(pair):
    """``(P, w)`` with ``pair[:, :, l] = w[l] P`` when the slice mode factors out."""
    unfolding = mode_unfolding(pair.data, 2)
    if numerical_rank(unfolding) != 1:
        return None
    weights, flat = rank_one_factors(unfolding)
    matrix = flat.reshape(2, 2)
    if not abs(det2(matrix)) > GL_RTOL * np.linalg.norm(matrix) ** 2:
        return None
    return matrix, weights


def _complement_inverse(vector):
    """Matrix sending ``vector`` to ``e1``."""
    column = int(np.argmin(np.abs(vector)))
    return inv2(np.column_stack([vector, np.eye(2)[column]]))


def decompose_when_half_rank2(quad, field="real", rng=None):
    """At most four terms for a tensor whose first half has rank at most two.

    :param quad: Order-4 tensor.
    :type quad: QuadTensor
    :param field: ``real`` or ``complex``.
    :type field: str
    :param rng: Generator for the stochastic phase of parameter searches.
    :type rng: numpy.random.Generator
    :rtype: BoundResult
    :raises PreconditionError: when the first half has rank three.

    """
    quad = quad_of(quad)
    rng = rng if rng is not None else np.random.default_rng(0)
    first, second = quad.halves()
    first_report = classify(first, field)
    if first_report.rank > 2:
        raise PreconditionError("First half has rank 3")
    second_rank = classify(second, field).rank

    if first_report.rank + second_rank <= 4:
        decomposition = _direct(first, second, field, rng)
        return BoundResult(decomposition, 4, "direct")

    if not first_report.delta.is_zero:

        def score(x):
            shifted = second + first.scaled(x)
            return delta_margin(shifted.a, shifted.b, field)

        x = find_parameter(score, rng)
        if x is not None:
            shear = np.array([1.0, -x])
            decomposition = half_terms(first, shear, field, rng) + half_terms(
                second + first.scaled(x), E2, field, rng
            )
            return BoundResult(decomposition, 4, "half-rank-two")

    factor = _slice_mode_factor(first)
    if factor is not None:
        matrix, weights = factor
        action = GLAction([inv2(matrix), E, E, _complement_inverse(weights)])
        reduced = QuadTensor.from_tensor(action.apply(quad))
        decomposition = decompose_eo_form(reduced, field, rng)
        decomposition = decomposition.transformed(action.inverse())
        return BoundResult(decomposition, 4, "one-part-zero")

    parts = [
        SlicePair.from_tensor(term.data) for term in decompose222(first, field, rng)
    ]
    if len(parts) == 2:
        for first_part, second_part in (parts, parts[::-1]):
            decomposition = split_and_separate(
                first_part, second_part, second, field, rng
            )
            if decomposition is not None:
                return BoundResult(decomposition, 4, "one-way-separate")

    LOGGER.warning("No four-term construction applies, using five terms")
    decomposition = _direct(first, second, field, rng)
    return BoundResult(decomposition, len(decomposition), "degenerate-fallback")


def _direct(first, second, field, rng):
    return half_terms(first, E1, field, rng) + half_terms(second, E2, field, rng)


def _half_permutation(mode):
    others = tuple(other for other in range(4) if other != mode)
    return others[:2] + (mode,) + others[2:]


def _swap_action():
    return GLAction([E, E, SWAP, E])


def _half_candidates(quad, field, rng):
    """Results of :func:`decompose_when_half_rank2` for every admissible half choice."""
    tensor = quad.to_tensor()
    for mode in HALF_MODES:
        permutation = _half_permutation(mode)
        permuted = reorder_modes(tensor, permutation)
        for swapped in (False, True):
            candidate = _swap_action().apply(permuted) if swapped else permuted
            candidate_quad = QuadTensor.from_tensor(candidate)
            if classify(candidate_quad.halves()[0], field).rank > 2:
                continue
            try:
                result = decompose_when_half_rank2(candidate_quad, field, rng)
            except ConstructionFailure as exception:
                LOGGER.debug("Half mode %d skipped: %s", mode, exception)
                continue
            decomposition = result.decomposition
            if swapped:
                decomposition = decomposition.transformed(_swap_action())
            inverse = inverse_permutation(permutation)
            decomposition = decomposition.reorder_modes(inverse)
            yield BoundResult(decomposition, result.bound, result.branch)


def _best(results):
    best = None
    for result in results:
        if result is None:
            continue
        if best is None or result.terms < best.terms:
            best = result
    return best


def _peel(quad, field, rng):
    """Subtract one term of the rank-3 first half and bound the rest by four."""
    first, second = quad.halves()
    results = []
    for term in decompose222(first, field, rng):
        peeled = SlicePair.from_tensor(term.data)
        remainder = QuadTensor.from_halves(first - peeled, second)
        if classify(remainder.halves()[0], field).rank > 2:
            continue
        try:
            result = decompose_when_half_rank2(remainder, field, rng)
        except ConstructionFailure as exception:
            LOGGER.debug("Peeled term skipped: %s", exception)
            continue
        term_vectors = list(term.vectors)
        decomposition = result.decomposition + Decomposition(
            [term_vectors[:2] + [E1] + term_vectors[2:]], 4
        )
        results.append(decomposition)
    best = _best(BoundResult(result, 5, "peel-five") for result in results)
    if best is None:
        raise ConstructionFailure("No peeled term leaves a rank-two half")
    if best.terms > 5:
        return BoundResult(best.decomposition, best.terms, "degenerate-fallback")
    return best


def bound_real(quad, rng=None):
    """At most five real terms for a real 2x2x2x2 tensor.

    :param quad: Order-4 real tensor.
    :type quad: QuadTensor
    :rtype: BoundResult

    """
    quad = quad_of(quad)
    if quad.field == "complex":
        raise PreconditionError("bound_real needs a real tensor")
    rng = rng if rng is not None else np.random.default_rng(0)
    best = _best(_half_candidates(quad, "real", rng))
    if best is not None:
        LOGGER.debug("Branch %s with %d terms", best.branch, best.terms)
        return best
    LOGGER.debug("Every half has rank 3, peeling one term")
    return _peel(quad, "real", rng)


def bound_complex(quad, rng=None):
    """At most four complex terms for a 2x2x2x2 tensor (real input is embedded).

    :param quad: Order-4 tensor.
    :type quad: QuadTensor
    :rtype: BoundResult

    """
    quad = quad_of(quad)
    quad = QuadTensor(*(block.astype(complex) for block in quad))
    rng = rng if rng is not None else np.random.default_rng(0)
    best = _best(_half_candidates(quad, "complex", rng))
    if best is not None and best.terms <= 4:
        return best
    if best is not None:
        LOGGER.debug("Half candidates need %d terms, trying theta roots", best.terms)

    first, _ = quad.halves()
    if best is not None and classify(first, "complex").rank < 3:
        return best
    alpha, _ = canonicalize_rank3(first, "complex")
    left, right, slices = alpha.matrices
    canonical_action = GLAction([left, right, E, slices])
    canonical = QuadTensor.from_tensor(canonical_action.apply(quad))
    coefficients = theta_pencil(*canonical.halves())
    roots = sorted(np.roots(coefficients), key=abs)
    for root in roots:
        action = GLAction([left, right, np.array([[root, 1], [1, 0]]), slices])
        moved = QuadTensor.from_tensor(action.apply(quad))
        if classify(moved.halves()[0], "complex").rank > 2:
            LOGGER.debug("Theta root %s leaves a rank-3 half", root)
            continue
        result = decompose_when_half_rank2(moved, "complex", rng)
        decomposition = result.decomposition.transformed(action.inverse())
        branch = "complex-four" if result.terms <= 4 else result.branch
        return _best([BoundResult(decomposition, max(4, result.terms), branch), best])

    LOGGER.warning("Theta roots failed to lower the half rank, peeling one term")
    try:
        peeled = _peel(quad, "complex", rng)
    except ConstructionFailure:
        if best is None:
            raise
        return best
    return _best([best, peeled])


def slice_rank_profile(quad, field="real", permutations=ESSENTIAL_FLATTENINGS):
    """Ranks of ``(T11;T12), (T11;T21), (T21;T22), (T12;T22)`` per flattening.

    :param permutations: Flattenings to scan, the essential ones by default.
    :type permutations: list of tuple
    :rtype: list of SliceRanks

    """
    validate_field(field)
    tensor = quad_of(quad).to_tensor()
    rows = []
    for permutation in permutations:
        t11, t12, t21, t22 = QuadTensor.from_tensor(reorder_modes(tensor, permutation))
        pairs = (
            SlicePair(t11, t12),
            SlicePair(t11, t21),
            SlicePair(t21, t22),
            SlicePair(t12, t22),
        )
        ranks = tuple(classify(pair, field).rank for pair in pairs)
        rows.append(SliceRanks(flattening_label(permutation), ranks))
    return rows


def half_delta(quad, field="real"):
    """Hyperdeterminants of the two halves."""
    first, second = quad_of(quad).halves()
    return pair_delta(first, field), pair_delta(second, field)
