"""Exact rank of 2x2x2 tensors and minimal decompositions."""

import logging
from collections import namedtuple

import numpy as np

from htr.core import (
    Decomposition,
    GLAction,
    SlicePair,
    det2,
    inv2,
    mode_unfolding,
    numerical_rank,
    rank_one_factors,
    scalar_to_json,
    vec2x2,
)
from htr.exceptions import ConstructionFailure, PreconditionError, SingularMatrixError
from htr.pencil import (
    delta_margin,
    find_parameter,
    pair_delta,
    slice_pair_of,
    theta,
    theta_tolerance,
)
from htr.util import RANK_ONE_RTOL, RESIDUAL_RTOL, STRATUM_RTOL, validate_field

LOGGER = logging.getLogger(__name__)

PENCIL_DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1), (1, 2))

E = np.eye(2)
S = np.array([[0.0, 1.0], [0.0, 0.0]])

CONDITION_NAMES = (
    "dependent-slices",
    "dependent-columns",
    "delta-and-theta-zero",
    "delta-generic",
)


class Rank222Report(
    namedtuple(
        "Rank222Report",
        [
            "rank",
            "field",
            "conditions",
            "delta",
            "theta",
            "span_slices",
            "span_columns",
        ],
    )
):
    """Rank of a 2x2x2 tensor together with the quantities that decided it.

    ``conditions`` holds four booleans: the slices are dependent, the
    column pairs are dependent, both Delta and Theta vanish, Delta is
    positive (real) or nonzero (complex).

    """

    __slots__ = ()

    def held(self):
        """1-based numbers of the conditions that hold."""
        return [number for number, flag in enumerate(self.conditions, 1) if flag]

    def to_dict(self):
        return {
            "rank": self.rank,
            "field": self.field,
            "conditions": dict(zip(CONDITION_NAMES, self.conditions)),
            "delta": scalar_to_json(self.delta.value),
            "delta_sign": self.delta.sign,
            "theta": scalar_to_json(self.theta),
            "span_slices": self.span_slices,
            "span_columns": self.span_columns,
        }


def _check_field(pair, field):
    validate_field(field)
    if field == "real" and pair.field == "complex":
        raise PreconditionError("Complex tensor cannot be classified over the reals")


def pencil_direction(pair):
    """Best-conditioned nonsingular element ``x A + y B`` of the slice pencil.

    :returns: Slice-mixing matrix ``[[x, y], [-y, x]]`` or ``None`` when every
        scanned direction is singular.

    """
    best, best_score = None, 0.0
    for x, y in PENCIL_DIRECTIONS:
        element = x * pair.a + y * pair.b
        scale = np.linalg.norm(element) ** 2
        if scale == 0:
            continue
        score = abs(det2(element)) / scale
        if score > best_score:
            best, best_score = (x, y), score
    if best is None or best_score <= RANK_ONE_RTOL:
        return None
    x, y = best
    LOGGER.debug("Pencil direction: (%d, %d)", x, y)
    return np.array([[x, y], [-y, x]], dtype=float)


def mixed_slices(pair, mix):
    """Slices after acting with ``mix`` on the slice mode."""
    first = mix[0, 0] * pair.a + mix[0, 1] * pair.b
    second = mix[1, 0] * pair.a + mix[1, 1] * pair.b
    return first, second


def classify(tensor, field="real"):
    """Rank of a 2x2x2 tensor over the given field.

    :param tensor: Order-3 tensor.
    :type tensor: SlicePair
    :param field: ``real`` or ``complex``.
    :type field: str
    :rtype: Rank222Report

    """
    pair = slice_pair_of(tensor)
    _check_field(pair, field)
    data = pair.data

    slices = np.column_stack([vec2x2(pair.a), vec2x2(pair.b)])
    columns = np.column_stack(
        [
            np.concatenate([pair.a[:, 0], pair.b[:, 0]]),
            np.concatenate([pair.a[:, 1], pair.b[:, 1]]),
        ]
    )
    span_slices = numerical_rank(slices)
    span_columns = numerical_rank(columns)
    delta_value = pair_delta(pair, field=field)
    if delta_value.is_zero:
        # A hyperdeterminant inside its tolerance only bounds the spans loosely
        slices_dependent = numerical_rank(slices, STRATUM_RTOL) < 2
        columns_dependent = numerical_rank(columns, STRATUM_RTOL) < 2
    else:
        slices_dependent = span_slices < 2
        columns_dependent = span_columns < 2
    theta_value = theta(pair.a, pair.b)
    theta_zero = abs(theta_value) <= theta_tolerance(pair.a, pair.b)
    conditions = (
        slices_dependent,
        columns_dependent,
        delta_value.is_zero and theta_zero,
        delta_value.sign in ("positive", "nonzero"),
    )

    if not np.any(data):
        rank = 0
    elif all(numerical_rank(mode_unfolding(data, mode)) == 1 for mode in range(3)):
        rank = 1
    elif delta_value.is_zero and not any(conditions):
        rank = 3
    elif field == "real" and delta_value.sign == "negative":
        rank = 3
    else:
        rank = 2

    return Rank222Report(
        rank, field, conditions, delta_value, theta_value, span_slices, span_columns
    )


def matrix_terms(matrix):
    """At most two exact rank-one terms of a 2x2 matrix."""
    matrix = np.asarray(matrix)
    if not np.any(matrix):
        return Decomposition([], 2)
    if numerical_rank(matrix) == 1:
        return Decomposition([rank_one_factors(matrix)], 2)
    return Decomposition.collect(
        [[matrix[:, column], np.eye(2)[column]] for column in range(2)], 2
    )


def _eigenvector(matrix, eigenvalue):
    (p, q), (r, s) = matrix
    candidates = [np.array([q, eigenvalue - p]), np.array([eigenvalue - s, r])]
    vector = max(candidates, key=lambda candidate: np.linalg.norm(candidate))
    return vector / vector[np.argmax(np.abs(vector))]


def _pencil_terms(pair, mix):
    """Two terms from the eigenvectors of ``P1^-1 P2`` (distinct eigenvalues)."""
    first, second = mixed_slices(pair, mix)
    matrix = inv2(first).dot(second)
    trace = matrix[0, 0] + matrix[1, 1]
    root = np.emath.sqrt(trace ** 2 - 4 * det2(matrix))
    eigenvalues = ((trace - root) / 2, (trace + root) / 2)
    vectors = np.column_stack([_eigenvector(matrix, value) for value in eigenvalues])
    rows = inv2(vectors)
    terms = Decomposition(
        [
            [
                first.dot(vectors[:, index]),
                rows[index],
                np.array([1, eigenvalues[index]]),
            ]
            for index in range(2)
        ],
        3,
    )
    return terms.transformed(GLAction([E, E, inv2(mix)]))


def _shared_factor_terms(pair):
    """Terms of a rank-2 tensor with one rank-one unfolding."""
    data = pair.data
    ratios = []
    for mode in range(3):
        singular_values = np.linalg.svd(mode_unfolding(data, mode), compute_uv=False)
        ratios.append(singular_values[1] / singular_values[0])
    mode = int(np.argmin(ratios))
    LOGGER.debug("Shared factor on mode %d", mode)
    factor, rest = rank_one_factors(mode_unfolding(data, mode))
    return matrix_terms(rest.reshape(2, 2)).embed(mode, factor)


def _near_stratum_terms(pair, delta_value, field):
    """Closer of the shared-factor and pencil terms when Delta is inside tolerance."""
    candidates = [_shared_factor_terms(pair)]
    mix = pencil_direction(pair)
    distinct = field == "complex" or np.real(delta_value.value) > 0
    if mix is not None and delta_value.value != 0 and distinct:
        try:
            candidates.append(_pencil_terms(pair, mix))
        except SingularMatrixError:
            LOGGER.debug("Pencil eigenvectors are numerically parallel")
    return min(candidates, key=lambda terms: terms.residual(pair))


def _peel_terms(pair, mix, rng):
    """Three real terms of a tensor with negative hyperdeterminant."""
    first, second = mixed_slices(pair, mix)
    correction = np.column_stack([first[:, 0], np.zeros(2)])
    x = find_parameter(
        lambda value: delta_margin(first, second + value * correction), rng
    )
    if x is None:
        raise ConstructionFailure("No shift makes the slice pencil diagonalizable")
    shifted = decompose222(SlicePair(first, second + x * correction), "real", rng)
    peeled = Decomposition([[first[:, 0], E[0], np.array([0.0, -x])]], 3)
    return (shifted + peeled).transformed(GLAction([E, E, inv2(mix)]))


def decompose222(tensor, field="real", rng=None):
    """Decomposition of a 2x2x2 tensor with as many terms as its rank.

    :param tensor: Order-3 tensor.
    :type tensor: SlicePair
    :param field: ``real`` or ``complex``.
    :type field: str
    :param rng: Generator for the stochastic phase of parameter searches.
    :type rng: numpy.random.Generator
    :rtype: Decomposition

    """
    pair = slice_pair_of(tensor)
    rng = rng if rng is not None else np.random.default_rng(0)
    report = classify(pair, field)

    if report.rank == 0:
        return Decomposition([], 3)
    if report.rank == 1:
        return Decomposition([rank_one_factors(pair.data)], 3)
    if report.rank == 2:
        if report.delta.is_zero:
            return _near_stratum_terms(pair, report.delta, field)
        return _pencil_terms(pair, pencil_direction(pair))
    if report.delta.is_zero:
        action, _ = canonicalize_rank3(pair, field)
        canonical = Decomposition(
            [
                [E[0], E[0], E[0]],
                [E[1], E[1], E[0]],
                [E[0], E[1], E[1]],
            ],
            3,
        )
        return canonical.transformed(action.inverse())
    return _peel_terms(pair, pencil_direction(pair), rng)


def canonicalize_rank3(tensor, field=None):
    """Action taking a rank-3 tensor with vanishing hyperdeterminant to ``(E;S)``.

    :returns: The action and the canonical slice pair.
    :rtype: tuple
    :raises PreconditionError: when the tensor is not rank 3 or its
        hyperdeterminant is negative.

    """
    pair = slice_pair_of(tensor)
    field = field or pair.field
    report = classify(pair, field)
    if report.rank != 3:
        raise PreconditionError("Tensor has rank {}, not 3".format(report.rank))
    if not report.delta.is_zero:
        raise PreconditionError(
            "Negative hyperdeterminant: no real action reaches (E;S)"
        )

    mix = pencil_direction(pair)
    if mix is None:
        raise PreconditionError("Slice pencil is identically singular")
    first, second = mixed_slices(pair, mix)
    first_inverse = inv2(first)
    matrix = first_inverse.dot(second)
    eigenvalue = (matrix[0, 0] + matrix[1, 1]) / 2
    nilpotent = matrix - eigenvalue * E
    column = int(np.argmax(np.linalg.norm(nilpotent, axis=0)))
    second_vector = np.eye(2)[column]
    basis = np.column_stack([nilpotent.dot(second_vector), second_vector])

    action = GLAction(
        [
            inv2(basis).dot(first_inverse),
            basis.T,
            np.array([[1, 0], [-eigenvalue, 1]]).dot(mix),
        ]
    )
    canonical = SlicePair(E.copy(), S.copy())
    deviation = np.linalg.norm((action.apply(pair).data - canonical.data).ravel())
    if deviation > RESIDUAL_RTOL * max(1.0, pair.norm()):
        raise ConstructionFailure(
            "Canonical form check failed with deviation {:.3g}".format(deviation)
        )
    return action, canonical
