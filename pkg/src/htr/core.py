"""Tensor storage, group actions and rank-one decompositions.

Every mode of every tensor has size two. Data is kept as a numpy array of
shape ``(2,) * order`` in C order, so entry ``t[i1, ..., in]`` sits at flat
offset ``sum(i_t * 2 ** (n - 1 - t))``: the first index is the most
significant one.

"""

import functools
import logging
from collections import namedtuple

import numpy as np

from htr.exceptions import (
    InvalidPermutation,
    OrderMismatch,
    PreconditionError,
    SingularMatrixError,
    TensorFileError,
)
from htr.util import GL_RTOL, RANK_ONE_RTOL, validate_field

LOGGER = logging.getLogger(__name__)

MODE_LETTERS = "ijklmnopqrstuvwxyz"

ESSENTIAL_FLATTENINGS = (
    (0, 1, 2, 3),
    (2, 1, 0, 3),
    (0, 2, 1, 3),
    (0, 3, 2, 1),
    (2, 3, 0, 1),
    (1, 3, 2, 0),
)


def field_of(*arrays):
    """Smallest field tag containing all the given arrays."""
    if any(np.iscomplexobj(array) for array in arrays):
        return "complex"
    return "real"


def as_field_array(data, field):
    """Convert data to a float or complex array according to the field tag.

    :raises PreconditionError: when a real tag is paired with nonzero imaginary parts.

    """
    try:
        validate_field(field)
    except ValueError as exception:
        raise PreconditionError(str(exception))
    array = np.array(data)
    if field == "complex":
        return array.astype(complex)
    if np.iscomplexobj(array):
        if np.any(array.imag != 0):
            raise PreconditionError("Real tensor with nonzero imaginary parts")
        array = array.real
    return array.astype(float)


def det2(matrix):
    """Determinant of a 2x2 matrix by the cofactor formula."""
    return matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]


def inv2(matrix):
    """Inverse of a 2x2 matrix by the adjugate formula."""
    determinant = det2(matrix)
    if determinant == 0:
        raise SingularMatrixError("Singular 2x2 matrix: {!r}".format(matrix))
    adjugate = np.array(
        [[matrix[1, 1], -matrix[0, 1]], [-matrix[1, 0], matrix[0, 0]]]
    )
    return adjugate / determinant


def vec2x2(matrix):
    """Column-stacking vectorization ``(x11, x21, x12, x22)``."""
    return np.asarray(matrix).ravel(order="F")


def unvec2x2(vector):
    """Inverse of :func:`vec2x2`."""
    return np.asarray(vector).reshape((2, 2), order="F")


def mode_unfolding(data, mode):
    """Unfold an array along ``mode`` into a ``2 x 2**(n-1)`` matrix."""
    return np.moveaxis(np.asarray(data), mode, 0).reshape(2, -1)


def numerical_rank(matrix, rtol=RANK_ONE_RTOL):
    """Matrix rank with singular values below ``rtol * sigma_1`` treated as zero."""
    singular_values = np.linalg.svd(np.atleast_2d(matrix), compute_uv=False)
    if singular_values.size == 0 or singular_values[0] == 0:
        return 0
    return int(np.sum(singular_values > rtol * singular_values[0]))


def rank_one_factors(data):
    """Vectors whose outer product reproduces a rank-one array.

    Factors are read off the fibres through the entry of largest modulus, so
    integer inputs give exact factors.

    """
    data = np.asarray(data)
    pivot = np.unravel_index(np.argmax(np.abs(data)), data.shape)
    pivot_value = data[pivot]
    if pivot_value == 0:
        raise PreconditionError("Zero tensor has no rank-one factors")
    vectors = []
    for mode in range(data.ndim):
        index = list(pivot)
        index[mode] = slice(None)
        fibre = data[tuple(index)]
        # Only the first fibre keeps the pivot scale
        vectors.append(fibre if mode == 0 else fibre / pivot_value)
    return vectors


class Tensor(object):
    """Dense tensor with all modes of size two.

    :param data: Nested sequence or array of shape ``(2,) * order``.
    :type data: array_like
    :param field: ``"real"`` or ``"complex"``.
    :type field: str

    """

    def __init__(self, data, field="real"):
        array = as_field_array(data, field)
        if array.ndim < 2 or array.shape != (2,) * array.ndim:
            raise PreconditionError(
                "Tensor shape must be (2, ..., 2) with order >= 2: {}".format(
                    array.shape
                )
            )
        array.setflags(write=False)
        self._data = array
        self._field = field

    @property
    def data(self):
        """Read-only numpy array of shape ``(2,) * order``."""
        return self._data

    @property
    def field(self):
        return self._field

    @property
    def order(self):
        return self._data.ndim

    def flat(self):
        """Entries in flat-offset order."""
        return self._data.ravel()

    def norm(self):
        """Frobenius norm."""
        return float(np.linalg.norm(self._data.ravel()))

    def to_complex(self):
        return Tensor(self._data, field="complex")

    @classmethod
    def from_flat(cls, values, field="real"):
        """Build a tensor from entries listed in flat-offset order.

        :raises PreconditionError: when the length is not a power of two >= 4.

        """
        values = np.asarray(values)
        length = values.size
        order = int(round(np.log2(length))) if length > 0 else 0
        if order < 2 or 2 ** order != length:
            raise PreconditionError(
                "Data length must be a power of two >= 4: {}".format(length)
            )
        return cls(values.reshape((2,) * order), field=field)

    def to_dict(self):
        """JSON-ready mapping ``{"order", "field", "data"}``."""
        return {
            "order": self.order,
            "field": self.field,
            "data": [scalar_to_json(value) for value in self.flat()],
        }

    @classmethod
    def from_dict(cls, document):
        """Read the JSON mapping produced by :meth:`to_dict`.

        :raises TensorFileError: when keys are missing or the data length is wrong.

        """
        try:
            order = int(document["order"])
            field = document.get("field", "real")
            values = [scalar_from_json(value) for value in document["data"]]
        except (KeyError, TypeError, ValueError) as exception:
            raise TensorFileError("Malformed tensor document: {}".format(exception))
        if field not in ("real", "complex"):
            raise TensorFileError("Unknown field tag: {!r}".format(field))
        if order < 2 or len(values) != 2 ** order:
            raise TensorFileError(
                "Tensor of order {} needs {} entries, got {}".format(
                    order, 2 ** order, len(values)
                )
            )
        try:
            return cls.from_flat(values, field=field)
        except PreconditionError as exception:
            raise TensorFileError(str(exception))

    def _combine(self, other, operation):
        other_data = other.data if isinstance(other, Tensor) else np.asarray(other)
        if np.shape(other_data) != self._data.shape:
            raise OrderMismatch(
                "Cannot combine shapes {} and {}".format(
                    self._data.shape, np.shape(other_data)
                )
            )
        result = operation(self._data, other_data)
        return Tensor(result, field=field_of(result))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return Tensor(-self._data, field=self.field)

    def __mul__(self, scalar):
        result = self._data * scalar
        return Tensor(result, field=field_of(result))

    __rmul__ = __mul__

    def allclose(self, other, atol=1e-12):
        other_data = other.data if isinstance(other, Tensor) else np.asarray(other)
        return np.shape(other_data) == self._data.shape and bool(
            np.allclose(self._data, other_data, rtol=0, atol=atol)
        )

    def __repr__(self):
        return "Tensor(order={}, field={!r}, data={!r})".format(
            self.order, self.field, self.flat().tolist()
        )


def scalar_to_json(value):
    """Real scalars as numbers, complex ones as ``[re, im]``."""
    if np.iscomplexobj(value):
        return [float(np.real(value)), float(np.imag(value))]
    return float(value)


def scalar_from_json(value):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("Complex scalar must be [re, im]: {!r}".format(value))
        return complex(float(value[0]), float(value[1]))
    return float(value)


def as_tensor(value, order=None):
    """Coerce a Tensor, SlicePair, QuadTensor or array into a Tensor."""
    if isinstance(value, (SlicePair, QuadTensor)):
        value = value.to_tensor()
    elif not isinstance(value, Tensor):
        array = np.asarray(value)
        value = Tensor(array, field=field_of(array))
    if order is not None and value.order != order:
        raise OrderMismatch("Expected order {}, got {}".format(order, value.order))
    return value


class SlicePair(namedtuple("SlicePair", ["a", "b"])):
    """Order-3 tensor written as its two slices ``(A;B)`` along the third mode."""

    __slots__ = ()

    def __new__(cls, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        if a.shape != (2, 2) or b.shape != (2, 2):
            raise PreconditionError("Slices must be 2x2 matrices")
        return super(SlicePair, cls).__new__(cls, a, b)

    @property
    def field(self):
        return field_of(self.a, self.b)

    @property
    def data(self):
        return np.stack([self.a, self.b], axis=-1)

    def norm(self):
        return float(np.linalg.norm(self.data.ravel()))

    def to_tensor(self, field=None):
        return Tensor(self.data, field=field or self.field)

    @classmethod
    def from_tensor(cls, tensor):
        data = as_tensor(tensor, order=3).data
        return cls(data[:, :, 0], data[:, :, 1])

    def __add__(self, other):
        return SlicePair(self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        return SlicePair(self.a - other.a, self.b - other.b)

    def scaled(self, factor):
        return SlicePair(self.a * factor, self.b * factor)


class QuadTensor(namedtuple("QuadTensor", ["t11", "t12", "t21", "t22"])):
    """Order-4 tensor as the block array ``T_kl[i, j] = t[i, j, k, l]``."""

    __slots__ = ()

    def __new__(cls, t11, t12, t21, t22):
        blocks = [np.asarray(block) for block in (t11, t12, t21, t22)]
        if any(block.shape != (2, 2) for block in blocks):
            raise PreconditionError("Blocks must be 2x2 matrices")
        return super(QuadTensor, cls).__new__(cls, *blocks)

    @property
    def field(self):
        return field_of(*self)

    @property
    def data(self):
        first = np.stack([self.t11, self.t12], axis=-1)
        second = np.stack([self.t21, self.t22], axis=-1)
        return np.stack([first, second], axis=2)

    def norm(self):
        return float(np.linalg.norm(self.data.ravel()))

    def to_tensor(self, field=None):
        return Tensor(self.data, field=field or self.field)

    @classmethod
    def from_tensor(cls, tensor):
        data = as_tensor(tensor, order=4).data
        return cls(
            data[:, :, 0, 0], data[:, :, 0, 1], data[:, :, 1, 0], data[:, :, 1, 1]
        )

    def halves(self):
        """Halves ``(T11;T12)`` and ``(T21;T22)``, selected by the third mode."""
        return SlicePair(self.t11, self.t12), SlicePair(self.t21, self.t22)

    @classmethod
    def from_halves(cls, first, second):
        return cls(first.a, first.b, second.a, second.b)


class GLAction(object):
    """Element of GL(2)^n acting mode by mode.

    :param matrices: One invertible 2x2 matrix per mode.
    :type matrices: list
    :raises SingularMatrixError: when ``|det g| <= 1e-12 * ||g||_F**2`` for some mode.

    """

    def __init__(self, matrices):
        matrices = [np.array(matrix) for matrix in matrices]
        if not matrices:
            raise PreconditionError("Action needs at least one matrix")
        for mode, matrix in enumerate(matrices):
            if matrix.shape != (2, 2):
                raise PreconditionError("Action matrices must be 2x2")
            scale = np.linalg.norm(matrix) ** 2
            if not abs(det2(matrix)) > GL_RTOL * scale:
                raise SingularMatrixError(
                    "Singular matrix for mode {}: {!r}".format(mode, matrix.tolist())
                )
            matrix.setflags(write=False)
        self.matrices = tuple(matrices)

    @property
    def order(self):
        return len(self.matrices)

    @classmethod
    def identity(cls, order):
        return cls([np.eye(2)] * order)

    def inverse(self):
        return GLAction([inv2(matrix) for matrix in self.matrices])

    def apply(self, tensor):
        tensor = as_tensor(tensor)
        if tensor.order != self.order:
            raise OrderMismatch(
                "Action of size {} on tensor of order {}".format(
                    self.order, tensor.order
                )
            )
        data = tensor.data
        for mode, matrix in enumerate(self.matrices):
            data = np.moveaxis(np.tensordot(matrix, data, axes=([1], [mode])), 0, mode)
        return Tensor(data, field=field_of(data))


def gl_action(action, tensor):
    """Apply ``action`` to ``tensor`` (multilinear, one matrix per mode)."""
    return action.apply(tensor)


class RankOneTerm(object):
    """Outer product of one length-2 vector per mode.

    :raises PreconditionError: for an empty list, a wrong length or a zero vector.

    """

    __slots__ = ("vectors",)

    def __init__(self, vectors):
        vectors = tuple(np.array(vector) for vector in vectors)
        if not vectors:
            raise PreconditionError("Rank-one term needs at least one vector")
        for vector in vectors:
            if vector.shape != (2,):
                raise PreconditionError("Vectors must have length 2")
            if not np.any(vector):
                raise PreconditionError("Rank-one term with a zero vector")
        self.vectors = vectors

    @property
    def order(self):
        return len(self.vectors)

    @property
    def data(self):
        return functools.reduce(np.multiply.outer, self.vectors)

    def to_list(self):
        return [[scalar_to_json(value) for value in vector] for vector in self.vectors]

    def __repr__(self):
        return "RankOneTerm({!r})".format([vector.tolist() for vector in self.vectors])


def rank_one(vectors):
    """Rank-one tensor ``v_1 (x) ... (x) v_n``.

    :raises PreconditionError: for fewer than two vectors or a zero vector.

    """
    vectors = list(vectors)
    if len(vectors) < 2:
        raise PreconditionError("Rank-one tensor needs at least two vectors")
    term = RankOneTerm(vectors)
    data = term.data
    return Tensor(data, field=field_of(data))


class Decomposition(object):
    """List of rank-one terms of a common order.

    :param terms: Rank-one terms (or vector lists).
    :type terms: list
    :param target_order: Order of the tensor the terms sum to.
    :type target_order: int

    """

    def __init__(self, terms, target_order):
        terms = [
            term if isinstance(term, RankOneTerm) else RankOneTerm(term)
            for term in terms
        ]
        for term in terms:
            if term.order != target_order:
                raise OrderMismatch(
                    "Term of order {} in decomposition of order {}".format(
                        term.order, target_order
                    )
                )
        self.terms = terms
        self.target_order = target_order

    @classmethod
    def collect(cls, vector_lists, target_order):
        """Build a decomposition, dropping terms that contain an exact zero vector."""
        terms = [
            vectors
            for vectors in vector_lists
            if all(np.any(np.asarray(vector)) for vector in vectors)
        ]
        return cls(terms, target_order)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other):
        if other.target_order != self.target_order:
            raise OrderMismatch("Cannot concatenate decompositions of different orders")
        return Decomposition(self.terms + other.terms, self.target_order)

    @property
    def field(self):
        return field_of(*[vector for term in self.terms for vector in term.vectors])

    def reconstruct_data(self):
        dtype = complex if self.field == "complex" else float
        data = np.zeros((2,) * self.target_order, dtype=dtype)
        for term in self.terms:
            data = data + term.data
        return data

    def reconstruct(self):
        data = self.reconstruct_data()
        return Tensor(data, field=field_of(data))

    def residual(self, tensor):
        tensor = as_tensor(tensor)
        if tensor.order != self.target_order:
            raise OrderMismatch(
                "Decomposition of order {} against tensor of order {}".format(
                    self.target_order, tensor.order
                )
            )
        return float(np.linalg.norm((self.reconstruct_data() - tensor.data).ravel()))

    def embed(self, position, vector):
        """Insert ``vector`` as a new mode at ``position`` in every term."""
        vector = np.asarray(vector)
        vector_lists = [
            term.vectors[:position] + (vector,) + term.vectors[position:]
            for term in self.terms
        ]
        return Decomposition.collect(vector_lists, self.target_order + 1)

    def transformed(self, action):
        """Decomposition of ``action`` applied to the reconstructed tensor."""
        if action.order != self.target_order:
            raise OrderMismatch("Action size does not match decomposition order")
        return Decomposition(
            [
                [
                    matrix.dot(vector)
                    for matrix, vector in zip(action.matrices, term.vectors)
                ]
                for term in self.terms
            ],
            self.target_order,
        )

    def reorder_modes(self, permutation):
        """Decomposition of the mode-permuted tensor (see :func:`reorder_modes`)."""
        permutation = validate_permutation(permutation, self.target_order)
        return Decomposition(
            [[term.vectors[mode] for mode in permutation] for term in self.terms],
            self.target_order,
        )

    def scaled(self, factor):
        """Multiply every term by ``factor`` (absorbed in its first vector)."""
        return Decomposition(
            [(term.vectors[0] * factor,) + term.vectors[1:] for term in self.terms],
            self.target_order,
        )

    def to_dict(self):
        return {
            "order": self.target_order,
            "field": self.field,
            "terms": [term.to_list() for term in self.terms],
        }

    @classmethod
    def from_dict(cls, document):
        """Read the mapping produced by :meth:`to_dict`.

        :raises TensorFileError: on malformed documents.

        """
        try:
            order = int(document["order"])
            terms = [
                [
                    np.array([scalar_from_json(value) for value in vector])
                    for vector in term
                ]
                for term in document["terms"]
            ]
            return cls(terms, order)
        except (KeyError, TypeError, ValueError) as exception:
            raise TensorFileError(
                "Malformed decomposition document: {}".format(exception)
            )


def reconstruct(decomposition):
    """Sum of the terms of ``decomposition``."""
    return decomposition.reconstruct()


def residual(decomposition, tensor):
    """Frobenius norm of ``reconstruct(decomposition) - tensor``."""
    return decomposition.residual(tensor)


def validate_permutation(permutation, order):
    permutation = tuple(int(mode) for mode in permutation)
    if sorted(permutation) != list(range(order)):
        raise InvalidPermutation(
            "Not a permutation of {} modes: {!r}".format(order, permutation)
        )
    return permutation


def inverse_permutation(permutation):
    return tuple(int(mode) for mode in np.argsort(permutation))


def reorder_modes(tensor, permutation):
    """Permute modes: output axis ``t`` is input axis ``permutation[t]``.

    :param permutation: 0-based permutation of the modes.
    :type permutation: tuple
    :raises InvalidPermutation: when ``permutation`` is not a bijection.

    """
    tensor = as_tensor(tensor)
    permutation = validate_permutation(permutation, tensor.order)
    return Tensor(np.transpose(tensor.data, permutation), field=tensor.field)


def flattening_label(permutation):
    """Index letters of a flattening, e.g. ``(2, 1, 0, 3)`` -> ``"kjil"``."""
    return "".join(MODE_LETTERS[mode] for mode in permutation)


def flattening_class(permutation):
    """Key shared by flattenings that differ only by transposes."""
    permutation = tuple(permutation)
    return (frozenset(permutation[:2]), frozenset(permutation[2:]))


def essential_flattenings():
    """The six pairwise inequivalent flattenings of an order-4 tensor."""
    return list(ESSENTIAL_FLATTENINGS)


QuadUnfolding = namedtuple("QuadUnfolding", ["matrix", "determinant"])


def quad_unfolding_matrix(quad):
    """Matrix ``(vec T11 | vec T12 | vec T21 | vec T22)`` and its determinant."""
    if not isinstance(quad, QuadTensor):
        quad = QuadTensor.from_tensor(quad)
    matrix = np.column_stack([vec2x2(block) for block in quad])
    return QuadUnfolding(matrix, np.linalg.det(matrix))
