"""Hyperdeterminant, Theta form and pencil polynomials of 2x2x2 tensors."""

import logging
from collections import namedtuple

import numpy as np

from htr.core import (
    ESSENTIAL_FLATTENINGS,
    QuadTensor,
    SlicePair,
    det2,
    field_of,
    flattening_label,
    reorder_modes,
)
from htr.util import DELTA_RTOL, GL_RTOL, STRATUM_RTOL

LOGGER = logging.getLogger(__name__)

INTERPOLATION_NODES = np.arange(-2.0, 3.0)
DOUBLING_EXPONENTS = range(21)
RANDOM_DRAWS = 64


class DeltaValue(namedtuple("DeltaValue", ["value", "sign", "tolerance"])):
    """Hyperdeterminant value with its tolerance-based sign.

    ``sign`` is one of ``negative``, ``zero``, ``positive`` for real input
    and one of ``zero``, ``nonzero`` for complex input.

    """

    __slots__ = ()

    @property
    def is_zero(self):
        return self.sign == "zero"


class PencilPoly(namedtuple("PencilPoly", ["coefficients"])):
    """Polynomial of degree at most four, coefficients in increasing degree."""

    __slots__ = ()

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coefficients)

    @property
    def leading(self):
        return self.coefficients[-1]

    def to_list(self):
        return [
            [float(c.real), float(c.imag)] if np.iscomplexobj(c) else float(c)
            for c in self.coefficients
        ]


DeltaProfile = namedtuple(
    "DeltaProfile",
    [
        "flattening",
        "redundant",
        "delta_ab",
        "delta_cd",
        "delta_ac",
        "delta_bd",
        "pencil_ab_cd",
        "pencil_ac_bd",
    ],
)


def _norm(matrix):
    return float(np.linalg.norm(matrix))


def delta_tolerance(a, b):
    """Quartic tolerance ``1e-9 * (||A|| + ||B||)**4``."""
    return DELTA_RTOL * (_norm(a) + _norm(b)) ** 4


def theta_tolerance(a, b):
    """Quadratic tolerance, loose enough for tensors within ``delta_tolerance``."""
    return STRATUM_RTOL * (_norm(a) + _norm(b)) ** 2


def delta_raw(a, b):
    """Hyperdeterminant ``(det(A+B) - det(A-B))**2 / 4 - 4 det(A) det(B)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    return (det2(a + b) - det2(a - b)) ** 2 / 4 - 4 * det2(a) * det2(b)


def delta_columns(a, b):
    """Column form ``(|a1,b2| + |b1,a2|)**2 - 4 |a1,a2| |b1,b2|``."""
    a = np.asarray(a)
    b = np.asarray(b)

    def bracket(u, v):
        return u[0] * v[1] - u[1] * v[0]

    a1, a2 = a[:, 0], a[:, 1]
    b1, b2 = b[:, 0], b[:, 1]
    return (bracket(a1, b2) + bracket(b1, a2)) ** 2 - 4 * bracket(a1, a2) * bracket(
        b1, b2
    )


def delta(a, b, field=None):
    """Hyperdeterminant of the slice pair ``(A;B)``.

    :param a: First slice.
    :type a: numpy.ndarray
    :param b: Second slice.
    :type b: numpy.ndarray
    :param field: Field used for the sign classification, inferred when omitted.
    :type field: str
    :returns: Value, sign and tolerance.
    :rtype: DeltaValue

    """
    a = np.asarray(a)
    b = np.asarray(b)
    field = field or field_of(a, b)
    value = delta_raw(a, b)
    tolerance = delta_tolerance(a, b)
    if abs(value) <= tolerance:
        sign = "zero"
    elif field == "complex":
        sign = "nonzero"
    else:
        value = float(np.real(value))
        sign = "positive" if value > 0 else "negative"
    return DeltaValue(value, sign, tolerance)


def pair_delta(pair, field=None):
    """:func:`delta` of a :class:`SlicePair`."""
    return delta(pair.a, pair.b, field=field)


def theta(a, b):
    """Bilinear form ``|a1,b1| + |a2,b2|`` on the columns of ``A`` and ``B``."""
    a = np.asarray(a)
    b = np.asarray(b)
    first = a[0, 0] * b[1, 0] - a[1, 0] * b[0, 0]
    second = a[0, 1] * b[1, 1] - a[1, 1] * b[0, 1]
    return first + second


def dot(a, b):
    """Polarized determinant ``det(A+B) - det(A) - det(B)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    return det2(a + b) - det2(a) - det2(b)


def is_nonsingular_pair(a, b, field="real"):
    """Check whether ``det(A) x**2 - (A.B) x + det(B)`` has no root in the field.

    Over the complex numbers the quadratic always has a root.

    """
    if field == "complex":
        return False
    a = np.asarray(a)
    b = np.asarray(b)
    if np.iscomplexobj(a) or np.iscomplexobj(b):
        return False
    if not abs(det2(a)) > GL_RTOL * _norm(a) ** 2:
        return False
    return delta(a, b, field="real").sign == "negative"


def delta_pencil_poly(a, b, c, d):
    """Coefficients of ``x -> Delta(A + xC; B + xD)``.

    Obtained by interpolation at ``x = -2, ..., 2``, which is exact for the
    quartic.

    """
    a, b, c, d = (np.asarray(matrix) for matrix in (a, b, c, d))
    values = np.array([delta_raw(a + x * c, b + x * d) for x in INTERPOLATION_NODES])
    vandermonde = np.vander(INTERPOLATION_NODES, 5, increasing=True)
    coefficients = np.linalg.solve(vandermonde, values)
    return PencilPoly(coefficients)


def theta_pencil(first, second):
    """Coefficients, highest degree first, of ``x -> Theta(x first + second)``."""
    return np.array(
        [
            theta(first.a, first.b),
            theta(first.a, second.b) + theta(second.a, first.b),
            theta(second.a, second.b),
        ]
    )


def delta_margin(a, b, field="real"):
    """Hyperdeterminant measured in units of its tolerance.

    Real input keeps the sign, complex input uses the modulus.

    """
    value = delta_raw(a, b)
    tolerance = delta_tolerance(a, b)
    if tolerance == 0:
        return 0.0
    if field == "complex":
        return float(abs(value) / tolerance)
    return float(np.real(value) / tolerance)


def search_schedule(rng):
    """Parameters tried by the constructive searches.

    ``0``, then ``+-2**e`` for ``e = 0..20``, then random draws from ``rng``.

    """
    yield 0.0
    for exponent in DOUBLING_EXPONENTS:
        yield float(2 ** exponent)
        yield float(-(2 ** exponent))
    for _ in range(RANDOM_DRAWS):
        yield float(rng.uniform(-1, 1) * 2 ** int(rng.integers(0, 21)))


def find_parameter(score, rng):
    """Search the schedule for a parameter with ``score(x) > 1``.

    The deterministic part is scanned completely and the best score wins
    (earliest on ties); random draws are only used when it fails.

    :param score: Callable mapping a parameter to a margin.
    :type score: callable
    :param rng: Generator for the stochastic phase.
    :type rng: numpy.random.Generator
    :returns: The parameter found or ``None``.

    """
    schedule = search_schedule(rng)
    deterministic_count = 1 + 2 * len(DOUBLING_EXPONENTS)
    best_x, best_score = None, 1.0
    for _ in range(deterministic_count):
        x = next(schedule)
        current = score(x)
        if current > best_score:
            best_x, best_score = x, current
    if best_x is not None:
        LOGGER.debug("Parameter found: x=%s (margin %.3g)", best_x, best_score)
        return best_x

    LOGGER.warning("Deterministic schedule failed, trying random draws")
    for x in schedule:
        if score(x) > 1:
            LOGGER.debug("Parameter found by random draw: x=%s", x)
            return x
    return None


def delta_profile(quad, permutation=(0, 1, 2, 3)):
    """Hyperdeterminants of the slice pairs of a flattening.

    :param quad: Order-4 tensor.
    :type quad: QuadTensor
    :param permutation: Flattening, 0-based.
    :type permutation: tuple
    :rtype: DeltaProfile

    """
    flattened = QuadTensor.from_tensor(reorder_modes(quad, permutation))
    a, b, c, d = flattened
    permutation = tuple(permutation)
    return DeltaProfile(
        flattening=flattening_label(permutation),
        redundant=permutation not in ESSENTIAL_FLATTENINGS,
        delta_ab=delta(a, b),
        delta_cd=delta(c, d),
        delta_ac=delta(a, c),
        delta_bd=delta(b, d),
        pencil_ab_cd=delta_pencil_poly(a, b, c, d),
        pencil_ac_bd=delta_pencil_poly(a, c, b, d),
    )


def three_parameter_delta(quad, x, y, z):
    """Point evaluation of ``Delta(A + xB + z(C + xD); yA + B + z(yC + D))``."""
    if not isinstance(quad, QuadTensor):
        quad = QuadTensor.from_tensor(quad)
    a, b, c, d = quad
    first = a + x * b + z * (c + x * d)
    second = y * a + b + z * (y * c + d)
    return delta_raw(first, second)


def slice_pair_of(value):
    """Coerce a SlicePair, order-3 Tensor or array into a SlicePair."""
    if isinstance(value, SlicePair):
        return value
    return SlicePair.from_tensor(value)
