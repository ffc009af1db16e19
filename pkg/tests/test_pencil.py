"""Hyperdeterminant and pencil polynomial test cases."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from htr.core import GLAction, SlicePair, Tensor, det2
from htr.pencil import (
    delta,
    delta_columns,
    delta_margin,
    delta_pencil_poly,
    delta_profile,
    delta_raw,
    dot,
    find_parameter,
    is_nonsingular_pair,
    search_schedule,
    theta,
    theta_pencil,
    three_parameter_delta,
)
from htr.sampling import E, R, S, example_tensor_x

matrices = arrays(np.float64, (2, 2), elements=st.floats(-10, 10, allow_nan=False))


class TestDelta(object):
    """Hyperdeterminant test cases."""

    @pytest.mark.parametrize(
        "a, b, value, sign",
        [
            (E, S, 0, "zero"),
            (E, R, -4, "negative"),
            (E, np.diag([1, 2]), 1, "positive"),
            (np.zeros((2, 2)), np.zeros((2, 2)), 0, "zero"),
        ],
    )
    def test_known_values(self, a, b, value, sign):
        """Hyperdeterminant of the reference slice pairs."""
        result = delta(a, b)
        assert result.value == value
        assert result.sign == sign

    def test_complex_sign(self):
        """Complex input only distinguishes zero from nonzero."""
        assert delta(E, R, field="complex").sign == "nonzero"
        assert delta(E.astype(complex), S).sign == "zero"

    @given(matrices, matrices)
    @settings(max_examples=100, deadline=None)
    def test_column_form(self, a, b):
        """Determinant form and column form agree."""
        scale = (np.linalg.norm(a) + np.linalg.norm(b)) ** 4
        assert abs(delta_raw(a, b) - delta_columns(a, b)) <= 1e-9 * max(1.0, scale)

    @given(matrices, matrices)
    @settings(max_examples=100, deadline=None)
    def test_swap_symmetry(self, a, b):
        """Swapping the slices keeps the hyperdeterminant."""
        scale = (np.linalg.norm(a) + np.linalg.norm(b)) ** 4
        assert abs(delta_raw(a, b) - delta_raw(b, a)) <= 1e-9 * max(1.0, scale)

    def test_transformation_law(self, rng):
        """Acting with (P, Q, R) multiplies Delta by their squared determinants."""
        for _ in range(1000):
            matrices = rng.standard_normal((3, 2, 2))
            tensor = Tensor(rng.standard_normal((2, 2, 2)))
            moved = SlicePair.from_tensor(GLAction(matrices).apply(tensor))
            pair = SlicePair.from_tensor(tensor)
            factor = np.prod([det2(matrix) ** 2 for matrix in matrices])
            scale = (
                np.prod([np.linalg.norm(matrix) for matrix in matrices])
                * tensor.norm()
            ) ** 4
            expected = delta_raw(pair.a, pair.b) * factor
            difference = delta_raw(moved.a, moved.b) - expected
            assert abs(difference) <= 1e-8 * max(1.0, scale)

    def test_margin(self):
        """Margin keeps the sign for real input."""
        assert delta_margin(E, R) < -1
        assert delta_margin(E, np.diag([1.0, 2.0])) > 1
        assert delta_margin(np.zeros((2, 2)), np.zeros((2, 2))) == 0.0


class TestTheta(object):
    """Theta and dot form test cases."""

    @pytest.mark.parametrize(
        "a, b, expected", [(E, S, -1), (E, R, -2), (R, R, 0), (S, S, 0)]
    )
    def test_known_values(self, a, b, expected):
        """Theta of the reference slice pairs."""
        assert theta(a, b) == expected

    def test_dot(self):
        """Polarized determinant."""
        assert dot(E, E) == 2
        assert dot(E, S) == 0

    def test_theta_pencil(self):
        """Coefficients are listed highest degree first."""
        first = SlicePair(E, R)
        second = SlicePair(np.diag([1.0, 3.0]), S)
        coefficients = theta_pencil(first, second)
        for x in (-1.5, 0.0, 2.0):
            mixed = first.scaled(x) + second
            expected = theta(mixed.a, mixed.b)
            assert np.polyval(coefficients, x) == pytest.approx(expected)


class TestNonsingularPair(object):
    """Nonsingular pair test cases."""

    @pytest.mark.parametrize(
        "a, b, expected",
        [(E, R, True), (E, S, False), (E, np.diag([1, 2]), False), (S, R, False)],
    )
    def test_known_pairs(self, a, b, expected):
        """Reference pairs."""
        assert is_nonsingular_pair(a, b) is expected

    def test_complex_never_nonsingular(self):
        """Every complex quadratic has a root."""
        assert not is_nonsingular_pair(E, R, field="complex")

    def test_quadratic_discriminant(self, rng):
        """Nonsingular exactly when the determinant quadratic has no real root."""
        for _ in range(1000):
            a, b = rng.standard_normal((2, 2, 2))
            discriminant = dot(a, b) ** 2 - 4 * det2(a) * det2(b)
            assert is_nonsingular_pair(a, b) == (discriminant < 0)
            assert is_nonsingular_pair(a, b) == (delta(a, b).sign == "negative")


class TestPencilPoly(object):
    """Pencil polynomial test cases."""

    def test_interpolation(self, rng):
        """Interpolated quartic matches point evaluations."""
        a, b, c, d = rng.standard_normal((4, 2, 2))
        poly = delta_pencil_poly(a, b, c, d)
        assert len(poly.coefficients) == 5
        norms = sum(np.linalg.norm(matrix) for matrix in (a, b, c, d))
        for x in (-3.0, 0.25, 1.7):
            expected = delta_raw(a + x * c, b + x * d)
            tolerance = 1e-9 * (norms * (1 + abs(x))) ** 4
            assert abs(poly(x) - expected) <= tolerance

    def test_three_parameter_delta(self):
        """At the origin the three-parameter form is Delta of the first half."""
        assert three_parameter_delta(example_tensor_x(), 0, 0, 0) == -4

    def test_profile_of_example(self):
        """Every slice pair of the example has a negative hyperdeterminant."""
        profile = delta_profile(example_tensor_x())
        assert profile.flattening == "ijkl"
        assert not profile.redundant
        assert [
            profile.delta_ab.value,
            profile.delta_cd.value,
            profile.delta_ac.value,
            profile.delta_bd.value,
        ] == [-4, -16, -8, -8]

    def test_profile_redundant(self):
        """Flattenings outside the essential list are flagged."""
        assert delta_profile(example_tensor_x(), (1, 0, 2, 3)).redundant


class TestParameterSearch(object):
    """Parameter schedule test cases."""

    def test_schedule_start(self, rng):
        """Zero first, then doubling in both directions."""
        schedule = search_schedule(rng)
        assert [next(schedule) for _ in range(5)] == [0.0, 1.0, -1.0, 2.0, -2.0]

    def test_best_deterministic_parameter(self, rng):
        """Best deterministic score wins."""
        assert find_parameter(lambda x: 5 - abs(x - 4), rng) == 4.0

    def test_random_phase(self, rng):
        """Random draws are used once the deterministic part fails."""
        x = find_parameter(lambda x: 0.0 if x == round(x) else 2.0, rng)
        assert x is not None
        assert x != round(x)

    def test_failure(self, rng):
        """No parameter when every score stays below one."""
        assert find_parameter(lambda x: 0.5, rng) is None
