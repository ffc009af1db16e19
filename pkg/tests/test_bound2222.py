"""Order-4 rank bound test cases."""

import numpy as np
import pytest
from mock import MagicMock, patch

from htr.bound2222 import (
    BoundResult,
    bound_complex,
    bound_real,
    decompose_eo_form,
    decompose_when_half_rank2,
    half_delta,
    slice_rank_profile,
    split_and_separate,
)
from htr.core import (
    ESSENTIAL_FLATTENINGS,
    GLAction,
    QuadTensor,
    SlicePair,
    numerical_rank,
    quad_unfolding_matrix,
)
from htr.exceptions import NotRankOne, PreconditionError
from htr.sampling import E, R, S, example_tensor_x, random_rank_one_sum, random_tensor

O = np.zeros((2, 2))


def _check(result, quad, limit):
    tensor = quad.to_tensor()
    assert result.terms <= limit
    assert result.terms <= result.bound
    assert result.decomposition.residual(tensor) <= 1e-8 * max(1.0, tensor.norm())
    assert result.terms >= numerical_rank(quad_unfolding_matrix(quad).matrix)


class TestBoundReal(object):
    """Five-term real bound test cases."""

    def test_example(self):
        """Every half of the example has rank 3, so one term is peeled."""
        quad = example_tensor_x()
        result = bound_real(quad)
        _check(result, quad, 5)
        assert result.branch == "peel-five"

    def test_zero(self):
        """Zero tensor needs no terms."""
        quad = QuadTensor(O, O, O, O)
        assert bound_real(quad).terms == 0

    def test_three_rank_one_terms(self, rng):
        """Sums of three rank-one terms stay within five."""
        for _ in range(10):
            tensor, _ = random_rank_one_sum(4, 3, rng=rng)
            quad = QuadTensor.from_tensor(tensor)
            _check(bound_real(quad, rng), quad, 5)

    def test_gaussian(self, rng):
        """Random real tensors stay within five terms."""
        for _ in range(20):
            quad = QuadTensor.from_tensor(random_tensor(4, rng=rng))
            _check(bound_real(quad, rng), quad, 5)

    @pytest.mark.slow
    def test_gaussian_full(self, rng):
        """Full-size run on random real tensors."""
        for _ in range(1000):
            quad = QuadTensor.from_tensor(random_tensor(4, rng=rng))
            _check(bound_real(quad, rng), quad, 5)

    def test_complex_rejected(self):
        """Complex tensors need the complex bound."""
        quad = QuadTensor(E.astype(complex), 1j * E, O, O)
        with pytest.raises(PreconditionError):
            bound_real(quad)


class TestBoundComplex(object):
    """Four-term complex bound test cases."""

    def test_example(self):
        """The example needs at most four complex terms."""
        quad = example_tensor_x()
        result = bound_complex(quad)
        _check(result, quad, 4)
        assert result.decomposition.field == "complex"

    def test_four_rank_one_terms(self, rng):
        """Sums of four complex rank-one terms stay within four."""
        for _ in range(10):
            tensor, _ = random_rank_one_sum(4, 4, field="complex", rng=rng)
            quad = QuadTensor.from_tensor(tensor)
            _check(bound_complex(quad, rng), quad, 4)

    @pytest.mark.parametrize("field", ["real", "complex"])
    def test_gaussian(self, rng, field):
        """Random tensors stay within four complex terms."""
        for _ in range(20):
            quad = QuadTensor.from_tensor(random_tensor(4, field, rng))
            _check(bound_complex(quad, rng), quad, 4)

    @pytest.mark.slow
    def test_gaussian_full(self, rng):
        """Full-size run on random complex tensors."""
        for _ in range(1000):
            quad = QuadTensor.from_tensor(random_tensor(4, "complex", rng))
            _check(bound_complex(quad, rng), quad, 4)

    @staticmethod
    def _five_terms():
        decomposition = MagicMock()
        decomposition.__len__.return_value = 5
        return BoundResult(decomposition, 5, "degenerate-fallback")

    def test_theta_roots_beat_five_terms(self, rng):
        """A five-term half candidate gives way to the theta-root route."""
        second = rng.standard_normal((2, 2, 2)) + 1j * rng.standard_normal((2, 2, 2))
        quad = QuadTensor(E.copy(), S.copy(), second[0], second[1])
        fallback = self._five_terms()
        with patch("htr.bound2222._half_candidates", return_value=iter([fallback])):
            result = bound_complex(quad, rng)
        _check(result, quad, 4)
        assert result.decomposition is not fallback.decomposition

    def test_rank_two_half_keeps_candidate(self):
        """Without a rank-3 first half the best candidate is returned."""
        fallback = self._five_terms()
        with patch("htr.bound2222._half_candidates", return_value=iter([fallback])):
            result = bound_complex(example_tensor_x())
        assert result is fallback


class TestHalfRankTwo(object):
    """Constructions for a first half of rank at most two."""

    def test_direct(self):
        """Two rank-two halves are concatenated."""
        quad = QuadTensor(E, np.diag([1.0, 2.0]), E, np.diag([3.0, 1.0]))
        result = decompose_when_half_rank2(quad)
        _check(result, quad, 4)
        assert result.branch == "direct"

    def test_shear(self):
        """A sheared second half of rank two gives four terms."""
        quad = QuadTensor(E, np.diag([1.0, 2.0]), E, R)
        result = decompose_when_half_rank2(quad)
        _check(result, quad, 4)
        assert result.branch == "half-rank-two"

    def test_proportional_slices(self):
        """Proportional slices are reduced to the (E;O) form."""
        quad = QuadTensor(E, E, E, R)
        result = decompose_when_half_rank2(quad)
        _check(result, quad, 4)
        assert result.branch == "one-part-zero"

    def test_rank_three_half(self):
        """A rank-3 first half is rejected."""
        with pytest.raises(PreconditionError):
            decompose_when_half_rank2(example_tensor_x())


class TestEOForm(object):
    """Tensors whose first half is (E;O)."""

    def test_zero_second_half(self):
        """Only the first half is left."""
        quad = QuadTensor(E, O, O, O)
        assert len(decompose_eo_form(quad)) == 2

    def test_vanishing_last_slice(self):
        """Second half (R;O) needs at most three terms."""
        quad = QuadTensor(E, O, R, O)
        decomposition = decompose_eo_form(quad)
        assert len(decomposition) <= 3
        assert decomposition.residual(quad) <= 1e-8 * quad.norm()

    def test_random_second_half(self, rng):
        """Random second halves need at most four terms."""
        for _ in range(20):
            b1, b2 = rng.standard_normal((2, 2, 2))
            quad = QuadTensor(E, O, b1, b2)
            decomposition = decompose_eo_form(quad, rng=rng)
            assert len(decomposition) <= 4
            assert decomposition.residual(quad) <= 1e-8 * quad.norm()

    def test_other_first_half(self):
        """Precondition on the first half."""
        with pytest.raises(PreconditionError):
            decompose_eo_form(example_tensor_x())


class TestSplitAndSeparate(object):
    """Split of the first half into rank-one parts."""

    FIRST = SlicePair(np.diag([1.0, 0.0]), O)
    SECOND = SlicePair(np.diag([0.0, 1.0]), O)

    def test_random_other(self, rng):
        """Four terms reconstructing both halves."""
        other = SlicePair(*rng.standard_normal((2, 2, 2)))
        decomposition = split_and_separate(self.FIRST, self.SECOND, other, rng=rng)
        quad = QuadTensor.from_halves(self.FIRST + self.SECOND, other)
        assert len(decomposition) <= 4
        assert decomposition.residual(quad) <= 1e-8 * max(1.0, quad.norm())

    def test_no_shift(self, rng):
        """No parameter is found when every shift stays singular."""
        other = SlicePair(O, O)
        assert split_and_separate(self.FIRST, self.SECOND, other, rng=rng) is None

    def test_part_not_rank_one(self, rng):
        """Parts must be rank one."""
        with pytest.raises(NotRankOne):
            split_and_separate(SlicePair(E, O), self.SECOND, SlicePair(E, R), rng=rng)


class TestSliceRankProfile(object):
    """Slice rank table test cases."""

    def test_example(self):
        """Every slice pair of the example has rank 3 in every flattening."""
        rows = slice_rank_profile(example_tensor_x())
        assert [row.flattening for row in rows] == [
            "ijkl",
            "kjil",
            "ikjl",
            "ilkj",
            "klij",
            "jlki",
        ]
        assert all(row.ranks == (3, 3, 3, 3) for row in rows)

    def test_example_under_actions(self, rng):
        """Real actions keep every slice pair of the example at rank 3."""
        quad = example_tensor_x()
        for _ in range(100):
            action = GLAction(rng.standard_normal((4, 2, 2)))
            rows = slice_rank_profile(action.apply(quad))
            assert all(row.ranks == (3, 3, 3, 3) for row in rows)

    def test_zero(self):
        """Zero tensor has rank-0 slices."""
        rows = slice_rank_profile(QuadTensor(O, O, O, O))
        assert len(rows) == len(ESSENTIAL_FLATTENINGS)
        assert all(row.ranks == (0, 0, 0, 0) for row in rows)

    def test_selected_flattenings(self):
        """Only the requested flattenings are scanned."""
        rows = slice_rank_profile(example_tensor_x(), permutations=[(2, 1, 0, 3)])
        assert [row.flattening for row in rows] == ["kjil"]


class TestHalfDelta(object):
    """Hyperdeterminants of the halves."""

    def test_example(self):
        """Both halves of the example have negative Delta."""
        first, second = half_delta(example_tensor_x())
        assert (first.value, first.sign) == (-4, "negative")
        assert (second.value, second.sign) == (-16, "negative")
