"""Higher-order bound test cases."""

import numpy as np
import pytest

from htr.core import SlicePair, Tensor
from htr.exceptions import PreconditionError
from htr.higher import (
    decompose_higher,
    maximal_rank_lower_bound,
    mode_group_bound,
    stabilizing_rank_one,
)
from htr.pencil import delta, delta_margin
from htr.sampling import E, R, S, random_tensor


def _reconstructs(result, tensor):
    residual = result.decomposition.residual(tensor)
    return residual <= 1e-8 * max(1.0, tensor.norm())


class TestMaximalRankLowerBound(object):
    """Dimension count lower bound."""

    @pytest.mark.parametrize(
        "order, expected", [(3, 2), (4, 4), (5, 6), (6, 10)]
    )
    def test_values(self, order, expected):
        """Ceiling of 2**k / (k + 1)."""
        assert maximal_rank_lower_bound(order) == expected


class TestStabilizingRankOne(object):
    """Rank-one correction test cases."""

    @pytest.mark.parametrize("b", [S, R, -E, np.zeros((2, 2))])
    def test_single_pair(self, b):
        """Corrected pair has a positive hyperdeterminant."""
        correction = stabilizing_rank_one([SlicePair(E, b)])
        assert np.linalg.matrix_rank(correction) == 1
        assert delta(E, b + correction).sign == "positive"

    def test_random_pairs(self, rng):
        """One correction works for every pair."""
        pairs = [SlicePair(*rng.standard_normal((2, 2, 2))) for _ in range(8)]
        correction = stabilizing_rank_one(pairs, rng)
        for pair in pairs:
            assert delta(pair.a, pair.b + correction).sign == "positive"

    def test_margin_at_chosen_scale(self, rng):
        """The scale keeps every corrected pair clear of the Delta tolerance."""
        for _ in range(20):
            pairs = [SlicePair(*rng.standard_normal((2, 2, 2))) for _ in range(16)]
            correction = stabilizing_rank_one(pairs, rng)
            assert np.linalg.matrix_rank(correction) == 1
            assert min(
                delta_margin(pair.a, pair.b + correction) for pair in pairs
            ) > 1

    def test_zero_first_slice_exempt(self):
        """Pairs with a zero first slice do not constrain the correction."""
        zero = np.zeros((2, 2))
        correction = stabilizing_rank_one([SlicePair(zero, R), SlicePair(E, S)])
        assert delta(E, S + correction).sign == "positive"

    def test_complex_rejected(self):
        """Only real pairs are accepted."""
        with pytest.raises(PreconditionError):
            stabilizing_rank_one([SlicePair(E.astype(complex), 1j * R)])


class TestDecomposeHigher(object):
    """Stabilized and grouped bounds."""

    @pytest.mark.parametrize("order, limit", [(5, 9), (6, 17)])
    def test_real(self, rng, order, limit):
        """Real tensors need at most 2**(k-2) + 1 terms."""
        for _ in range(100):
            tensor = random_tensor(order, rng=rng)
            result = decompose_higher(tensor, rng=rng)
            assert result.bound == limit
            assert result.terms <= limit
            assert result.construction == "stabilized"
            assert _reconstructs(result, tensor)

    @pytest.mark.slow
    @pytest.mark.parametrize("order, limit", [(5, 9), (6, 17)])
    def test_real_many_seeds(self, order, limit):
        """Independent seeds never exhaust the stabilizing search."""
        for seed in range(300):
            rng = np.random.default_rng(seed)
            tensor = random_tensor(order, rng=rng)
            result = decompose_higher(tensor, rng=rng)
            assert result.terms <= limit
            assert _reconstructs(result, tensor)

    @pytest.mark.parametrize("order, limit", [(5, 8), (6, 16)])
    def test_complex(self, rng, order, limit):
        """Complex tensors need at most 2**(k-2) terms."""
        for _ in range(5):
            tensor = random_tensor(order, "complex", rng)
            result = decompose_higher(tensor, "complex", rng)
            assert result.bound == limit
            assert result.terms <= limit
            assert _reconstructs(result, tensor)

    def test_zero(self):
        """Zero tensor gives no terms."""
        result = decompose_higher(Tensor(np.zeros((2,) * 5)))
        assert result.terms == 0

    @pytest.mark.parametrize("order, bound", [(2, 2), (3, 3)])
    def test_low_orders(self, rng, order, bound):
        """Matrices and order-3 tensors are decomposed directly."""
        tensor = random_tensor(order, rng=rng)
        result = decompose_higher(tensor, rng=rng)
        assert result.bound == bound
        assert result.terms <= bound
        assert _reconstructs(result, tensor)

    def test_order_four(self, rng):
        """Order 4 over the complex numbers uses the four-term bound."""
        tensor = random_tensor(4, "complex", rng)
        result = decompose_higher(tensor, "complex", rng)
        assert result.terms <= 4
        assert _reconstructs(result, tensor)


class TestModeGroupBound(object):
    """Grouping the leading modes."""

    @pytest.mark.parametrize("size, bound", [(1, 16), (2, 16), (3, 12)])
    def test_sizes(self, rng, size, bound):
        """Bound is the inner bound times the number of blocks."""
        tensor = random_tensor(5, rng=rng)
        result = mode_group_bound(tensor, size, rng=rng)
        assert result.bound == bound
        assert result.terms <= bound
        assert result.construction == "mode-group"
        assert _reconstructs(result, tensor)

    @pytest.mark.parametrize("size", [0, 5, 7])
    def test_invalid_size(self, size):
        """Block size must leave at least one outer mode."""
        with pytest.raises(PreconditionError):
            mode_group_bound(Tensor(np.zeros((2,) * 5)), size)

    def test_custom_inner(self, rng):
        """Custom inner decomposers are used for every block."""
        calls = []

        def inner(block, field, rng):
            calls.append(block)
            return mode_group_bound(block, 2, field=field, rng=rng)[:2]

        tensor = random_tensor(5, rng=rng)
        result = mode_group_bound(tensor, 3, inner=inner, rng=rng)
        assert len(calls) == 4
        assert result.bound == 16
        assert _reconstructs(result, tensor)
