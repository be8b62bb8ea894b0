"""
Tests for the baselines module.
"""

import math
import unittest

import pytest

from ..core.accountant import group_delta, group_epsilon
from ..core.baselines import (
    linear_lower_bound,
    vadhan_forward,
    vadhan_group_delta,
    vadhan_group_epsilon,
)
from ..core.errors import DomainError
from ..core.types import AccountantConfig, Poisson

SMALL = AccountantConfig(sigma=1.0, rounds=10, k=1, scheme=Poisson(0.1), grid_spacing=1e-3)


class TestVadhanForward(unittest.TestCase):
    """Test cases for the black-box group conversion."""

    def test_known_value(self):
        """(1, 1e-6) for k = 2 becomes (2, 2 e^2 1e-6)."""
        conversion = vadhan_forward(1.0, 1e-6, 2)
        self.assertEqual(conversion.epsilon, 2.0)
        self.assertAlmostEqual(conversion.delta, 2.0 * math.exp(2.0) * 1e-6, delta=1e-18)
        self.assertFalse(conversion.saturated)

    def test_zero_delta(self):
        """A pure guarantee stays pure."""
        conversion = vadhan_forward(0.5, 0.0, 4)
        self.assertEqual(conversion, (2.0, 0.0, False))

    def test_zero_epsilon(self):
        """With epsilon 0 the delta term is k * delta."""
        conversion = vadhan_forward(0.0, 1e-6, 3)
        self.assertEqual(conversion.epsilon, 0.0)
        self.assertAlmostEqual(conversion.delta, 3e-6, delta=1e-20)
        self.assertTrue(vadhan_forward(10.0, 1e-6, 50).saturated)

    def test_saturation_and_overflow(self):
        """delta terms >= 1 are flagged, never clamped; overflow gives inf."""
        saturated = vadhan_forward(5.0, 0.01, 3)
        self.assertTrue(saturated.saturated)
        self.assertGreater(saturated.delta, 1.0)
        overflow = vadhan_forward(1000.0, 0.1, 1)
        self.assertEqual(overflow.delta, math.inf)
        self.assertTrue(overflow.saturated)

    def test_invalid_inputs(self):
        """Negative epsilon, delta outside [0, 1) and k < 1 are domain errors."""
        with self.assertRaises(DomainError):
            vadhan_forward(-1.0, 1e-6, 2)
        with self.assertRaises(DomainError):
            vadhan_forward(1.0, 1.0, 2)
        with self.assertRaises(DomainError):
            vadhan_forward(1.0, 1e-6, 0)


class TestGroupBaselines(unittest.TestCase):
    """Test cases for the conversion and lower-bound curves."""

    def test_single_example_ordering(self):
        """At k = 1 the conversion is never tighter than the accountant."""
        for delta in (1e-3, 1e-5):
            self.assertGreaterEqual(vadhan_group_epsilon(SMALL, delta), group_epsilon(SMALL, delta))

    def test_lower_bound_at_k_one(self):
        """The linear heuristic equals the accountant at k = 1."""
        self.assertEqual(linear_lower_bound(SMALL, 1e-5), group_epsilon(SMALL, 1e-5))

    def test_empty_group(self):
        """k = 0 gives epsilon 0 for both baselines."""
        config = SMALL.with_k(0)
        self.assertEqual(vadhan_group_epsilon(config, 1e-5), 0.0)
        self.assertEqual(linear_lower_bound(config, 1e-5), 0.0)
        self.assertEqual(vadhan_group_delta(config, 1.0).delta, 0.0)

    def test_group_delta_exceeds_accountant(self):
        """The converted delta is at least the accountant's delta."""
        for k in (1, 2, 3):
            config = SMALL.with_k(k)
            for epsilon in (0.5, 1.0, 2.0):
                conversion = vadhan_group_delta(config, epsilon)
                self.assertGreaterEqual(conversion.delta, group_delta(config, epsilon) - 1e-12)

    def test_conversion_is_looser(self):
        """accountant <= conversion wherever the conversion is finite."""
        for k in (2, 3):
            config = SMALL.with_k(k)
            conversion = vadhan_group_epsilon(config, 1e-5)
            if math.isfinite(conversion):
                self.assertLessEqual(group_epsilon(config, 1e-5), conversion + 1e-8)

    def test_unreachable_delta(self):
        """Required example-level deltas below the resolvable floor give inf."""
        self.assertEqual(vadhan_group_epsilon(SMALL.with_k(2), 1e-14), math.inf)

    def test_conversion_round_trip(self):
        """The converted epsilon meets the target delta through the forward rule."""
        config = SMALL.with_k(2)
        epsilon = vadhan_group_epsilon(config, 1e-3)
        self.assertTrue(math.isfinite(epsilon))
        self.assertLessEqual(vadhan_group_delta(config, epsilon).delta, 1e-3 * (1 + 1e-9))


@pytest.mark.slow
class TestLongRunRegime(unittest.TestCase):
    """T = 2000, q = 1/100, sigma = 1, delta = 1e-6."""

    def setUp(self):
        """Set up the Poisson configuration."""
        self.config = AccountantConfig(sigma=1.0, rounds=2000, k=1, scheme=Poisson(0.01))

    def test_conversion_breaks_down(self):
        """The conversion reports inf for some group size up to 12."""
        epsilons = [vadhan_group_epsilon(self.config.with_k(k), 1e-6) for k in (9, 12)]
        self.assertTrue(any(math.isinf(epsilon) for epsilon in epsilons))

    def test_conversion_finite_for_pairs(self):
        """Pairs still get a finite conversion above the accountant."""
        config = self.config.with_k(2)
        conversion = vadhan_group_epsilon(config, 1e-6)
        self.assertTrue(math.isfinite(conversion))
        self.assertGreater(conversion, group_epsilon(config, 1e-6))

    def test_sandwich(self):
        """lower <= accountant <= conversion per row where the conversion is finite."""
        for k in range(1, 17):
            config = self.config.with_k(k)
            accountant = group_epsilon(config, 1e-6)
            self.assertTrue(math.isfinite(accountant))
            self.assertLessEqual(linear_lower_bound(config, 1e-6), accountant + 1e-8)
            conversion = vadhan_group_epsilon(config, 1e-6)
            if math.isfinite(conversion):
                self.assertLessEqual(accountant, conversion + 1e-8)


if __name__ == "__main__":
    unittest.main()
