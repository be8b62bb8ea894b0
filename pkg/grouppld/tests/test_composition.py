"""
Tests for the composition module.
"""

import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ..core.composition import _convolve_pmfs, convolve, self_compose, truncate_tails
from ..core.distributions import binomial_sensitivities
from ..core.errors import DomainError
from ..core.pld import delta_for_epsilon, gaussian_delta, mog_pld
from ..core.types import DiscretePld, Direction, SensitivitySpec

GAUSSIAN = SensitivitySpec.point_mass(1.0)


class TestConvolve(unittest.TestCase):
    """Test cases for pairwise composition."""

    def test_point_masses_add(self):
        """Composing point masses adds their loss indices."""
        a = DiscretePld.point_mass(Direction.ADD, 0.1, loss_index=3)
        b = DiscretePld.point_mass(Direction.ADD, 0.1, loss_index=-1)
        composed = convolve(a, b)
        self.assertEqual(composed.min_loss_index, 2)
        self.assertEqual(composed.pmf.tolist(), [1.0])

    def test_infinity_mass_combines(self):
        """The composed loss is infinite if either loss is."""
        a = DiscretePld(0.1, 0, np.array([0.9]), 0.1, Direction.ADD)
        b = DiscretePld(0.1, 0, np.array([0.8]), 0.2, Direction.ADD)
        composed = convolve(a, b)
        self.assertAlmostEqual(composed.infinity_mass, 0.28)
        self.assertAlmostEqual(composed.total_mass, 1.0)

    def test_point_mass_at_zero_is_identity(self):
        """Composing with a point mass at loss 0 leaves the PLD unchanged."""
        pld = mog_pld(binomial_sensitivities(2, 0.3), 1.0, Direction.REMOVE, grid_spacing=1e-2)
        composed = convolve(pld, DiscretePld.point_mass(Direction.REMOVE, 1e-2))
        self.assertEqual(composed.min_loss_index, pld.min_loss_index)
        np.testing.assert_array_equal(composed.pmf, pld.pmf)
        self.assertAlmostEqual(composed.infinity_mass, pld.infinity_mass, delta=1e-16)

    def test_mismatched_inputs(self):
        """Different grids or directions cannot be composed."""
        a = DiscretePld.point_mass(Direction.ADD, 0.1)
        with self.assertRaises(DomainError):
            convolve(a, DiscretePld.point_mass(Direction.ADD, 0.2))
        with self.assertRaises(DomainError):
            convolve(a, DiscretePld.point_mass(Direction.REMOVE, 0.1))

    def test_fft_matches_direct(self):
        """The FFT path agrees with direct convolution and keeps the mass."""
        rng = np.random.default_rng(0)
        a = rng.random(2000)
        b = rng.random(1500)
        a /= a.sum()
        b /= b.sum()
        pmf = _convolve_pmfs(a, b)
        np.testing.assert_allclose(pmf, np.convolve(a, b), rtol=0.0, atol=1e-12)
        self.assertTrue(np.all(pmf >= 0))
        self.assertAlmostEqual(pmf.sum(), 1.0, places=12)


class TestTruncateTails(unittest.TestCase):
    """Test cases for pessimistic tail truncation."""

    def setUp(self):
        """Set up a PLD with negligible tails on both ends."""
        pmf = np.array([1e-16, 0.5, 0.5 - 2e-16, 1e-16])
        self.pld = DiscretePld(0.5, -2, pmf, 0.0, Direction.ADD)

    def test_tails_moved(self):
        """The lower tail joins the first kept point and the upper tail becomes infinite."""
        truncated = truncate_tails(self.pld, 1e-15)
        self.assertEqual(truncated.min_loss_index, -1)
        self.assertEqual(truncated.pmf.size, 2)
        self.assertAlmostEqual(truncated.infinity_mass, 1e-16, delta=1e-20)
        self.assertAlmostEqual(truncated.total_mass, self.pld.total_mass, places=15)

    def test_truncation_is_pessimistic(self):
        """Truncation never lowers delta(epsilon)."""
        truncated = truncate_tails(self.pld, 1e-15)
        for epsilon in (-1.5, -0.5, 0.0, 0.25, 0.5, 1.0):
            self.assertGreaterEqual(
                delta_for_epsilon(truncated, epsilon),
                delta_for_epsilon(self.pld, epsilon) - 1e-15,
            )

    def test_zero_truncation_is_identity(self):
        """A zero truncation mass returns the input unchanged."""
        self.assertIs(truncate_tails(self.pld, 0.0), self.pld)


class TestSelfCompose(unittest.TestCase):
    """Test cases for T-fold self-composition."""

    def test_gaussian_composition(self):
        """T-fold Gaussian composition matches sigma / sqrt(T)."""
        for direction in Direction:
            single = mog_pld(GAUSSIAN, 1.0, direction)
            for rounds in (2, 4, 16):
                composed = self_compose(single, rounds)
                self.assertAlmostEqual(composed.total_mass, 1.0, delta=1e-9)
                for epsilon in (0.0, 0.5, 1.0, 2.0):
                    expected = gaussian_delta(1.0, epsilon, rounds)
                    observed = delta_for_epsilon(composed, epsilon)
                    self.assertGreaterEqual(observed, expected - 1e-9)
                    self.assertLess(observed - expected, 1e-3)

    def test_matches_repeated_convolution(self):
        """Squaring gives the same PMF as composing one round at a time."""
        single = mog_pld(binomial_sensitivities(2, 0.3), 1.0, Direction.ADD, grid_spacing=1e-2)
        sequential = single
        for _ in range(4):
            sequential = convolve(sequential, single)
        squared = self_compose(single, 5, truncation_mass=0.0)
        self.assertEqual(squared.min_loss_index, sequential.min_loss_index)
        np.testing.assert_allclose(squared.pmf, sequential.pmf, rtol=0.0, atol=1e-12)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=1, max_value=12), st.integers(min_value=1, max_value=12))
    def test_rounds_add(self, first, second):
        """Composing a- and b-fold results gives the (a + b)-fold delta curve."""
        single = mog_pld(binomial_sensitivities(2, 0.3), 1.0, Direction.REMOVE, grid_spacing=1e-2)
        joined = self_compose(single, first + second)
        split = convolve(self_compose(single, first), self_compose(single, second))
        for epsilon in (-0.5, 0.0, 0.5, 1.0, 2.0, 4.0):
            self.assertAlmostEqual(
                delta_for_epsilon(joined, epsilon), delta_for_epsilon(split, epsilon), delta=1e-9
            )

    def test_delta_grows_with_rounds(self):
        """More rounds never decrease delta(epsilon)."""
        single = mog_pld(binomial_sensitivities(2, 0.3), 1.0, Direction.REMOVE, grid_spacing=1e-3)
        previous = [0.0] * 4
        for rounds in (1, 2, 3, 5, 8):
            composed = self_compose(single, rounds)
            current = [delta_for_epsilon(composed, epsilon) for epsilon in (0.0, 0.5, 1.0, 2.0)]
            for before, after in zip(previous, current):
                self.assertGreaterEqual(after, before - 1e-12)
            previous = current

    def test_mean_loss_adds(self):
        """The mean loss of T rounds is T times the single-round mean."""
        single = mog_pld(GAUSSIAN, 1.0, Direction.ADD, grid_spacing=1e-3)
        self.assertGreaterEqual(single.mean_loss, 0.5 - 1e-9)
        self.assertLess(single.mean_loss, 0.5 + 1e-3)
        self.assertAlmostEqual(self_compose(single, 4).mean_loss, 4 * single.mean_loss, delta=1e-6)

    def test_single_round_is_identity(self):
        """rounds = 1 returns the input PLD."""
        single = mog_pld(GAUSSIAN, 1.0, Direction.ADD, grid_spacing=1e-2)
        self.assertIs(self_compose(single, 1), single)

    def test_invalid_rounds(self):
        """rounds < 1 is a domain error."""
        with self.assertRaises(DomainError):
            self_compose(DiscretePld.point_mass(Direction.ADD), 0)


if __name__ == "__main__":
    unittest.main()
