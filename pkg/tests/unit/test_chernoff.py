"""Tests for the Chernoff bounds and binary entropy."""

import logging
import math

import numpy as np
import pytest

from snsrs.stats import (
    BoundBudget,
    binary_entropy,
    chernoff_expected_bounds,
    chernoff_real_bounds,
    phi_lower,
    phi_upper,
    varphi_lower,
    varphi_upper,
)

COUNTS = [1.0, 17.0, 1e3, 1e6, 1e10]
EPSILONS = [1e-10, 1e-3, 0.1]


@pytest.mark.unit
class TestExpectedBounds:
    """Test suite for bounds on an expected value from an observed count."""

    @pytest.mark.parametrize("x", COUNTS)
    @pytest.mark.parametrize("epsilon", EPSILONS)
    def test_bounds_bracket_the_count(self, x: float, epsilon: float) -> None:
        """Test that φᴸ(X) ≤ X ≤ φᵁ(X)."""
        lower, upper = chernoff_expected_bounds(x, epsilon)
        assert 0.0 < lower < x < upper

    @pytest.mark.parametrize("x", COUNTS)
    def test_smaller_epsilon_widens(self, x: float) -> None:
        """Test monotonicity in the failure probability."""
        assert phi_lower(x, 1e-10) < phi_lower(x, 1e-3)
        assert phi_upper(x, 1e-10) > phi_upper(x, 1e-3)

    @pytest.mark.parametrize("x", COUNTS)
    @pytest.mark.parametrize("epsilon", EPSILONS)
    def test_back_substitution(self, x: float, epsilon: float) -> None:
        """Test that the roots satisfy the defining equations."""
        rhs = math.log(epsilon / 2.0)
        delta1 = x / phi_lower(x, epsilon) - 1.0
        delta2 = 1.0 - x / phi_upper(x, epsilon)

        lower_residual = x * (delta1 / (1.0 + delta1) - math.log1p(delta1)) - rhs
        upper_residual = x * (-delta2 / (1.0 - delta2) - math.log1p(-delta2)) - rhs

        assert abs(lower_residual) <= 1e-8 * abs(rhs)
        assert abs(upper_residual) <= 1e-8 * abs(rhs)

    def test_zero_count(self) -> None:
        """Test that φᴸ(0) = 0 and φᵁ(0) = ln(2/ε)."""
        assert phi_lower(0.0, 1e-10) == 0.0
        assert phi_upper(0.0, 1e-10) == pytest.approx(math.log(2e10))

    def test_epsilon_two_is_identity(self) -> None:
        """Test that ε = 2 removes the fluctuation."""
        assert chernoff_expected_bounds(123.5, 2.0) == (123.5, 123.5)
        assert chernoff_real_bounds(123.5, 2.0) == (123.5, 123.5)

    def test_large_count_approaches_gaussian_width(self) -> None:
        """Test that the width scales as √(2·X·ln(2/ε)) for large X."""
        x, epsilon = 1e10, 1e-10
        width = math.sqrt(2.0 * x * math.log(2.0 / epsilon))

        assert x - phi_lower(x, epsilon) == pytest.approx(width, rel=1e-3)
        assert phi_upper(x, epsilon) - x == pytest.approx(width, rel=1e-3)

    def test_coverage_on_binomial_replicates(self) -> None:
        """Test that the interval misses the mean in at most an ε fraction of replicates."""
        epsilon, trials, p = 0.01, 100_000, 0.01
        mean = trials * p
        rng = np.random.Generator(np.random.Philox(7))
        samples = rng.binomial(trials, p, size=10_000)

        misses = sum(
            1
            for x in samples
            if not phi_lower(float(x), epsilon) <= mean <= phi_upper(float(x), epsilon)
        )
        assert misses / samples.size <= epsilon

    @pytest.mark.parametrize("bad", [0.0, -1.0, 2.5, math.nan])
    def test_rejects_bad_epsilon(self, bad: float) -> None:
        """Test that ε must lie in (0, 2]."""
        with pytest.raises(ValueError):
            phi_lower(10.0, bad)

    @pytest.mark.parametrize("bad", [-1.0, math.inf, math.nan])
    def test_rejects_bad_count(self, bad: float) -> None:
        """Test that counts must be finite and non-negative."""
        with pytest.raises(ValueError):
            phi_upper(bad, 1e-3)


@pytest.mark.unit
class TestRealBounds:
    """Test suite for bounds on a real value from an expected value."""

    @pytest.mark.parametrize("y", COUNTS)
    @pytest.mark.parametrize("epsilon", EPSILONS)
    def test_bounds_bracket_the_expectation(self, y: float, epsilon: float) -> None:
        """Test that φ̂ᴸ(Y) ≤ Y ≤ φ̂ᵁ(Y)."""
        lower, upper = chernoff_real_bounds(y, epsilon)
        assert 0.0 <= lower < y < upper

    @pytest.mark.parametrize("y", [1e3, 1e6, 1e10])
    @pytest.mark.parametrize("epsilon", EPSILONS)
    def test_back_substitution(self, y: float, epsilon: float) -> None:
        """Test that the roots satisfy the defining equations."""
        rhs = math.log(epsilon / 2.0)
        delta_up = varphi_upper(y, epsilon) / y - 1.0
        delta_low = 1.0 - varphi_lower(y, epsilon) / y

        upper_residual = y * (delta_up - (1.0 + delta_up) * math.log1p(delta_up)) - rhs
        lower_residual = y * (-delta_low - (1.0 - delta_low) * math.log1p(-delta_low)) - rhs

        assert abs(upper_residual) <= 1e-8 * abs(rhs)
        assert abs(lower_residual) <= 1e-8 * abs(rhs)

    def test_small_expectation_clamps_lower_bound(self) -> None:
        """Test that φ̂ᴸ reaches 0 when Y cannot support the confidence level."""
        assert varphi_lower(1.0, 1e-10) == 0.0

    def test_empty_sample_warns(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test that Y = 0 returns 0 with a warning."""
        with caplog.at_level(logging.WARNING):
            assert chernoff_real_bounds(0.0, 1e-3) == (0.0, 0.0)

        assert "empty sample" in caplog.text

    def test_smaller_epsilon_widens(self) -> None:
        """Test monotonicity in the failure probability."""
        assert varphi_lower(1e6, 1e-10) < varphi_lower(1e6, 1e-3)
        assert varphi_upper(1e6, 1e-10) > varphi_upper(1e6, 1e-3)


@pytest.mark.unit
class TestBoundBudget:
    """Test suite for failure-budget accounting."""

    def test_counts_invocations(self) -> None:
        """Test that every bound call spends ε."""
        budget = BoundBudget(1e-10)
        budget.phi_lower(10.0)
        budget.phi_upper(10.0)
        budget.varphi_upper(10.0)

        assert budget.invocations == 3
        assert budget.spent == pytest.approx(3e-10)
        assert budget.invocation_log == ["phi_lower", "phi_upper", "varphi_upper"]

    def test_rejects_bad_epsilon(self) -> None:
        """Test that the budget validates ε up front."""
        with pytest.raises(ValueError):
            BoundBudget(3.0)


@pytest.mark.unit
class TestBinaryEntropy:
    """Test suite for binary entropy."""

    def test_known_values(self) -> None:
        """Test endpoints and the maximum."""
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == pytest.approx(1.0)
        assert binary_entropy(0.11) == pytest.approx(0.49992, abs=1e-5)

    def test_symmetry(self) -> None:
        """Test that H(x) = H(1 − x)."""
        assert binary_entropy(0.2) == pytest.approx(binary_entropy(0.8))

    @pytest.mark.parametrize("bad", [-0.1, 1.1])
    def test_rejects_out_of_range(self, bad: float) -> None:
        """Test that arguments outside [0, 1] raise."""
        with pytest.raises(ValueError):
            binary_entropy(bad)
