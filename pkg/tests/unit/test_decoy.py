"""Tests for the decoy-state estimates."""

import math
from dataclasses import dataclass

import numpy as np
import pytest

from snsrs.config import (
    ChannelParams,
    ProtocolParams,
    RunConfig,
    SecurityParams,
    WindowClass,
    per_arm_transmittance,
)
from snsrs.decoy import (
    NoUntaggedBitsError,
    asymptotic_decoy,
    e1ph_upper,
    finite_key_decoy,
    n1_lower,
    s1_mean,
)
from snsrs.model import counting_rates
from snsrs.oracle import simulate

TOY_TRIALS = 100_000


@dataclass
class FakeCounts:
    """Hand-made tallies satisfying the count-source protocol."""

    tallies: dict[WindowClass, float]
    errors: float = 0.0
    n_windows: int = 10**10
    m: int = 1

    @property
    def w_tx(self) -> np.ndarray:
        return np.full(self.m, self.errors / self.m)

    def accepted(self, cls: WindowClass) -> np.ndarray:
        return np.full(self.m, self.tallies.get(cls, 0.0) / self.m)


def _toy_params(mu_x: float, mu_y: float) -> ProtocolParams:
    return ProtocolParams(
        p_v=0.6, p_x=0.15, p_y=0.15, p_z=0.1, mu_x=mu_x, mu_y=mu_y, mu_z=0.3, m=1
    )


def _single_photon_truth(params: ProtocolParams, channel: ChannelParams) -> tuple[float, float]:
    """Expected untagged bits and their phase-flip error rate on a dark-count-free channel.

    A lone photon clicks with probability η; inside the slice it reaches the dark port
    with probability (1 − (1−2E_d)·|cos δ|)/2, averaged over a uniform δ.
    """
    eta = per_arm_transmittance(channel)
    signal = params.mu_z * math.exp(-params.mu_z)
    n1 = params.n_windows * 2.0 * params.p_v * params.p_z * signal * eta
    half = 0.5 * params.slice_width
    visibility = (1.0 - 2.0 * channel.e_mis) * math.sin(half) / half
    return n1, 0.5 * (1.0 - visibility)


@pytest.mark.unit
class TestSinglePhotonRate:
    """Test suite for the single-photon counting-rate bound."""

    @pytest.mark.parametrize("eta", [0.5, 0.1, 1e-3])
    @pytest.mark.parametrize("mu_x", [0.05, 0.1])
    @pytest.mark.parametrize("mu_y", [0.3, 0.5])
    def test_lower_bounds_true_yield(self, eta: float, mu_x: float, mu_y: float) -> None:
        """Test s1 ≤ Y₁ = η on the dark-count-free Poisson channel."""
        params = _toy_params(mu_x, mu_y)
        channel = ChannelParams(length_km=0.0, eta0=eta, dark=0.0, e_mis=0.0)
        s1 = s1_mean(counting_rates(params, channel).rates(), params)

        assert s1[0] <= eta * (1.0 + 1e-9)
        assert s1[0] >= 0.9 * eta

    def test_clamps_negative_estimates(self) -> None:
        """Test that negative estimates become 0."""
        params = _toy_params(0.1, 0.4)
        rates = {cls: np.zeros(1) for cls in WindowClass}
        rates[WindowClass.VV] = np.ones(1)

        assert s1_mean(rates, params)[0] == 0.0

    def test_requires_ordered_intensities(self) -> None:
        """Test that mu_x < mu_y is required."""
        params = _toy_params(0.4, 0.1)
        rates = {cls: np.zeros(1) for cls in WindowClass}

        with pytest.raises(ValueError):
            s1_mean(rates, params)


@pytest.mark.unit
class TestFiniteKey:
    """Test suite for the finite-key estimates."""

    def test_converges_to_asymptotic_without_fluctuation(self, row_a_config: RunConfig) -> None:
        """Test that ε = 2 reproduces the asymptotic estimates."""
        stats = counting_rates(row_a_config.protocol, row_a_config.channel)
        finite = finite_key_decoy(stats, row_a_config.protocol, row_a_config.security, 2.0)
        asymptotic = asymptotic_decoy(stats, row_a_config.protocol)

        assert finite.n1 == pytest.approx(asymptotic.n1, rel=1e-9)
        assert finite.e1ph == pytest.approx(asymptotic.e1ph, rel=1e-9)

    def test_fluctuation_lowers_n1_and_raises_e1ph(self, row_a_config: RunConfig) -> None:
        """Test that finite-key bounds are more pessimistic."""
        stats = counting_rates(row_a_config.protocol, row_a_config.channel)
        finite = finite_key_decoy(stats, row_a_config.protocol, row_a_config.security)
        asymptotic = asymptotic_decoy(stats, row_a_config.protocol)

        assert finite.n1 < asymptotic.n1
        assert finite.e1ph > asymptotic.e1ph

    def test_spends_seven_bounds(self, row_a_config: RunConfig) -> None:
        """Test the failure-budget accounting."""
        stats = counting_rates(row_a_config.protocol, row_a_config.channel)
        result = finite_key_decoy(stats, row_a_config.protocol, row_a_config.security)

        assert result.intermediates["bound_invocations"] == 7
        assert result.budget_spent == pytest.approx(7 * row_a_config.security.xi)

    def test_n1_lower_matches_full_estimate(self, row_a_config: RunConfig) -> None:
        """Test that the standalone n1 bound agrees with the combined analysis."""
        stats = counting_rates(row_a_config.protocol, row_a_config.channel)
        result = finite_key_decoy(stats, row_a_config.protocol, row_a_config.security)

        assert n1_lower(stats, row_a_config.protocol, row_a_config.security) == result.n1

    def test_no_errors_and_no_vacuum_clicks_give_zero_phase_error(self) -> None:
        """Test e1ph = 0 when W_TX = 0 and n_vv = 0 without fluctuation."""
        params = _toy_params(0.1, 0.4)
        counts = FakeCounts(
            tallies={
                WindowClass.VX: 5e6,
                WindowClass.XV: 5e6,
                WindowClass.VY: 1e7,
                WindowClass.YV: 1e7,
                WindowClass.VZ: 1e7,
                WindowClass.ZV: 1e7,
            }
        )
        result = finite_key_decoy(counts, params, SecurityParams(), epsilon=2.0)

        assert result.n1 > 0.0
        assert result.e1ph == 0.0

    def test_no_untagged_bits(self, row_a_config: RunConfig) -> None:
        """Test that a non-positive ⟨n₁⟩ᴸ raises."""
        stats = counting_rates(row_a_config.protocol, row_a_config.channel)

        with pytest.raises(NoUntaggedBitsError) as exc_info:
            e1ph_upper(stats, row_a_config.protocol, row_a_config.security, n1_mean_L=0.0)

        assert exc_info.value.n1_mean == 0.0

    def test_dark_counts_alone_leave_no_untagged_bits(self, source_params: ProtocolParams) -> None:
        """Test that fluctuation of dark-count tallies drives ⟨n₁⟩ᴸ negative."""
        channel = ChannelParams(length_km=2000.0, dark=1e-6)
        stats = counting_rates(source_params, channel)

        with pytest.raises(NoUntaggedBitsError) as exc_info:
            finite_key_decoy(stats, source_params, SecurityParams())

        assert exc_info.value.n1_mean < 0.0
        assert exc_info.value.s1_mean is not None
        assert exc_info.value.s1_mean < 0.0

    def test_requires_uniform_modes(self, row_a_config: RunConfig) -> None:
        """Test that finite-key analysis rejects non-uniform mode probabilities."""
        config = row_a_config.with_protocol(mode_probs=(0.7, 0.3))  # type: ignore[arg-type]
        stats = counting_rates(config.protocol, config.channel)

        with pytest.raises(ValueError, match="uniform"):
            finite_key_decoy(stats, config.protocol, config.security)

    @pytest.mark.slow
    def test_bounds_hold_on_simulated_runs(self) -> None:
        """Test n1 ≤ true n₁ and e1ph ≥ true e₁ᵖʰ over 10³ seeded dark-count-free runs."""
        params = ProtocolParams(
            p_v=0.4,
            p_x=0.25,
            p_y=0.25,
            p_z=0.1,
            mu_x=0.1,
            mu_y=0.4,
            mu_z=0.3,
            m=1,
            lambda_slice=0.2,
            n_windows=TOY_TRIALS,
        )
        security = SecurityParams()
        runs = 1_000
        failures = 0
        for seed in range(runs):
            e_mis = (0.0, 0.03, 0.1)[seed % 3]
            channel = ChannelParams(length_km=0.0, eta0=0.5, dark=0.0, e_mis=e_mis)
            observed = simulate(params, channel, TOY_TRIALS, seed=seed)
            try:
                result = finite_key_decoy(observed, params, security)
                n1, e1ph = result.n1, result.e1ph
            except NoUntaggedBitsError:
                n1, e1ph = 0.0, 0.5

            true_n1, true_e1ph = _single_photon_truth(params, channel)
            if n1 > true_n1 or e1ph < true_e1ph:
                failures += 1

        assert failures <= runs * 10 * security.xi


@pytest.mark.unit
class TestAsymptotic:
    """Test suite for the asymptotic estimates."""

    def test_full_misalignment_clamps_phase_error(self, source_params: ProtocolParams) -> None:
        """Test that E_d = 0.5 drives e1ph to its 0.5 cap."""
        channel = ChannelParams(length_km=0.0, dark=1e-8, e_mis=0.5)
        stats = counting_rates(source_params, channel)
        result = asymptotic_decoy(stats, source_params)

        assert result.e1ph == 0.5
        assert "e1ph_clamped" in result.flags

    def test_supports_non_uniform_modes(self, row_a_config: RunConfig) -> None:
        """Test the per-mode estimates with unequal mode probabilities."""
        uniform = row_a_config.protocol
        skewed = row_a_config.with_protocol(mode_probs=(0.7, 0.3))  # type: ignore[arg-type]
        stats = counting_rates(skewed.protocol, skewed.channel)
        result = asymptotic_decoy(stats, skewed.protocol)
        reference = asymptotic_decoy(counting_rates(uniform, row_a_config.channel), uniform)

        assert result.n1 == pytest.approx(reference.n1, rel=1e-12)
        assert 0.0 < result.e1ph <= 0.5

    def test_no_signal_raises(self, source_params: ProtocolParams) -> None:
        """Test that a channel that delivers nothing has no untagged bits."""
        channel = ChannelParams(length_km=2000.0, alpha=200.0, dark=0.0)
        stats = counting_rates(source_params, channel)

        with pytest.raises(NoUntaggedBitsError) as exc_info:
            asymptotic_decoy(stats, source_params)

        assert exc_info.value.s1_mean == 0.0
