"""Integration tests for optimized key-rate curves."""

import pytest

from snsrs.config import preset_config
from snsrs.optimizer import ScanPoint, scan

ROW_A_DISTANCES = [50.0, 100.0, 150.0, *(float(d) for d in range(155, 235, 5))]


def _rates(points: list[ScanPoint], m: int) -> dict[float, float]:
    return {p.distance_km: p.result.rate for p in points if p.m == m}


def _cutoff(rates: dict[float, float]) -> float:
    return max(distance for distance, rate in rates.items() if rate > 0.0)


@pytest.fixture(scope="module")
def row_a_curves() -> list[ScanPoint]:
    """Warm-started finite-key scan of row A for one and two modes."""
    config = preset_config("A", m=2)
    return scan(ROW_A_DISTANCES, [1, 2], config, budget=2000, seed=20221, workers=2)


@pytest.mark.integration
@pytest.mark.slow
class TestRateCurves:
    """Test suite for the shape of optimized rate curves."""

    def test_two_modes_gain_at_170_km(self, row_a_curves: list[ScanPoint]) -> None:
        """Test that two modes raise the row A rate at 170 km by at least 80%."""
        single = _rates(row_a_curves, 1)[170.0]
        double = _rates(row_a_curves, 2)[170.0]

        assert single > 0.0
        assert double >= 1.8 * single

    def test_two_modes_reach_further(self, row_a_curves: list[ScanPoint]) -> None:
        """Test that the two-mode curve stays positive beyond the one-mode cutoff."""
        single = _rates(row_a_curves, 1)
        double = _rates(row_a_curves, 2)

        assert single[ROW_A_DISTANCES[-1]] == 0.0
        assert double[ROW_A_DISTANCES[-1]] == 0.0
        assert _cutoff(double) >= _cutoff(single) + 5.0

    def test_asymptotic_rate_grows_with_modes(self) -> None:
        """Test rate(2) < rate(3) < rate(6) < rate(20) for row B at 300 km."""
        modes = [2, 3, 6, 20]
        config = preset_config("B", m=2)
        points = scan(
            [200.0, 250.0, 300.0], modes, config, budget=1500, seed=1, workers=2, asymptotic=True
        )

        at_300 = [_rates(points, m)[300.0] for m in modes]
        assert at_300[0] > 0.0
        assert at_300 == sorted(at_300)
        assert len(set(at_300)) == len(at_300)
