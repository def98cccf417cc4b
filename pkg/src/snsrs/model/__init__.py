"""Analytic channel and detection model."""

from snsrs.model.analytic import (
    ExpectedStats,
    WindowCounts,
    counting_rates,
    phase_slice_error_rate,
    window_counts,
)

__all__ = [
    "ExpectedStats",
    "WindowCounts",
    "counting_rates",
    "phase_slice_error_rate",
    "window_counts",
]
