"""Threshold-detector physics shared by the analytic model and the Monte Carlo oracle."""

import numpy as np
from numpy.typing import ArrayLike


def click_probability(intensity: ArrayLike, dark: float) -> np.ndarray:
    """Probability that a threshold detector clicks on a coherent state.

    Args:
        intensity: Mean photon number reaching the detector
        dark: Dark count probability per window

    Returns:
        1 − (1−d)·e^(−I), evaluated without cancellation for small I and d
    """
    return -np.expm1(np.log1p(-dark) - np.asarray(intensity, dtype=float))


def port_intensities(
    amp_alice: ArrayLike,
    amp_bob: ArrayLike,
    cos_delta: ArrayLike,
    e_mis: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean photon numbers at the left and right ports of one mode.

    Amplitudes are √(η·μ) for a sender whose pulse is in the mode and 0 otherwise.

    Returns:
        (I_left, I_right) with I = (x ∓ y′·cos δ)/2
    """
    a = np.asarray(amp_alice, dtype=float)
    b = np.asarray(amp_bob, dtype=float)
    half_x = 0.5 * (a * a + b * b)
    half_y = (1.0 - 2.0 * e_mis) * a * b * np.asarray(cos_delta, dtype=float)
    return half_x - half_y, half_x + half_y


def error_port(cos_delta: ArrayLike) -> np.ndarray:
    """Port (0 = left, 1 = right) that destructive interference darkens.

    A click there is a phase error in the slice.
    """
    return np.where(np.asarray(cos_delta) >= 0.0, 0, 1)
