"""Closed-form expected counting statistics under the linear loss model.

Every party puts a non-vacuum pulse into one of m modes; the measurement
station has a left and a right detector per mode. A window is accepted when
exactly one of the 2m detectors clicks and its mode matches every non-vacuum
sender's mode.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import integrate, special

from snsrs.config.models import (
    WINDOW_CLASSES,
    ChannelParams,
    ProtocolParams,
    RunConfig,
    WindowClass,
    per_arm_transmittance,
)
from snsrs.model.detection import click_probability

logger = logging.getLogger(__name__)

QUAD_EPSREL = 1e-10


@dataclass(frozen=True)
class WindowCounts:
    """Expected number of windows per class and mode."""

    n_lr: np.ndarray  # (16, m); the vv row repeats N_vv in every column
    n_vv: float
    cross: np.ndarray  # (16,) two-sided windows whose senders picked different modes
    n_delta: np.ndarray  # (m,) xx same-mode windows inside the phase slice


@dataclass(frozen=True)
class ExpectedStats:
    """Expected rates and counts for one configuration."""

    s_lr: np.ndarray  # (16, m) accepted-event counting rate S_lr(r_j)
    n_lr: np.ndarray  # (16, m) window counts N_lr(r_j)
    cross_windows: np.ndarray  # (16,)
    t_delta: np.ndarray  # (m,)
    n_delta: np.ndarray  # (m,)
    n_windows: int
    fingerprint: str

    @property
    def m(self) -> int:
        return int(self.s_lr.shape[1])

    @property
    def w_tx(self) -> np.ndarray:
        """Expected error events W_TX(r_j) in the phase slice."""
        return self.t_delta * self.n_delta

    def rate(self, cls: WindowClass) -> np.ndarray:
        return self.s_lr[cls.index]

    def windows(self, cls: WindowClass) -> np.ndarray:
        return self.n_lr[cls.index]

    def accepted(self, cls: WindowClass) -> np.ndarray:
        """Expected accepted events per mode."""
        return self.s_lr[cls.index] * self.n_lr[cls.index]

    def rates(self) -> dict[WindowClass, np.ndarray]:
        return {cls: self.s_lr[cls.index] for cls in WINDOW_CLASSES}

    def to_frame(self) -> pd.DataFrame:
        """One row per (class, mode) with columns class, mode, windows, rate."""
        rows = [
            {
                "class": cls.value,
                "mode": j,
                "windows": float(self.n_lr[cls.index, j]),
                "rate": float(self.s_lr[cls.index, j]),
            }
            for cls in WINDOW_CLASSES
            for j in range(self.m)
        ]
        rows += [
            {
                "class": "xx_slice",
                "mode": j,
                "windows": float(self.n_delta[j]),
                "rate": float(self.t_delta[j]),
            }
            for j in range(self.m)
        ]
        return pd.DataFrame(rows, columns=["class", "mode", "windows", "rate"])


def window_counts(params: ProtocolParams) -> WindowCounts:
    """Expected window counts for every class and mode.

    Args:
        params: Source settings

    Returns:
        WindowCounts with N_vv = N·p_v², one-sided N·p_l·p_v·P_j, same-mode
        two-sided N·p_l·p_r·P_j² and N_Δ = (Δ/π)·p_x²·N·P_j²
    """
    n = float(params.n_windows)
    weights = params.mode_weights
    same_mode = weights * weights
    n_lr = np.zeros((len(WINDOW_CLASSES), params.m))
    cross = np.zeros(len(WINDOW_CLASSES))
    n_vv = n * params.p_v * params.p_v

    for cls in WINDOW_CLASSES:
        p_pair = n * params.probability(cls.alice) * params.probability(cls.bob)
        if cls.is_vacuum:
            n_lr[cls.index] = n_vv
        elif cls.is_one_sided:
            n_lr[cls.index] = p_pair * weights
        else:
            n_lr[cls.index] = p_pair * same_mode
            cross[cls.index] = p_pair * max(0.0, 1.0 - float(same_mode.sum()))

    n_delta = (params.slice_width / math.pi) * params.p_x * params.p_x * n * same_mode
    return WindowCounts(n_lr=n_lr, n_vv=n_vv, cross=cross, n_delta=n_delta)


def _no_click_elsewhere(dark: float, m: int) -> float:
    """(1−d)^(2m−1): one detector of the clicked pair plus every other mode stay silent."""
    return math.exp((2 * m - 1) * math.log1p(-dark))


def _one_sided_rate(mu: float, eta: float, dark: float, m: int) -> float:
    half = 0.5 * eta * mu
    click = float(click_probability(half, dark))
    return 2.0 * _no_click_elsewhere(dark, m) * math.exp(-half) * click


def _same_mode_rate(
    mu_l: float, mu_r: float, eta: float, dark: float, e_mis: float, m: int
) -> float:
    """Phase-randomized interference; the mean of e^(−(x±y′cosδ)/2) is e^(−x/2)·I₀(y′/2)."""
    x = eta * (mu_l + mu_r)
    y_vis = (1.0 - 2.0 * e_mis) * 2.0 * eta * math.sqrt(mu_l * mu_r)
    bracket = (float(special.i0(0.5 * y_vis)) - 1.0) - math.expm1(math.log1p(-dark) - 0.5 * x)
    return 2.0 * _no_click_elsewhere(dark, m) * math.exp(-0.5 * x) * bracket


def counting_rates(params: ProtocolParams, channel: ChannelParams) -> ExpectedStats:
    """Expected accepted-event counting rates for every class and mode.

    Rates do not depend on the mode index: each mode sees the same detectors
    and the same rejection rule, only the window counts carry P_j.
    """
    eta = per_arm_transmittance(channel)
    m = params.m
    counts = window_counts(params)
    s_lr = np.zeros((len(WINDOW_CLASSES), m))

    for cls in WINDOW_CLASSES:
        mu_l = params.intensity(cls.alice)
        mu_r = params.intensity(cls.bob)
        if cls.is_vacuum:
            rate = 2.0 * channel.dark * _no_click_elsewhere(channel.dark, m)
        elif cls.is_one_sided:
            rate = _one_sided_rate(mu_l + mu_r, eta, channel.dark, m)
        else:
            rate = _same_mode_rate(mu_l, mu_r, eta, channel.dark, channel.e_mis, m)
        s_lr[cls.index] = rate

    t_delta, _ = phase_slice_error_rate(params, channel)
    stats = ExpectedStats(
        s_lr=s_lr,
        n_lr=counts.n_lr,
        cross_windows=counts.cross,
        t_delta=t_delta,
        n_delta=counts.n_delta,
        n_windows=params.n_windows,
        fingerprint=RunConfig(params, channel).fingerprint(),
    )
    logger.debug(
        f"Counting rates at L={channel.length_km} km, m={m}: "
        f"S_vv={s_lr[WindowClass.VV.index, 0]:.3e} S_zv={s_lr[WindowClass.ZV.index, 0]:.3e} "
        f"S_zz={s_lr[WindowClass.ZZ.index, 0]:.3e} T_delta={t_delta[0]:.3e}"
    )
    return stats


def phase_slice_error_rate(
    params: ProtocolParams, channel: ChannelParams
) -> tuple[np.ndarray, np.ndarray]:
    """Error counting rate T_Δ(r_j) in the xx phase slice and expected W_TX(r_j).

    An error is an accepted click on the port darkened by interference. With
    δ uniform over the slice |δ| ≤ Δ/2 (and its mirror around π) the error
    probability per window is (1−d)^(2m−1)·e^(−x/2)·[e^(−y′|cos δ|/2) − (1−d)e^(−x/2)].

    Returns:
        (T_Δ per mode, W_TX = T_Δ·N_Δ per mode)
    """
    eta = per_arm_transmittance(channel)
    x = 2.0 * eta * params.mu_x
    y_vis = (1.0 - 2.0 * channel.e_mis) * 2.0 * eta * params.mu_x
    half_width = 0.5 * params.slice_width

    integral, _ = integrate.quad(
        lambda delta: math.expm1(-0.5 * y_vis * math.cos(delta)),
        0.0,
        half_width,
        epsabs=0.0,
        epsrel=QUAD_EPSREL,
        limit=200,
    )
    mean_visible = integral / half_width
    dark_term = math.expm1(math.log1p(-channel.dark) - 0.5 * x)
    t_value = _no_click_elsewhere(channel.dark, params.m) * math.exp(-0.5 * x) * (
        mean_visible - dark_term
    )

    t_delta = np.full(params.m, max(t_value, 0.0))
    n_delta = window_counts(params).n_delta
    return t_delta, t_delta * n_delta


__all__ = [
    "ExpectedStats",
    "WindowCounts",
    "counting_rates",
    "phase_slice_error_rate",
    "window_counts",
]
