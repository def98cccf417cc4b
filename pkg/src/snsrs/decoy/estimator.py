"""Four-intensity decoy-state estimation of untagged bits and their phase-flip error rate."""

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from snsrs.config.models import ProtocolParams, SecurityParams, WindowClass
from snsrs.model.analytic import ExpectedStats
from snsrs.stats.chernoff import BoundBudget

logger = logging.getLogger(__name__)

E1PH_MAX = 0.5


class CountSource(Protocol):
    """Accepted-event tallies per mode, expected or observed."""

    @property
    def n_windows(self) -> int: ...

    @property
    def m(self) -> int: ...

    @property
    def w_tx(self) -> np.ndarray: ...

    def accepted(self, cls: WindowClass) -> np.ndarray: ...


class NoUntaggedBitsError(ValueError):
    """Raised when the lower bound on untagged bits is not positive; the key rate is 0."""

    def __init__(self, n1_mean: float, s1_mean: float | None = None) -> None:
        self.n1_mean = n1_mean
        # ⟨s₁⟩ᴸ behind the shortfall; independent of p_z and mu_z
        self.s1_mean = s1_mean
        super().__init__(f"no untagged bits (lower bound {n1_mean:.6g}); key rate 0")


@dataclass(frozen=True)
class DecoyResult:
    """Bounds on untagged bits with the failure budget spent to obtain them."""

    n1: float
    e1ph: float
    s1_mean_L: float
    n1_mean_L: float
    flags: frozenset[str] = frozenset()
    intermediates: dict[str, float] = field(default_factory=dict)
    budget_spent: float = 0.0


def _check_intensities(params: ProtocolParams) -> None:
    if not 0.0 < params.mu_x < params.mu_y:
        raise ValueError("decoy analysis requires 0 < mu_x < mu_y")


def _single_photon_factor(params: ProtocolParams) -> float:
    """2·p_v·p_z·μ_z·e^(−μ_z): untagged-window weight per unit of ⟨s₁⟩."""
    return 2.0 * params.p_v * params.p_z * params.mu_z * math.exp(-params.mu_z)


def _per_unit_weight(n1_mean: float, n_windows: int, params: ProtocolParams) -> float:
    factor = n_windows * _single_photon_factor(params)
    return n1_mean / factor if factor > 0.0 else 0.0


def _no_untagged(
    n1_mean: float, counts: CountSource, params: ProtocolParams
) -> NoUntaggedBitsError:
    return NoUntaggedBitsError(n1_mean, _per_unit_weight(n1_mean, counts.n_windows, params))


def _s1_unclamped(rates: Mapping[WindowClass, np.ndarray], params: ProtocolParams) -> np.ndarray:
    _check_intensities(params)
    mu_x, mu_y = params.mu_x, params.mu_y
    s_plus = mu_y**2 * math.exp(mu_x) * (rates[WindowClass.VX] + rates[WindowClass.XV])
    s_minus = mu_x**2 * math.exp(mu_y) * (rates[WindowClass.VY] + rates[WindowClass.YV])
    vacuum = 2.0 * (mu_y**2 - mu_x**2) * rates[WindowClass.VV]
    denominator = 2.0 * mu_x * mu_y * (mu_y - mu_x)
    return np.asarray((s_plus - s_minus - vacuum) / denominator, dtype=float)


def s1_mean(rates: Mapping[WindowClass, np.ndarray], params: ProtocolParams) -> np.ndarray:
    """Lower bound on the single-photon counting rate ⟨s₁(r_j)⟩ of each mode.

    Args:
        rates: Counting rates S_lr(r_j) for at least the vv, vx, xv, vy, yv classes
        params: Source settings with 0 < mu_x < mu_y

    Returns:
        Per-mode values, negative estimates clamped to 0
    """
    raw = _s1_unclamped(rates, params)
    if np.any(raw < 0.0):
        logger.debug(f"Negative single-photon rate estimate {raw.min():.3e} clamped to 0")
    return np.clip(raw, 0.0, None)


def _require_uniform(params: ProtocolParams) -> None:
    if not params.is_uniform:
        raise ValueError("finite-key decoy analysis requires uniform mode probabilities")


def n1_mean_lower(counts: CountSource, params: ProtocolParams, budget: BoundBudget) -> float:
    """⟨n₁⟩ᴸ with the Chernoff bounds applied to the mode-summed tallies (may be negative)."""
    _check_intensities(params)
    _require_uniform(params)
    n = float(counts.n_windows)
    mu_x, mu_y, m = params.mu_x, params.mu_y, params.m

    sum_x = float(np.sum(counts.accepted(WindowClass.VX) + counts.accepted(WindowClass.XV)))
    sum_y = float(np.sum(counts.accepted(WindowClass.VY) + counts.accepted(WindowClass.YV)))
    sum_vv = float(np.sum(counts.accepted(WindowClass.VV)))

    term_x = math.exp(mu_x) * mu_y**2 / (n * params.p_v * params.p_x) * budget.phi_lower(sum_x)
    term_y = math.exp(mu_y) * mu_x**2 / (n * params.p_v * params.p_y) * budget.phi_upper(sum_y)
    term_v = 2.0 * (mu_y**2 - mu_x**2) / m / (n * params.p_v**2) * budget.phi_upper(sum_vv)
    prefactor = n * _single_photon_factor(params) / (2.0 * mu_x * mu_y * (mu_y - mu_x))
    return prefactor * (term_x - term_y - term_v)


def n1_lower(
    observed: CountSource,
    params: ProtocolParams,
    security: SecurityParams,
    epsilon: float | None = None,
    budget: BoundBudget | None = None,
) -> float:
    """Lower bound n₁ = φ̂ᴸ(⟨n₁⟩ᴸ) on untagged bits, clamped at 0.

    Raises:
        ValueError: If the mode probabilities are not uniform
    """
    budget = budget or BoundBudget(security.xi if epsilon is None else epsilon)
    mean = n1_mean_lower(observed, params, budget)
    if mean <= 0.0:
        return 0.0
    return budget.varphi_lower(mean)


def e1ph_upper(
    observed: CountSource,
    params: ProtocolParams,
    security: SecurityParams,
    n1_mean_L: float,
    epsilon: float | None = None,
    n1: float | None = None,
    budget: BoundBudget | None = None,
) -> float:
    """Upper bound on the phase-flip error rate of untagged bits, clamped to [0, 0.5].

    Args:
        observed: Tallies with W_TX(r_j) and vv counts
        params: Source settings
        security: Supplies ξ when no epsilon override is given
        n1_mean_L: Lower bound ⟨n₁⟩ᴸ
        epsilon: Failure probability override per bound
        n1: φ̂ᴸ(⟨n₁⟩ᴸ) if already known
        budget: Shared invocation counter

    Raises:
        NoUntaggedBitsError: If n1_mean_L or n1 is not positive
    """
    if n1_mean_L <= 0.0:
        raise _no_untagged(n1_mean_L, observed, params)
    _require_uniform(params)
    budget = budget or BoundBudget(security.xi if epsilon is None else epsilon)
    if n1 is None:
        n1 = budget.varphi_lower(n1_mean_L)
    if n1 <= 0.0:
        raise _no_untagged(n1_mean_L, observed, params)

    e1ph, _ = _real_error_rate(_e1_mean_upper(observed, params, n1_mean_L, budget), n1, budget)
    return e1ph


def _e1_mean_upper(
    observed: CountSource, params: ProtocolParams, n1_mean_L: float, budget: BoundBudget
) -> float:
    mu_x, m = params.mu_x, params.m
    signal = params.mu_z * math.exp(-params.mu_z)
    sum_w = float(np.sum(observed.w_tx))
    sum_vv = float(np.sum(observed.accepted(WindowClass.VV)))

    scale_w = (params.p_v * params.p_z * signal * math.pi * m) / (
        params.p_x**2 * mu_x * math.exp(-2.0 * mu_x) * params.slice_width * n1_mean_L
    )
    scale_v = params.p_z * signal / (2.0 * params.p_v * mu_x * n1_mean_L * m)
    return scale_w * budget.phi_upper(sum_w) - scale_v * budget.phi_lower(sum_vv)


def _real_error_rate(
    e1_mean: float, n1: float, budget: BoundBudget
) -> tuple[float, set[str]]:
    """e₁ᵖʰ = φ̂ᵁ(n₁·⟨e₁ᵖʰ⟩ᵁ)/n₁ clamped to [0, 0.5], with the clamp flags raised."""
    if e1_mean < 0.0:
        return 0.0, {"e1ph_negative_clamped"}
    if e1_mean == 0.0:
        return 0.0, set()
    e1ph = budget.varphi_upper(n1 * e1_mean) / n1
    if e1ph > E1PH_MAX:
        return E1PH_MAX, {"e1ph_clamped"}
    return e1ph, set()


def finite_key_decoy(
    counts: CountSource,
    params: ProtocolParams,
    security: SecurityParams,
    epsilon: float | None = None,
) -> DecoyResult:
    """Finite-key n₁ and e₁ᵖʰ with every bound spending ξ (or ``epsilon``).

    Raises:
        NoUntaggedBitsError: If no untagged bits survive the bounds
        ValueError: If the mode probabilities are not uniform
    """
    budget = BoundBudget(security.xi if epsilon is None else epsilon)
    n1_mean_L = n1_mean_lower(counts, params, budget)
    if n1_mean_L <= 0.0:
        raise _no_untagged(n1_mean_L, counts, params)
    n1 = budget.varphi_lower(n1_mean_L)
    if n1 <= 0.0:
        raise _no_untagged(n1_mean_L, counts, params)

    e1_mean = _e1_mean_upper(counts, params, n1_mean_L, budget)
    e1ph, flags = _real_error_rate(e1_mean, n1, budget)

    return DecoyResult(
        n1=n1,
        e1ph=e1ph,
        s1_mean_L=_per_unit_weight(n1_mean_L, counts.n_windows, params),
        n1_mean_L=n1_mean_L,
        flags=frozenset(flags),
        intermediates={"e1_mean_U": e1_mean, "bound_invocations": float(budget.invocations)},
        budget_spent=budget.spent,
    )


def asymptotic_decoy(stats: ExpectedStats, params: ProtocolParams) -> DecoyResult:
    """Per-mode estimates from expected rates, without statistical fluctuation.

    Non-uniform mode probabilities are supported; e₁ᵖʰ is the n₁-weighted mean
    of the per-mode values.

    Raises:
        NoUntaggedBitsError: If every per-mode ⟨s₁⟩ is 0
    """
    flags: set[str] = set()
    raw = _s1_unclamped(stats.rates(), params)
    if np.any(raw < 0.0):
        flags.add("s1_negative_clamped")
    s1 = np.clip(raw, 0.0, None)

    weights = params.mode_weights
    scale = stats.n_windows * _single_photon_factor(params)
    n1_per_mode = scale * weights * s1
    n1 = float(n1_per_mode.sum())
    if n1 <= 0.0:
        raise NoUntaggedBitsError(scale * float(raw @ weights), float(raw @ weights))

    damping = math.exp(-2.0 * params.mu_x)
    s_vv = stats.rate(WindowClass.VV)
    with np.errstate(divide="ignore", invalid="ignore"):
        e1_per_mode = np.where(
            s1 > 0.0,
            (stats.t_delta - 0.5 * damping * s_vv) / (2.0 * params.mu_x * damping * s1),
            E1PH_MAX,
        )
    e1ph = float(n1_per_mode @ e1_per_mode) / n1
    if e1ph < 0.0:
        flags.add("e1ph_negative_clamped")
        e1ph = 0.0
    if e1ph > E1PH_MAX:
        flags.add("e1ph_clamped")
        e1ph = E1PH_MAX

    return DecoyResult(
        n1=n1,
        e1ph=e1ph,
        s1_mean_L=float(weights @ s1),
        n1_mean_L=n1,
        flags=frozenset(flags),
        intermediates={"e1_mean_U": e1ph},
        budget_spent=0.0,
    )
