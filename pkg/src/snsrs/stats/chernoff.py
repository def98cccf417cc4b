"""Chernoff bounds linking observed counts, expected values and real values.

φᴸ/φᵁ bound an expected value from an observed count X:

    X·[δ₁/(1+δ₁) − ln(1+δ₁)] = ln(ε/2),    φᴸ(X) = X/(1+δ₁)
    X·[−δ₂/(1−δ₂) − ln(1−δ₂)] = ln(ε/2),   φᵁ(X) = X/(1−δ₂)

φ̂ᴸ/φ̂ᵁ bound a real value from an expected value Y:

    Y·[δ − (1+δ)·ln(1+δ)] = ln(ε/2),       φ̂ᵁ(Y) = (1+δ)·Y
    Y·[−δ − (1−δ)·ln(1−δ)] = ln(ε/2),      φ̂ᴸ(Y) = (1−δ)·Y, δ ≤ 1

Each equation is solved with a bracketed root finder on a monotone
transformed variable. ε = 2 gives a zero right-hand side and all bounds
collapse onto their argument.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

from scipy import optimize, special

from snsrs.config.settings import ROOT_MAXITER

logger = logging.getLogger(__name__)

_RTOL = 1e-15
_XTOL = 1e-300
_MAX_EXPONENT = 700.0


class ConvergenceError(RuntimeError):
    """Raised when a Chernoff equation cannot be solved."""

    pass


def _log_half_epsilon(epsilon: float) -> float:
    if not 0.0 < epsilon <= 2.0:
        raise ValueError(f"failure probability {epsilon!r} outside (0, 2]")
    return math.log(epsilon / 2.0)


def _check_count(value: float) -> None:
    if not value >= 0.0 or math.isinf(value):
        raise ValueError(f"count {value!r} must be finite and >= 0")


def _solve(func: Callable[[float], float], lo: float, hi: float, what: str) -> float:
    try:
        root = optimize.brentq(func, lo, hi, xtol=_XTOL, rtol=_RTOL, maxiter=ROOT_MAXITER)
    except (RuntimeError, ValueError) as e:
        raise ConvergenceError(f"{what}: {e}") from e
    return float(root)


def _expand(func: Callable[[float], float], start: float, limit: float, what: str) -> float:
    """Double ``start`` until ``func`` turns negative."""
    hi = start
    while func(hi) >= 0.0:
        if hi >= limit:
            raise ConvergenceError(f"{what}: no bracket below {limit}")
        hi = min(2.0 * hi, limit)
    return hi


def phi_lower(x: float, epsilon: float) -> float:
    """Lower bound φᴸ(X) on the expected value behind an observed count."""
    _check_count(x)
    rhs = _log_half_epsilon(epsilon)
    if x == 0.0 or rhs >= 0.0:
        return x
    # s = ln(φᴸ/X) ≤ 0 solves X·(s − expm1(s)) = ln(ε/2); the root lies in [c/X − 1, c/X]
    scaled = rhs / x

    def residual(s: float) -> float:
        return x * (s - math.expm1(s)) - rhs

    s = _solve(residual, scaled - 1.0, min(scaled, 0.0), "phi_lower")
    return x * math.exp(s)


def phi_upper(x: float, epsilon: float) -> float:
    """Upper bound φᵁ(X) on the expected value behind an observed count.

    φᵁ(0) = ln(2/ε), the limit of the defining equation as δ₂ → 1.
    """
    _check_count(x)
    rhs = _log_half_epsilon(epsilon)
    if rhs >= 0.0:
        return x
    if x == 0.0:
        return -rhs

    # t = φᵁ − X ≥ 0 solves −t + X·ln(1 + t/X) = ln(ε/2)
    def residual(t: float) -> float:
        return -t + x * math.log1p(t / x) - rhs

    start = -rhs + 2.0 * math.sqrt(-2.0 * rhs * x) + 1.0
    hi = _expand(residual, start, math.inf, "phi_upper")
    return x + _solve(residual, 0.0, hi, "phi_upper")


def varphi_upper(y: float, epsilon: float) -> float:
    """Upper bound φ̂ᵁ(Y) on the real value behind an expected value."""
    _check_count(y)
    rhs = _log_half_epsilon(epsilon)
    if rhs >= 0.0:
        return y
    if y == 0.0:
        logger.warning("Chernoff bound on an empty sample; returning 0")
        return 0.0

    # w = ln(1+δ) ≥ 0 solves Y·(expm1(w) − w·e^w) = ln(ε/2)
    def residual(w: float) -> float:
        return y * (math.expm1(w) - w * math.exp(w)) - rhs

    hi = _expand(residual, 1.0, _MAX_EXPONENT, "varphi_upper")
    return y * math.exp(_solve(residual, 0.0, hi, "varphi_upper"))


def varphi_lower(y: float, epsilon: float) -> float:
    """Lower bound φ̂ᴸ(Y) on the real value behind an expected value; δ is clamped to 1."""
    _check_count(y)
    rhs = _log_half_epsilon(epsilon)
    if rhs >= 0.0:
        return y
    if y == 0.0:
        logger.warning("Chernoff bound on an empty sample; returning 0")
        return 0.0
    if -y >= rhs:
        # The left-hand side never drops below −Y on [0, 1]
        return 0.0

    def residual(delta: float) -> float:
        return y * (-delta - float(special.xlog1py(1.0 - delta, -delta))) - rhs

    delta = _solve(residual, 0.0, 1.0, "varphi_lower")
    return (1.0 - delta) * y


def chernoff_expected_bounds(x: float, epsilon: float) -> tuple[float, float]:
    """(φᴸ(X), φᵁ(X)) for an observed count X.

    Raises:
        ValueError: If X < 0 or ε outside (0, 2]
        ConvergenceError: If the root finder fails
    """
    return phi_lower(x, epsilon), phi_upper(x, epsilon)


def chernoff_real_bounds(y: float, epsilon: float) -> tuple[float, float]:
    """(φ̂ᴸ(Y), φ̂ᵁ(Y)) for an expected value Y; Y = 0 gives (0, 0) with a warning."""
    return varphi_lower(y, epsilon), varphi_upper(y, epsilon)


@dataclass
class BoundBudget:
    """Counts bound invocations; each one spends ``epsilon`` of the failure budget."""

    epsilon: float
    invocation_log: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        _log_half_epsilon(self.epsilon)

    @property
    def invocations(self) -> int:
        return len(self.invocation_log)

    @property
    def spent(self) -> float:
        return self.invocations * self.epsilon

    def phi_lower(self, x: float) -> float:
        self.invocation_log.append("phi_lower")
        return phi_lower(x, self.epsilon)

    def phi_upper(self, x: float) -> float:
        self.invocation_log.append("phi_upper")
        return phi_upper(x, self.epsilon)

    def varphi_lower(self, y: float) -> float:
        self.invocation_log.append("varphi_lower")
        return varphi_lower(y, self.epsilon)

    def varphi_upper(self, y: float) -> float:
        self.invocation_log.append("varphi_upper")
        return varphi_upper(y, self.epsilon)
