"""Concentration bounds and entropy."""

from snsrs.stats.chernoff import (
    BoundBudget,
    ConvergenceError,
    chernoff_expected_bounds,
    chernoff_real_bounds,
    phi_lower,
    phi_upper,
    varphi_lower,
    varphi_upper,
)
from snsrs.stats.entropy import binary_entropy

__all__ = [
    "BoundBudget",
    "ConvergenceError",
    "binary_entropy",
    "chernoff_expected_bounds",
    "chernoff_real_bounds",
    "phi_lower",
    "phi_upper",
    "varphi_lower",
    "varphi_upper",
]
