"""Decoy-state analysis."""

from snsrs.decoy.estimator import (
    CountSource,
    DecoyResult,
    NoUntaggedBitsError,
    asymptotic_decoy,
    e1ph_upper,
    finite_key_decoy,
    n1_lower,
    n1_mean_lower,
    s1_mean,
)

__all__ = [
    "CountSource",
    "DecoyResult",
    "NoUntaggedBitsError",
    "asymptotic_decoy",
    "e1ph_upper",
    "finite_key_decoy",
    "n1_lower",
    "n1_mean_lower",
    "s1_mean",
]
