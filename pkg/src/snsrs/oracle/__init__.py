"""Monte Carlo oracle for the analytic model."""

from snsrs.oracle.simulator import (
    BinDeviation,
    ConfigMismatchError,
    ObservedCounts,
    SenderChoice,
    TrialRecord,
    compare,
    poisson_z,
    report_frame,
    simulate,
    simulate_records,
    z_scores,
)

__all__ = [
    "BinDeviation",
    "ConfigMismatchError",
    "ObservedCounts",
    "SenderChoice",
    "TrialRecord",
    "compare",
    "poisson_z",
    "report_frame",
    "simulate",
    "simulate_records",
    "z_scores",
]
