"""Derivative-free optimization of the source settings."""

from snsrs.optimizer.search import (
    InfeasibleProblemError,
    OptimizationProblem,
    OptimizationResult,
    ScanPoint,
    TraceEntry,
    golden_section_max,
    optimize,
    scan,
    trace_frame,
)

__all__ = [
    "InfeasibleProblemError",
    "OptimizationProblem",
    "OptimizationResult",
    "ScanPoint",
    "TraceEntry",
    "golden_section_max",
    "optimize",
    "scan",
    "trace_frame",
]
