"""Code bits, key length and the full key-rate pipeline."""

from snsrs.keyrate.formulas import (
    CodeBits,
    KeyRateResult,
    code_bits,
    key_length,
    plob_bound,
    qber_approx,
    qber_closed_form,
    raw_key_length,
)
from snsrs.keyrate.pipeline import (
    comparison_frame,
    evaluate,
    evaluate_original_sns,
    infeasible_length,
    results_frame,
)

__all__ = [
    "CodeBits",
    "KeyRateResult",
    "code_bits",
    "comparison_frame",
    "evaluate",
    "evaluate_original_sns",
    "infeasible_length",
    "key_length",
    "plob_bound",
    "qber_approx",
    "qber_closed_form",
    "raw_key_length",
    "results_frame",
]
