"""Binary Shannon entropy."""

import math

from scipy import special


def binary_entropy(x: float) -> float:
    """H(x) = −x·log₂x − (1−x)·log₂(1−x), with H(0) = H(1) = 0.

    Raises:
        ValueError: If x is outside [0, 1]
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument {x!r} outside [0, 1]")
    return float((special.entr(x) + special.entr(1.0 - x)) / math.log(2.0))
