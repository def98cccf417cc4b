"""snsrs: key rates of SNS twin-field QKD with redundant space."""

__version__ = "0.1.0"
__author__ = "snsrs contributors"
__license__ = "MIT"

from snsrs.config.models import (
    ChannelParams,
    ProtocolParams,
    RunConfig,
    SecurityParams,
)
from snsrs.keyrate.formulas import KeyRateResult
from snsrs.keyrate.pipeline import evaluate

__all__ = [
    "ChannelParams",
    "KeyRateResult",
    "ProtocolParams",
    "RunConfig",
    "SecurityParams",
    "evaluate",
    "__version__",
]
