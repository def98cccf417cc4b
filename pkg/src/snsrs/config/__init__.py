"""Configuration types, settings and file format."""

from snsrs.config.loader import (
    config_from_values,
    config_values,
    load_config,
    parse_config,
    preset_config,
    serialize_config,
)
from snsrs.config.models import (
    ChannelParams,
    ConfigurationError,
    Intensity,
    ProtocolParams,
    RunConfig,
    SecurityParams,
    WindowClass,
    per_arm_transmittance,
    validate,
)

__all__ = [
    "ChannelParams",
    "ConfigurationError",
    "Intensity",
    "ProtocolParams",
    "RunConfig",
    "SecurityParams",
    "WindowClass",
    "config_from_values",
    "config_values",
    "load_config",
    "parse_config",
    "per_arm_transmittance",
    "preset_config",
    "serialize_config",
    "validate",
]
