"""Flat ``key = value`` configuration files."""

import logging
from pathlib import Path

from snsrs.config.models import (
    ChannelParams,
    ConfigurationError,
    ProtocolParams,
    RunConfig,
    SecurityParams,
    validate,
)
from snsrs.config.settings import (
    DEFAULT_SOURCE,
    DEVICE_ROWS,
    ROW_ALPHA_DB_KM,
    ROW_F_EC,
    ROW_XI,
)

logger = logging.getLogger(__name__)

# File key -> (section, attribute)
CONFIG_KEYS: dict[str, tuple[str, str]] = {
    "p_v": ("protocol", "p_v"),
    "p_x": ("protocol", "p_x"),
    "p_y": ("protocol", "p_y"),
    "p_z": ("protocol", "p_z"),
    "mu_x": ("protocol", "mu_x"),
    "mu_y": ("protocol", "mu_y"),
    "mu_z": ("protocol", "mu_z"),
    "m": ("protocol", "m"),
    "lambda": ("protocol", "lambda_slice"),
    "N": ("protocol", "n_windows"),
    "L_km": ("channel", "length_km"),
    "alpha_db_km": ("channel", "alpha"),
    "eta0": ("channel", "eta0"),
    "dark": ("channel", "dark"),
    "e_mis": ("channel", "e_mis"),
    "xi": ("security", "xi"),
    "eps_cor": ("security", "eps_cor"),
    "eps_pa": ("security", "eps_pa"),
    "eps_hat": ("security", "eps_hat"),
    "f_ec": ("security", "f_ec"),
}
INTEGER_KEYS = frozenset({"m", "N"})


def _parse_number(key: str, raw: str) -> float | int:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigurationError([f"{key}: not a number: {raw!r}"]) from None
    if key in INTEGER_KEYS:
        if not value.is_integer():
            raise ConfigurationError([f"{key}: expected an integer, got {raw!r}"])
        return int(value)
    return value


def parse_config(text: str) -> RunConfig:
    """Parse configuration text and validate it.

    Args:
        text: One ``key = value`` per line; ``#`` starts a comment

    Returns:
        Validated RunConfig

    Raises:
        ConfigurationError: On unknown, duplicate, missing or invalid keys
    """
    values: dict[str, float | int] = {}
    problems: list[str] = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            problems.append(f"line {lineno}: expected 'key = value'")
            continue
        key, raw = (part.strip() for part in content.split("=", 1))
        if key not in CONFIG_KEYS:
            problems.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            problems.append(f"line {lineno}: duplicate key {key!r}")
            continue
        try:
            values[key] = _parse_number(key, raw)
        except ConfigurationError as e:
            problems.extend(f"line {lineno}: {v}" for v in e.violations)

    missing = [key for key in CONFIG_KEYS if key not in values]
    if missing:
        problems.append(f"missing keys: {', '.join(missing)}")
    if problems:
        raise ConfigurationError(problems)

    sections: dict[str, dict[str, float | int]] = {"protocol": {}, "channel": {}, "security": {}}
    for key, value in values.items():
        section, attribute = CONFIG_KEYS[key]
        sections[section][attribute] = value

    return validate(
        ProtocolParams(**sections["protocol"]),  # type: ignore[arg-type]
        ChannelParams(**sections["channel"]),
        SecurityParams(**sections["security"]),
    )


def load_config(path: Path) -> RunConfig:
    """Read and validate a configuration file."""
    logger.debug(f"Loading configuration from {path}")
    return parse_config(path.read_text(encoding="utf-8"))


def config_values(config: RunConfig) -> dict[str, float | int]:
    """Configuration as a flat mapping of file keys to values."""
    return {
        key: getattr(getattr(config, section), attribute)
        for key, (section, attribute) in CONFIG_KEYS.items()
    }


def serialize_config(config: RunConfig) -> str:
    """Render a configuration in the file format; floats use shortest round-trip repr."""
    lines = []
    for key, value in config_values(config).items():
        rendered = str(value) if key in INTEGER_KEYS else repr(float(value))
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def config_from_values(values: dict[str, float | int]) -> RunConfig:
    """Inverse of config_values; validates like a file.

    Raises:
        ConfigurationError: On unknown, missing or invalid keys
    """
    lines = []
    for key, value in values.items():
        rendered = str(int(value)) if key in INTEGER_KEYS else repr(float(value))
        lines.append(f"{key} = {rendered}")
    return parse_config("\n".join(lines))


def preset_config(row: str, length_km: float = 0.0, m: int = 2) -> RunConfig:
    """Configuration for a device row with the default source settings.

    Raises:
        KeyError: If the row is unknown
    """
    device = DEVICE_ROWS[row.upper()]
    source = DEFAULT_SOURCE
    p_z = 1.0 - source["p_v"] - source["p_x"] - source["p_y"]
    return validate(
        ProtocolParams(
            p_v=source["p_v"],
            p_x=source["p_x"],
            p_y=source["p_y"],
            p_z=p_z,
            mu_x=source["mu_x"],
            mu_y=source["mu_y"],
            mu_z=source["mu_z"],
            m=m,
            lambda_slice=source["lambda_slice"],
            n_windows=int(device["N"]),
        ),
        ChannelParams(
            length_km=length_km,
            alpha=ROW_ALPHA_DB_KM,
            eta0=device["eta0"],
            dark=device["dark"],
            e_mis=device["e_mis"],
        ),
        SecurityParams(xi=ROW_XI, eps_cor=ROW_XI, eps_pa=ROW_XI, eps_hat=ROW_XI, f_ec=ROW_F_EC),
    )
