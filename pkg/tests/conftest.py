"""Pytest configuration and shared fixtures."""

import os
import subprocess
import sys
from collections.abc import Callable
from pathlib import Path

import pytest

from snsrs.config import (
    ChannelParams,
    ProtocolParams,
    RunConfig,
    SecurityParams,
    preset_config,
    serialize_config,
    validate,
)


@pytest.fixture
def row_a_config() -> RunConfig:
    """Device row A at 50 km with two modes."""
    return preset_config("A", length_km=50.0, m=2)


@pytest.fixture
def row_c_config() -> RunConfig:
    """Device row C at 0 km with two modes."""
    return preset_config("C", m=2)


@pytest.fixture
def source_params() -> ProtocolParams:
    """Valid source settings with one mode."""
    return ProtocolParams(
        p_v=0.65,
        p_x=0.15,
        p_y=0.15,
        p_z=0.05,
        mu_x=0.1,
        mu_y=0.4,
        mu_z=0.3,
        m=1,
        lambda_slice=0.05,
        n_windows=10**10,
    )


@pytest.fixture
def noiseless_channel() -> ChannelParams:
    """50 km channel without dark counts."""
    return ChannelParams(length_km=50.0, alpha=0.2, eta0=0.5, dark=0.0, e_mis=0.03)


@pytest.fixture
def make_config(source_params: ProtocolParams) -> Callable[..., RunConfig]:
    """Factory for validated configurations built from the default source settings."""

    def factory(
        channel: ChannelParams | None = None,
        security: SecurityParams | None = None,
        **changes: float,
    ) -> RunConfig:
        params = ProtocolParams(**{**vars(source_params), **changes})
        return validate(
            params,
            channel or ChannelParams(length_km=50.0, dark=1e-8),
            security or SecurityParams(),
        )

    return factory


@pytest.fixture
def config_file(tmp_path: Path, row_a_config: RunConfig) -> Path:
    """Row A configuration written to disk."""
    path = tmp_path / "row_a.cfg"
    path.write_text(serialize_config(row_a_config))
    return path


@pytest.fixture
def run_cli() -> Callable[..., subprocess.CompletedProcess[str]]:
    """Run ``python -m snsrs.cli.main`` with the given arguments."""
    env = {**os.environ, "COLUMNS": "200"}

    def run(*args: str, timeout: float = 120) -> subprocess.CompletedProcess[str]:
        return subprocess.run(
            [sys.executable, "-m", "snsrs.cli.main", *args],
            capture_output=True,
            text=True,
            timeout=timeout,
            env=env,
        )

    return run
