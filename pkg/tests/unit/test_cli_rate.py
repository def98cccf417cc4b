"""Contract tests for CLI rate command."""

import io
import subprocess
from collections.abc import Callable
from pathlib import Path

import pandas as pd
import pytest

from snsrs.keyrate.formulas import CSV_COLUMNS

RunCli = Callable[..., subprocess.CompletedProcess[str]]


def _table(result: subprocess.CompletedProcess[str]) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(result.stdout))


@pytest.mark.unit
class TestCliRateCommand:
    """Test suite for snsrs rate command."""

    def test_rate_for_device_row(self, run_cli: RunCli) -> None:
        """Test that rate prints one CSV row and the manifest on stderr."""
        result = run_cli("rate", "--row", "A", "--distance-km", "50", "--m", "2")

        assert result.returncode == 0, result.stderr
        table = _table(result)
        assert list(table.columns) == CSV_COLUMNS
        assert len(table) == 1
        assert table["rate"].iloc[0] > 0.0
        assert table["m"].iloc[0] == 2
        assert '"command": "rate"' in result.stderr

    def test_rate_beyond_reach_is_zero(self, run_cli: RunCli) -> None:
        """Test that an unreachable distance is a zero rate, not an error."""
        result = run_cli("rate", "--row", "A", "--distance-km", "600")

        assert result.returncode == 0, result.stderr
        assert _table(result)["rate"].iloc[0] == 0.0

    def test_config_file_matches_row(self, run_cli: RunCli, config_file: Path) -> None:
        """Test that a written configuration reproduces the preset output."""
        from_file = run_cli("rate", "--config", str(config_file))
        from_row = run_cli("rate", "--row", "A", "--distance-km", "50", "--m", "2")

        assert from_file.returncode == 0, from_file.stderr
        assert from_file.stdout == from_row.stdout

    def test_asymptotic_rate_is_higher(self, run_cli: RunCli, config_file: Path) -> None:
        """Test that --asymptotic drops the finite-size penalty."""
        finite = _table(run_cli("rate", "--config", str(config_file)))
        asymptotic = _table(run_cli("rate", "--config", str(config_file), "--asymptotic"))

        assert asymptotic["rate"].iloc[0] > finite["rate"].iloc[0]

    def test_budget_optimizes_first(self, run_cli: RunCli, config_file: Path) -> None:
        """Test that a short optimization does not lose rate."""
        plain = _table(run_cli("rate", "--config", str(config_file)))
        result = run_cli("rate", "--config", str(config_file), "--budget", "20")

        assert result.returncode == 0, result.stderr
        assert _table(result)["rate"].iloc[0] >= plain["rate"].iloc[0]

    def test_out_writes_table_and_manifest(
        self, run_cli: RunCli, config_file: Path, tmp_path: Path
    ) -> None:
        """Test that --out writes files instead of printing CSV."""
        out = tmp_path / "rate.csv"
        result = run_cli("rate", "--config", str(config_file), "--out", str(out))

        assert result.returncode == 0, result.stderr
        assert result.stdout == ""
        assert out.read_text().startswith("distance_km,m,")
        assert (tmp_path / "rate.csv.manifest.json").exists()
        assert "Wrote" in result.stderr

    def test_config_and_row_conflict(self, run_cli: RunCli, config_file: Path) -> None:
        """Test that --config and --row together exit with code 2."""
        result = run_cli("rate", "--config", str(config_file), "--row", "A")

        assert result.returncode == 2
        assert "not both" in result.stderr

    def test_no_configuration_exits_2(self, run_cli: RunCli) -> None:
        """Test that a configuration source is required."""
        result = run_cli("rate")

        assert result.returncode == 2
        assert "no configuration" in result.stderr

    def test_unknown_row_exits_2(self, run_cli: RunCli) -> None:
        """Test that an unknown device row exits with code 2."""
        result = run_cli("rate", "--row", "Q")

        assert result.returncode == 2
        assert "unknown device row" in result.stderr

    def test_missing_config_exits_2(self, run_cli: RunCli, tmp_path: Path) -> None:
        """Test that a missing configuration file exits with code 2."""
        result = run_cli("rate", "--config", str(tmp_path / "absent.cfg"))

        assert result.returncode == 2
        assert "Config not found" in result.stderr

    def test_invalid_config_lists_violations(self, run_cli: RunCli, config_file: Path) -> None:
        """Test that configuration violations exit with code 2."""
        text = config_file.read_text().replace("p_v = 0.65", "p_v = 0.9")
        config_file.write_text(text)

        result = run_cli("rate", "--config", str(config_file))

        assert result.returncode == 2
        assert "sum to" in result.stderr
        assert result.stdout == ""

    def test_unknown_log_level(self, run_cli: RunCli) -> None:
        """Test that a bad --log-level is a usage error."""
        result = run_cli("--log-level", "LOUD", "rate", "--row", "A")

        assert result.returncode == 2
