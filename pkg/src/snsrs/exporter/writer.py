"""CSV tables and run manifests."""

import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import pandas as pd

from snsrs.config.settings import CSV_FLOAT_FORMAT, MANIFEST_SCHEMA_VERSION, RNG_ALGORITHM

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    """Everything needed to rerun a command and reproduce its table."""

    command: str
    config: dict[str, float | int]
    options: dict[str, Any]
    seed: int
    tool_version: str
    budget_spent: float = 0.0
    rng: str = RNG_ALGORITHM
    schema_version: int = MANIFEST_SCHEMA_VERSION
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        """Parse a manifest.

        Raises:
            ValueError: On malformed JSON, missing fields or an unknown schema version
        """
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValueError(f"Malformed manifest: {e}") from e
        if data.get("schema_version") != MANIFEST_SCHEMA_VERSION:
            raise ValueError(f"Unsupported manifest schema: {data.get('schema_version')!r}")
        try:
            return cls(**data)
        except TypeError as e:
            raise ValueError(f"Malformed manifest: {e}") from e


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def trace_path(out: Path) -> Path:
    return out.with_name(out.name + ".trace.csv")


class ResultExporter:
    """Write tables as CSV with a stable float format, atomically."""

    def __init__(self, float_format: str = CSV_FLOAT_FORMAT) -> None:
        self.float_format = float_format

    def render(self, frame: pd.DataFrame) -> str:
        """CSV text with a header row, comma delimited, no index."""
        text: str = frame.to_csv(index=False, float_format=self.float_format, lineterminator="\n")
        return text

    def write_text(self, text: str, path: Path) -> Path:
        """Replace ``path`` with ``text`` via a temporary file in the same directory.

        Raises:
            FileNotFoundError: If the parent directory does not exist
        """
        if not path.parent.exists():
            raise FileNotFoundError(f"Output directory not found: {path.parent}")

        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
        logger.debug(f"Wrote {path}")
        return path

    def write_table(self, frame: pd.DataFrame, path: Path) -> Path:
        return self.write_text(self.render(frame), path)

    def write_run(
        self,
        frame: pd.DataFrame,
        manifest: RunManifest,
        out: Path,
        trace: pd.DataFrame | None = None,
    ) -> list[Path]:
        """Write the table, its manifest and an optional optimizer trace.

        Returns:
            Paths written, table first
        """
        written = [self.write_table(frame, out)]
        if trace is not None:
            written.append(self.write_table(trace, trace_path(out)))
        written.append(self.write_text(manifest.to_json(), manifest_path(out)))
        return written


def load_manifest(path: Path) -> RunManifest:
    """Read a manifest file.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If it is not a valid manifest
    """
    if not path.exists():
        raise FileNotFoundError(f"Manifest not found: {path}")
    return RunManifest.from_json(path.read_text(encoding="utf-8"))
