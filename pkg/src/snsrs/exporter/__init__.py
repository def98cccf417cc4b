"""CSV and manifest output."""

from snsrs.exporter.writer import (
    ResultExporter,
    RunManifest,
    load_manifest,
    manifest_path,
    trace_path,
)

__all__ = ["ResultExporter", "RunManifest", "load_manifest", "manifest_path", "trace_path"]
