from .manifest import ManifestEntry, ManifestError, load_manifest, read_manifest
from .report import DuplicateRunError, ReportFiles, emit_report, render_comparison_table
from .scoring import InputError, RunRecord, SampleResult, score_run
from .store import RunStore, StoreBusyError

__all__ = [
    "DuplicateRunError",
    "InputError",
    "ManifestEntry",
    "ManifestError",
    "ReportFiles",
    "RunRecord",
    "RunStore",
    "SampleResult",
    "StoreBusyError",
    "emit_report",
    "load_manifest",
    "read_manifest",
    "render_comparison_table",
    "score_run",
]
