"""Scan orchestration: dispatch to adapters, enforce timeouts, persist reports."""

from __future__ import annotations

import json
import logging
import os
import threading
import uuid
from pathlib import Path

from ..errors import InputError
from ..model import NormalizedReport, ReportStatus, utcnow
from .registry import AnalyzerRegistry, ScanRequest

log = logging.getLogger(__name__)

_SKIP_DIRS = {".git", ".hg", "node_modules", "__pycache__", "build", "target", "out"}

_EXTENSION_LANGUAGES = {
    ".java": "java",
    ".py": "python",
    ".js": "javascript",
    ".jsx": "javascript",
    ".ts": "typescript",
    ".tsx": "typescript",
    ".go": "go",
    ".rb": "ruby",
    ".kt": "kotlin",
    ".c": "c",
    ".h": "c",
    ".cc": "cpp",
    ".cpp": "cpp",
    ".hpp": "cpp",
    ".cs": "csharp",
    ".rs": "rust",
}


def new_report_id() -> str:
    return uuid.uuid4().hex


def detect_project_language(path: str | Path) -> str | None:
    """Majority vote over source-file extensions; None when nothing matches."""
    counts: dict[str, int] = {}
    for dirpath, dirnames, filenames in os.walk(path):
        dirnames[:] = [d for d in dirnames if d not in _SKIP_DIRS]
        for name in filenames:
            language = _EXTENSION_LANGUAGES.get(Path(name).suffix.lower())
            if language:
                counts[language] = counts.get(language, 0) + 1
    if not counts:
        return None
    return min(counts, key=lambda lang: (-counts[lang], lang))


class ReportStore:
    """Filesystem store for normalized reports and clone-pair sidecars.

    Layout: ``<data_dir>/reports/<report_id>.json`` (canonical JSON) and
    ``<report_id>.clones.json`` for clone pairs.
    """

    def __init__(self, data_dir: str | Path):
        self._dir = Path(data_dir) / "reports"
        self._dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, report_id: str) -> Path:
        return self._dir / f"{report_id}.json"

    def clones_path_for(self, report_id: str) -> Path:
        return self._dir / f"{report_id}.clones.json"

    def save(self, report: NormalizedReport) -> Path:
        path = self.path_for(report.report_id)
        path.write_text(report.to_json(), encoding="utf-8")
        return path

    def load(self, report_id: str) -> NormalizedReport:
        return NormalizedReport.from_json(
            self.path_for(report_id).read_text(encoding="utf-8")
        )

    def exists(self, report_id: str) -> bool:
        return self.path_for(report_id).exists()

    def raw_bytes(self, report_id: str) -> bytes:
        return self.path_for(report_id).read_bytes()

    def save_clones(self, report_id: str, pairs: list[dict]) -> Path:
        path = self.clones_path_for(report_id)
        path.write_text(json.dumps(pairs, indent=2) + "\n", encoding="utf-8")
        return path

    def load_clones(self, report_id: str) -> list[dict] | None:
        path = self.clones_path_for(report_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))


_PATH_LOCKS: dict[str, threading.Lock] = {}
_PATH_LOCKS_GUARD = threading.Lock()


def _target_lock(path: str) -> threading.Lock:
    key = os.path.abspath(path)
    with _PATH_LOCKS_GUARD:
        return _PATH_LOCKS.setdefault(key, threading.Lock())


def run_scan(
    request: ScanRequest,
    *,
    registry: AnalyzerRegistry,
    store: ReportStore | None = None,
) -> NormalizedReport:
    """Dispatch one scan with the request's timeout enforced.

    A timed-out adapter yields a Cancelled report (the worker thread is
    abandoned; adapters bound their own subprocesses). Completed scans bump
    the analyzer's popularity. The report is persisted before returning.
    """
    if not os.path.isdir(request.target.path):
        raise InputError(f"scan target path does not exist: {request.target.path}")
    adapter = registry.adapter_for(request.analyzer_id)

    started = utcnow()
    outcome: dict = {}

    def work() -> None:
        try:
            outcome["report"] = adapter.scan(request)
        except Exception as exc:  # adapter bugs must not kill the service
            outcome["error"] = exc

    with _target_lock(request.target.path):
        worker = threading.Thread(target=work, daemon=True)
        worker.start()
        worker.join(request.timeout)
        timed_out = worker.is_alive()

    if timed_out:
        report = NormalizedReport(
            report_id=new_report_id(),
            target=request.target,
            analyzer_id=request.analyzer_id,
            ruleset_labels=request.ruleset_labels,
            findings=(),
            started_at=started,
            finished_at=utcnow(),
            status=ReportStatus.CANCELLED,
        )
    elif "error" in outcome:
        log.warning(
            "analyzer %s failed on %s: %s",
            request.analyzer_id, request.target.path, outcome["error"],
        )
        report = NormalizedReport(
            report_id=new_report_id(),
            target=request.target,
            analyzer_id=request.analyzer_id,
            ruleset_labels=request.ruleset_labels,
            findings=(),
            started_at=started,
            finished_at=utcnow(),
            status=ReportStatus.FAILED,
        )
    else:
        report = outcome["report"]

    if report.status is ReportStatus.COMPLETED:
        registry.bump_popularity(request.analyzer_id)
    if store is not None:
        store.save(report)
    return report
