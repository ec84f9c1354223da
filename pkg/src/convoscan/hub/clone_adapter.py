"""Registers duplicate-code detection as a plug-and-play analyzer."""

from __future__ import annotations

from pathlib import Path

from ..clones import DEFAULT_WINDOW, as_findings, detect_clones, tokenize_normalize
from ..model import NormalizedReport, ReportStatus, utcnow
from .registry import AnalyzerAdapter, AnalyzerDescriptor, Capabilities, ScanRequest
from .runner import ReportStore, new_report_id

ANALYZER_ID = "clone-detector"

_SOURCE_EXTENSIONS = (".java", ".py", ".js", ".jsx", ".ts", ".tsx", ".go", ".c", ".h", ".cc", ".cpp")
_SKIP_DIRS = {".git", ".hg", "node_modules", "__pycache__", "build", "target", "out"}


class CloneDetectorAdapter(AnalyzerAdapter):
    """Scans source trees for duplicated blocks; clone pairs are persisted
    next to the report so the dashboard can show them side by side."""

    def __init__(self, window: int = DEFAULT_WINDOW, store: ReportStore | None = None):
        self._window = window
        self._store = store

    def describe(self) -> AnalyzerDescriptor:
        return AnalyzerDescriptor(
            analyzer_id=ANALYZER_ID,
            display_name="Clone Detector",
            supported_languages=(
                "java", "python", "javascript", "typescript", "go", "c", "cpp",
            ),
            categories=("clone",),
            capabilities=Capabilities(clone_detection=True),
        )

    def scan(self, request: ScanRequest) -> NormalizedReport:
        started = utcnow()
        root = Path(request.target.path)
        streams = []
        for path in sorted(root.rglob("*")):
            if path.suffix.lower() not in _SOURCE_EXTENSIONS or not path.is_file():
                continue
            if any(part in _SKIP_DIRS for part in path.parts):
                continue
            try:
                text = path.read_text(encoding="utf-8", errors="replace")
            except OSError:
                continue
            streams.append(tokenize_normalize(text, path.relative_to(root).as_posix()))

        pairs = detect_clones(streams, self._window)
        report = NormalizedReport(
            report_id=new_report_id(),
            target=request.target,
            analyzer_id=ANALYZER_ID,
            ruleset_labels=request.ruleset_labels or ("clone",),
            findings=tuple(as_findings(pairs, ANALYZER_ID)),
            started_at=started,
            finished_at=utcnow(),
            status=ReportStatus.COMPLETED,
        )
        if self._store is not None:
            self._store.save_clones(report.report_id, [p.to_dict() for p in pairs])
        return report
