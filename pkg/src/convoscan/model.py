"""Unified finding/report model every analyzer normalizes into.

All values here are immutable after construction and safe to share across
threads. The canonical serialized form is JSON with snake_case keys matching
the dataclass field names; timestamps are RFC 3339 strings in UTC.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum, IntEnum

from .errors import MappingError


class Severity(IntEnum):
    """Importance scale, totally ordered: CRITICAL > HIGH > ... > INFO."""

    INFO = 1
    LOW = 2
    MEDIUM = 3
    HIGH = 4
    CRITICAL = 5

    @property
    def label(self) -> str:
        return self.name.title()

    @classmethod
    def from_label(cls, label: str) -> "Severity":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise MappingError(f"unknown severity label: {label!r}") from None


#: Severities from most to least severe, for ranking and display.
SEVERITY_ORDER: tuple[Severity, ...] = (
    Severity.CRITICAL,
    Severity.HIGH,
    Severity.MEDIUM,
    Severity.LOW,
    Severity.INFO,
)


class TargetKind(str, Enum):
    IDE_PROJECT = "IdeProject"
    GIT_REPO = "GitRepo"


class ReportStatus(str, Enum):
    COMPLETED = "Completed"
    FAILED = "Failed"
    CANCELLED = "Cancelled"


@dataclass(frozen=True)
class ScanTarget:
    """What a scan runs against: the active IDE project or a fetched repo."""

    kind: TargetKind
    path: str
    display_name: str
    origin: str | None = None  # repo URL; required when kind is GIT_REPO

    def to_dict(self) -> dict:
        d: dict = {
            "kind": self.kind.value,
            "path": self.path,
            "display_name": self.display_name,
        }
        if self.origin is not None:
            d["origin"] = self.origin
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScanTarget":
        return cls(
            kind=TargetKind(d["kind"]),
            path=d["path"],
            display_name=d.get("display_name", ""),
            origin=d.get("origin"),
        )


@dataclass(frozen=True)
class Finding:
    """One normalized analyzer violation.

    Lines are 1-based; columns are 1-based with 0 meaning "unknown".
    ``file_path`` is workspace-relative with '/' separators on every OS.
    """

    file_path: str
    begin_line: int
    end_line: int
    begin_col: int
    end_col: int
    rule_id: str
    category: str
    severity: Severity
    message: str
    analyzer_id: str
    info_url: str | None = None

    def to_dict(self) -> dict:
        d: dict = {
            "file_path": self.file_path,
            "begin_line": self.begin_line,
            "end_line": self.end_line,
            "begin_col": self.begin_col,
            "end_col": self.end_col,
            "rule_id": self.rule_id,
            "category": self.category,
            "severity": self.severity.label,
            "message": self.message,
            "analyzer_id": self.analyzer_id,
        }
        if self.info_url is not None:
            d["info_url"] = self.info_url
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Finding":
        return cls(
            file_path=d["file_path"],
            begin_line=int(d["begin_line"]),
            end_line=int(d["end_line"]),
            begin_col=int(d.get("begin_col", 0)),
            end_col=int(d.get("end_col", 0)),
            rule_id=d["rule_id"],
            category=d["category"],
            severity=Severity.from_label(d["severity"]),
            message=d["message"],
            analyzer_id=d["analyzer_id"],
            info_url=d.get("info_url"),
        )


@dataclass(frozen=True)
class NormalizedReport:
    """A scan's full result set plus provenance."""

    report_id: str
    target: ScanTarget
    analyzer_id: str
    ruleset_labels: tuple[str, ...]
    findings: tuple[Finding, ...]
    started_at: datetime
    finished_at: datetime
    status: ReportStatus = ReportStatus.COMPLETED

    def to_dict(self) -> dict:
        return {
            "report_id": self.report_id,
            "target": self.target.to_dict(),
            "analyzer_id": self.analyzer_id,
            "ruleset_labels": list(self.ruleset_labels),
            "findings": [f.to_dict() for f in self.findings],
            "started_at": format_timestamp(self.started_at),
            "finished_at": format_timestamp(self.finished_at),
            "status": self.status.value,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizedReport":
        return cls(
            report_id=d["report_id"],
            target=ScanTarget.from_dict(d["target"]),
            analyzer_id=d["analyzer_id"],
            ruleset_labels=tuple(d.get("ruleset_labels", ())),
            findings=tuple(Finding.from_dict(f) for f in d.get("findings", ())),
            started_at=parse_timestamp(d["started_at"]),
            finished_at=parse_timestamp(d["finished_at"]),
            status=ReportStatus(d["status"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "NormalizedReport":
        return cls.from_dict(json.loads(text))


def format_timestamp(dt: datetime) -> str:
    """Render a datetime as an RFC 3339 string in UTC."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat()


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 string; a trailing 'Z' is accepted for +00:00."""
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


# PMD priorities run 1 (most urgent) to 5; the unified scale reverses them.
_PRIORITY_MAPS: dict[str, dict[int, Severity]] = {
    "pmd": {
        1: Severity.CRITICAL,
        2: Severity.HIGH,
        3: Severity.MEDIUM,
        4: Severity.LOW,
        5: Severity.INFO,
    },
}


def severity_from_priority(analyzer_id: str, native_priority: int) -> Severity:
    """Map an analyzer's native priority onto the unified severity scale.

    Analyzers without a registered priority map default to MEDIUM. For mapped
    analyzers an out-of-range priority raises :class:`MappingError`.
    """
    table = _PRIORITY_MAPS.get(analyzer_id)
    if table is None:
        return Severity.MEDIUM
    try:
        return table[int(native_priority)]
    except (KeyError, ValueError):
        raise MappingError(
            f"{analyzer_id}: native priority {native_priority!r} outside "
            f"documented range {min(table)}..{max(table)}"
        ) from None


def finding_fingerprint(f: Finding) -> str:
    """Stable dedup key over (file_path, begin_line, rule_id, analyzer_id).

    Message, columns, and severity are deliberately excluded so re-worded or
    re-scored findings still deduplicate across merged reports.
    """
    payload = "\x1f".join(
        [f.file_path.replace("\\", "/"), str(f.begin_line), f.rule_id, f.analyzer_id]
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def dedupe_findings(findings: list[Finding] | tuple[Finding, ...]) -> list[Finding]:
    """Drop findings whose fingerprint was already seen, preserving order."""
    seen: set[str] = set()
    out: list[Finding] = []
    for f in findings:
        fp = finding_fingerprint(f)
        if fp not in seen:
            seen.add(fp)
            out.append(f)
    return out


def validate_report(report: NormalizedReport) -> list[str]:
    """Check every model invariant; returns one description per violation.

    Validation never raises: it is meant to run on freshly parsed data
    before anything trusts it.
    """
    problems: list[str] = []
    if report.finished_at < report.started_at:
        problems.append(
            f"finished_at {format_timestamp(report.finished_at)} precedes "
            f"started_at {format_timestamp(report.started_at)}"
        )
    if not report.report_id:
        problems.append("report_id is empty")
    if report.target.kind is TargetKind.GIT_REPO and not report.target.origin:
        problems.append("target of kind GitRepo is missing its origin URL")
    for i, f in enumerate(report.findings):
        where = f"finding {i}"
        if f.begin_line < 1:
            problems.append(f"{where}: begin_line {f.begin_line} < 1")
        if f.end_line < f.begin_line:
            problems.append(
                f"{where}: end_line {f.end_line} < begin_line {f.begin_line}"
            )
        if not f.rule_id:
            problems.append(f"{where}: rule_id is empty")
        if not f.analyzer_id:
            problems.append(f"{where}: analyzer_id is empty")
        if not f.message:
            problems.append(f"{where}: message is empty")
    return problems
