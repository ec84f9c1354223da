"""PMD integration: XML report normalization and the subprocess adapter.

PMD 6.x prints its XML report on stdout (namespace
``http://pmd.sourceforge.net/report/2.0.0``) and exits 0 for a clean run or
4 when violations were found; any other exit status is a tool failure.
"""

from __future__ import annotations

import os
import subprocess
import xml.etree.ElementTree as ET
from pathlib import Path

from ..errors import ParseError
from ..model import (
    Finding,
    NormalizedReport,
    ReportStatus,
    severity_from_priority,
    utcnow,
)
from .registry import AnalyzerAdapter, AnalyzerDescriptor, Capabilities, ScanRequest
from .runner import new_report_id

ANALYZER_ID = "pmd"

#: Exit status PMD uses for "ran fine, violations found".
VIOLATIONS_EXIT_CODE = 4

RULESET_REFS = {
    "errorprone": "category/java/errorprone.xml",
    "security": "category/java/security.xml",
    "bestpractices": "category/java/bestpractices.xml",
}

_MANDATORY_VIOLATION_ATTRS = ("beginline", "endline", "rule", "ruleset", "priority")


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _byte_offset(data: bytes, line: int, column: int) -> int:
    lines = data.split(b"\n")
    return sum(len(l) + 1 for l in lines[: line - 1]) + column


def _relativize(name: str, target_root: str | Path) -> str:
    try:
        rel = os.path.relpath(name, target_root)
    except ValueError:
        rel = name
    if rel.startswith(".."):
        rel = name
    return rel.replace("\\", "/").replace(os.sep, "/")


def parse_pmd_xml(xml_bytes: bytes, target_root: str | Path) -> list[Finding]:
    """Normalize a PMD XML report into Findings, one per <violation>."""
    try:
        root = ET.fromstring(xml_bytes)
    except ET.ParseError as exc:
        line, column = getattr(exc, "position", (1, 0))
        offset = _byte_offset(xml_bytes, line, column)
        raise ParseError(
            f"malformed PMD XML at byte {offset} (line {line}, column {column}): {exc}",
            byte_offset=offset,
        ) from exc

    findings: list[Finding] = []
    file_index = -1
    for element in root.iter():
        if _local_name(element.tag) != "file":
            continue
        file_index += 1
        name = element.get("name")
        if not name:
            raise ParseError(f"file element {file_index} is missing its name attribute")
        rel_path = _relativize(name, target_root)
        for violation in element:
            if _local_name(violation.tag) != "violation":
                continue
            missing = [a for a in _MANDATORY_VIOLATION_ATTRS if violation.get(a) is None]
            if missing:
                raise ParseError(
                    f"violation in file element {file_index} is missing "
                    f"attribute(s): {', '.join(missing)}"
                )
            try:
                begin_line = int(violation.get("beginline"))
                end_line = int(violation.get("endline"))
                begin_col = int(violation.get("begincolumn", 0) or 0)
                end_col = int(violation.get("endcolumn", 0) or 0)
                priority = int(violation.get("priority"))
            except ValueError as exc:
                raise ParseError(
                    f"violation in file element {file_index} has a "
                    f"non-numeric attribute: {exc}"
                ) from exc
            rule = violation.get("rule")
            ruleset = violation.get("ruleset")
            message = (violation.text or "").strip() or rule
            findings.append(
                Finding(
                    file_path=rel_path,
                    begin_line=begin_line,
                    end_line=end_line,
                    begin_col=begin_col,
                    end_col=end_col,
                    rule_id=rule,
                    category=ruleset.lower().replace(" ", ""),
                    severity=severity_from_priority(ANALYZER_ID, priority),
                    message=message,
                    analyzer_id=ANALYZER_ID,
                    info_url=violation.get("externalInfoUrl"),
                )
            )
    return findings


class PmdAdapter(AnalyzerAdapter):
    """Runs PMD as an external process: ``pmd -d <dir> -R <rulesets> -f xml``."""

    def __init__(self, executable: str = "pmd",
                 default_rulesets: tuple[str, ...] = ("errorprone", "security")):
        self._executable = executable
        self._default_rulesets = tuple(default_rulesets)

    def describe(self) -> AnalyzerDescriptor:
        return AnalyzerDescriptor(
            analyzer_id=ANALYZER_ID,
            display_name="PMD",
            supported_languages=("java",),
            categories=("errorprone", "security", "bestpractices"),
            capabilities=Capabilities(),
        )

    def scan(self, request: ScanRequest) -> NormalizedReport:
        started = utcnow()
        labels = tuple(request.ruleset_labels) or self._default_rulesets
        refs = ",".join(RULESET_REFS.get(label, label) for label in labels)
        argv = [self._executable, "-d", request.target.path, "-R", refs, "-f", "xml"]

        status = ReportStatus.COMPLETED
        findings: tuple[Finding, ...] = ()
        try:
            proc = subprocess.run(
                argv, capture_output=True, timeout=request.timeout
            )
            if proc.returncode in (0, VIOLATIONS_EXIT_CODE):
                findings = tuple(parse_pmd_xml(proc.stdout, request.target.path))
            else:
                status = ReportStatus.FAILED
        except subprocess.TimeoutExpired:
            status = ReportStatus.CANCELLED
        except OSError:
            status = ReportStatus.FAILED

        return NormalizedReport(
            report_id=new_report_id(),
            target=request.target,
            analyzer_id=ANALYZER_ID,
            ruleset_labels=labels,
            findings=findings,
            started_at=started,
            finished_at=utcnow(),
            status=status,
        )
