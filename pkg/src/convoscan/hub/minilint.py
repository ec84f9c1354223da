"""Built-in hermetic Java linter so the whole pipeline is testable offline.

Five deliberately simple token-level rules:

    security/HardcodedCredential   string literal assigned to an identifier
                                   containing password/passwd/secret/apikey
    security/SqlConcatenation      SQL-keyword string literal next to a '+'
    security/InsecureRandom        'new Random(' usage
    errorprone/EmptyCatchBlock     catch block with no tokens inside
    errorprone/PrintStackTrace     '.printStackTrace(' usage

These are not meant to compete with a real analyzer; they only have to be
deterministic and documented.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path

from ..errors import InputError
from ..model import Finding, NormalizedReport, ReportStatus, Severity, utcnow
from .registry import AnalyzerAdapter, AnalyzerDescriptor, Capabilities, ScanRequest
from .runner import new_report_id

log = logging.getLogger(__name__)

ANALYZER_ID = "minilint"

_CREDENTIAL_RE = re.compile(
    r"\b(\w*(?:password|passwd|secret|apikey)\w*)\s*=\s*\"", re.IGNORECASE
)
_STRING_RE = re.compile(r'"(?:[^"\\]|\\.)*"')
_SQL_KEYWORD_RE = re.compile(r"\b(SELECT|INSERT|UPDATE|DELETE)\b")
_RANDOM_RE = re.compile(r"\bnew\s+Random\s*\(")
_PRINT_STACK_RE = re.compile(r"\.printStackTrace\(")
_EMPTY_CATCH_RE = re.compile(r"\bcatch\s*\([^)]*\)\s*\{\s*\}")


def _line_findings(rel_path: str, lineno: int, line: str) -> list[Finding]:
    found: list[Finding] = []

    m = _CREDENTIAL_RE.search(line)
    if m:
        found.append(_finding(
            rel_path, lineno, m.start() + 1, m.end(),
            "security/HardcodedCredential", "security", Severity.CRITICAL,
            f"Hard-coded credential assigned to '{m.group(1)}'",
        ))

    for m in _STRING_RE.finditer(line):
        if not _SQL_KEYWORD_RE.search(m.group(0)):
            continue
        before = line[: m.start()].rstrip()
        after = line[m.end():].lstrip()
        if before.endswith("+") or after.startswith("+"):
            found.append(_finding(
                rel_path, lineno, m.start() + 1, m.end(),
                "security/SqlConcatenation", "security", Severity.HIGH,
                "SQL statement built by string concatenation",
            ))
            break  # one finding per line is enough for this rule

    m = _RANDOM_RE.search(line)
    if m:
        found.append(_finding(
            rel_path, lineno, m.start() + 1, m.end(),
            "security/InsecureRandom", "security", Severity.MEDIUM,
            "java.util.Random is not cryptographically secure",
        ))

    m = _PRINT_STACK_RE.search(line)
    if m:
        found.append(_finding(
            rel_path, lineno, m.start() + 1, m.end(),
            "errorprone/PrintStackTrace", "errorprone", Severity.LOW,
            "Exception swallowed by printStackTrace instead of being handled",
        ))
    return found


def _finding(path, line, col, end_col, rule, category, severity, message) -> Finding:
    return Finding(
        file_path=path,
        begin_line=line,
        end_line=line,
        begin_col=col,
        end_col=end_col,
        rule_id=rule,
        category=category,
        severity=severity,
        message=message,
        analyzer_id=ANALYZER_ID,
    )


def _catch_findings(rel_path: str, text: str) -> list[Finding]:
    found = []
    for m in _EMPTY_CATCH_RE.finditer(text):
        begin_line = text.count("\n", 0, m.start()) + 1
        end_line = begin_line + m.group(0).count("\n")
        found.append(Finding(
            file_path=rel_path,
            begin_line=begin_line,
            end_line=end_line,
            begin_col=0,
            end_col=0,
            rule_id="errorprone/EmptyCatchBlock",
            category="errorprone",
            severity=Severity.MEDIUM,
            message="Empty catch block hides the exception",
            analyzer_id=ANALYZER_ID,
        ))
    return found


def _matches_labels(finding: Finding, labels: tuple[str, ...]) -> bool:
    if not labels:
        return True
    return any(
        finding.category == label or finding.rule_id.startswith(label)
        for label in labels
    )


def minilint_scan(root: str | Path, ruleset_labels: tuple[str, ...] = ()) -> list[Finding]:
    root = Path(root)
    if not root.is_dir():
        raise InputError(f"scan root does not exist: {root}")
    findings: list[Finding] = []
    for path in sorted(root.rglob("*.java")):
        if ".git" in path.parts:
            continue
        rel = path.relative_to(root).as_posix()
        try:
            text = path.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            log.warning("minilint: skipping unreadable file %s: %s", path, exc)
            continue
        for lineno, line in enumerate(text.splitlines(), start=1):
            findings.extend(_line_findings(rel, lineno, line))
        findings.extend(_catch_findings(rel, text))
    findings = [f for f in findings if _matches_labels(f, tuple(ruleset_labels))]
    findings.sort(key=lambda f: (f.file_path, f.begin_line, f.rule_id))
    return findings


class MinilintAdapter(AnalyzerAdapter):
    def describe(self) -> AnalyzerDescriptor:
        return AnalyzerDescriptor(
            analyzer_id=ANALYZER_ID,
            display_name="MiniLint",
            supported_languages=("java",),
            categories=("security", "errorprone"),
            capabilities=Capabilities(),
        )

    def scan(self, request: ScanRequest) -> NormalizedReport:
        started = utcnow()
        findings = minilint_scan(request.target.path, request.ruleset_labels)
        return NormalizedReport(
            report_id=new_report_id(),
            target=request.target,
            analyzer_id=ANALYZER_ID,
            ruleset_labels=request.ruleset_labels or ("security", "errorprone"),
            findings=tuple(findings),
            started_at=started,
            finished_at=utcnow(),
            status=ReportStatus.COMPLETED,
        )
