"""Summaries, spoken action items, HTML rendering, and delivery."""

from __future__ import annotations

import html
import json
import os
import smtplib
import threading
from dataclasses import dataclass
from datetime import datetime
from email.mime.text import MIMEText
from enum import Enum
from pathlib import Path

from .errors import StateError
from .model import (
    SEVERITY_ORDER,
    Finding,
    NormalizedReport,
    ReportStatus,
    Severity,
    format_timestamp,
    utcnow,
)

SPEECH_LIMIT = 1_200  # characters; keeps the spoken summary speakable
DEFAULT_TOP_N = 5

SMTP_HOST_VAR = "CONVOSCAN_SMTP_HOST"
SMTP_PORT_VAR = "CONVOSCAN_SMTP_PORT"
SMTP_USER_VAR = "CONVOSCAN_SMTP_USER"
SMTP_PASS_VAR = "CONVOSCAN_SMTP_PASS"
MAIL_TO_VAR = "CONVOSCAN_MAIL_TO"


class DeliveryChannel(str, Enum):
    EMAIL = "Email"
    FILE = "File"


@dataclass(frozen=True)
class ReportSummary:
    report_id: str
    total: int
    by_severity: dict[Severity, int]
    by_category: dict[str, int]
    top_items: tuple[Finding, ...]
    files_affected: int

    def to_dict(self) -> dict:
        return {
            "report_id": self.report_id,
            "total": self.total,
            "by_severity": {
                sev.label: n for sev, n in sorted(
                    self.by_severity.items(), key=lambda kv: -kv[0]
                )
            },
            "by_category": dict(sorted(self.by_category.items())),
            "top_items": [f.to_dict() for f in self.top_items],
            "files_affected": self.files_affected,
        }


@dataclass(frozen=True)
class DeliveryReceipt:
    channel: DeliveryChannel
    destination: str
    delivered_at: datetime
    ok: bool
    detail: str

    def to_dict(self) -> dict:
        return {
            "channel": self.channel.value,
            "destination": self.destination,
            "delivered_at": format_timestamp(self.delivered_at),
            "ok": self.ok,
            "detail": self.detail,
        }


def _importance(f: Finding) -> tuple:
    # "Most important" = severity first, then stable location order.
    return (-f.severity, f.file_path, f.begin_line)


def summarize(report: NormalizedReport, n: int = DEFAULT_TOP_N) -> ReportSummary:
    if report.status is not ReportStatus.COMPLETED:
        raise StateError(
            f"cannot summarize report {report.report_id} with status "
            f"{report.status.value}"
        )
    by_severity: dict[Severity, int] = {}
    by_category: dict[str, int] = {}
    for f in report.findings:
        by_severity[f.severity] = by_severity.get(f.severity, 0) + 1
        by_category[f.category] = by_category.get(f.category, 0) + 1
    top = sorted(report.findings, key=_importance)[: max(n, 0)]
    return ReportSummary(
        report_id=report.report_id,
        total=len(report.findings),
        by_severity=by_severity,
        by_category=by_category,
        top_items=tuple(top),
        files_affected=len({f.file_path for f in report.findings}),
    )


def _item_phrase(f: Finding) -> str:
    return f"{f.rule_id} in {f.file_path} line {f.begin_line}"


def speech_text(summary: ReportSummary) -> str:
    """One deterministic paragraph: totals, then the top action items."""
    if summary.total == 0:
        return "Good news: the scan found no issues."
    counts = [
        f"{summary.by_severity[sev]} {sev.label.lower()}"
        for sev in SEVERITY_ORDER
        if summary.by_severity.get(sev)
    ]
    issues = "issue" if summary.total == 1 else "issues"
    files = "file" if summary.files_affected == 1 else "files"
    head = (
        f"The scan found {summary.total} {issues} in "
        f"{summary.files_affected} {files}: {', '.join(counts)}."
    )
    items = [_item_phrase(f) for f in summary.top_items]
    text = head
    if items:
        text = f"{head} Top action items: {'; '.join(items)}."
    while len(text) > SPEECH_LIMIT and items:
        items = items[:-1]
        tail = f" Top action items: {'; '.join(items)}." if items else ""
        text = head + tail
    if len(text) > SPEECH_LIMIT:
        text = text[: SPEECH_LIMIT - 1] + "…"
    return text


def top_items_text(summary: ReportSummary) -> str:
    if not summary.top_items:
        return "No action items, the scan came back clean."
    items = "; ".join(
        f"{i + 1}. {_item_phrase(f)}" for i, f in enumerate(summary.top_items)
    )
    return f"Top action items: {items}."


_PAGE_STYLE = """
body { font-family: Georgia, serif; margin: 2rem auto; max-width: 60rem; color: #222; }
h1 { font-size: 1.4rem; border-bottom: 2px solid #444; padding-bottom: .4rem; }
table { border-collapse: collapse; margin: 1rem 0; width: 100%; }
th, td { border: 1px solid #bbb; padding: .35rem .6rem; text-align: left; font-size: .92rem; }
th { background: #f0f0f0; }
td.sev-Critical { color: #7a0010; font-weight: bold; }
td.sev-High { color: #b3261e; }
td.sev-Medium { color: #8a6d00; }
""".strip()


def render_html(report: NormalizedReport, summary: ReportSummary | None = None) -> str:
    """Self-contained HTML report; no external assets, everything escaped."""
    e = html.escape
    if summary is None and report.status is ReportStatus.COMPLETED:
        summary = summarize(report)

    parts: list[str] = []
    parts.append("<!DOCTYPE html>")
    parts.append('<html lang="en"><head><meta charset="utf-8">')
    parts.append(f"<title>Scan report {e(report.report_id)}</title>")
    parts.append(f"<style>{_PAGE_STYLE}</style></head><body>")
    parts.append(f'<h1 id="report-title">Scan report {e(report.report_id)}</h1>')

    parts.append('<table id="report-meta">')
    meta = [
        ("Target", f"{report.target.display_name} ({report.target.path})"),
        ("Target kind", report.target.kind.value),
        ("Analyzer", report.analyzer_id),
        ("Rulesets", ", ".join(report.ruleset_labels) or "all"),
        ("Started", format_timestamp(report.started_at)),
        ("Finished", format_timestamp(report.finished_at)),
        ("Status", report.status.value),
    ]
    if report.target.origin:
        meta.insert(2, ("Origin", report.target.origin))
    for key, value in meta:
        parts.append(f"<tr><th>{e(key)}</th><td>{e(value)}</td></tr>")
    parts.append("</table>")

    parts.append('<table id="severity-summary">')
    parts.append("<tr><th>Severity</th><th>Count</th></tr>")
    if summary is not None:
        for sev in SEVERITY_ORDER:
            count = summary.by_severity.get(sev, 0)
            if count:
                parts.append(
                    f'<tr><td class="sev-{sev.label}">{sev.label}</td>'
                    f"<td>{count}</td></tr>"
                )
    parts.append("</table>")

    parts.append('<table id="findings">')
    parts.append(
        "<thead><tr><th>Severity</th><th>File</th><th>Lines</th>"
        "<th>Rule</th><th>Message</th></tr></thead><tbody>"
    )
    for i, f in enumerate(report.findings):
        lines = str(f.begin_line) if f.end_line == f.begin_line else f"{f.begin_line}-{f.end_line}"
        rule = e(f.rule_id)
        if f.info_url:
            rule = f'<a href="{e(f.info_url)}">{rule}</a>'
        parts.append(
            f'<tr class="finding" id="finding-{i}">'
            f'<td class="sev-{f.severity.label}">{f.severity.label}</td>'
            f"<td>{e(f.file_path)}</td><td>{lines}</td>"
            f"<td>{rule}</td><td>{e(f.message)}</td></tr>"
        )
    parts.append("</tbody></table>")
    parts.append("</body></html>")
    return "\n".join(parts)


_DELIVER_LOCKS: dict[str, threading.Lock] = {}
_DELIVER_LOCKS_GUARD = threading.Lock()


def _lock_for(report_id: str) -> threading.Lock:
    with _DELIVER_LOCKS_GUARD:
        return _DELIVER_LOCKS.setdefault(report_id, threading.Lock())


def deliver(
    report_id: str,
    channel: DeliveryChannel,
    destination: str,
    *,
    store,
    out_dir: str | Path,
    env: dict | None = None,
) -> DeliveryReceipt:
    """Render and send one report. Never raises into the dialog: failures
    come back as a receipt with ``ok=False``.

    ``store`` is anything with ``load(report_id) -> NormalizedReport``.
    """
    env = dict(os.environ) if env is None else env
    out_dir = Path(out_dir)
    with _lock_for(report_id):
        try:
            report = store.load(report_id)
        except Exception as exc:
            receipt = DeliveryReceipt(channel, destination, utcnow(), False,
                                      f"report not found: {exc}")
            _persist_receipt(out_dir, receipt)
            return receipt
        document = render_html(report)

        if channel is DeliveryChannel.FILE:
            target_dir = Path(destination) if destination else out_dir
            try:
                target_dir.mkdir(parents=True, exist_ok=True)
                path = target_dir / f"{report_id}.html"
                path.write_text(document, encoding="utf-8")
                receipt = DeliveryReceipt(channel, str(path), utcnow(), True, "written")
            except OSError as exc:
                receipt = DeliveryReceipt(channel, destination, utcnow(), False, str(exc))
        else:
            receipt = _deliver_email(report_id, destination, document, env)

        _persist_receipt(out_dir, receipt)
        return receipt


def _deliver_email(report_id: str, destination: str, document: str,
                   env: dict) -> DeliveryReceipt:
    host = env.get(SMTP_HOST_VAR, "")
    recipient = destination or env.get(MAIL_TO_VAR, "")
    if not host:
        return DeliveryReceipt(DeliveryChannel.EMAIL, recipient, utcnow(), False,
                               "mail gateway not configured")
    if not recipient:
        return DeliveryReceipt(DeliveryChannel.EMAIL, recipient, utcnow(), False,
                               "no recipient configured")
    try:
        port = int(env.get(SMTP_PORT_VAR, "25"))
        message = MIMEText(document, "html", "utf-8")
        message["Subject"] = f"Scan report {report_id}"
        message["To"] = recipient
        message["From"] = env.get(SMTP_USER_VAR, "convoscan@localhost")
        with smtplib.SMTP(host, port, timeout=15) as smtp:
            user, password = env.get(SMTP_USER_VAR), env.get(SMTP_PASS_VAR)
            if user and password:
                smtp.login(user, password)
            smtp.sendmail(message["From"], [recipient], message.as_string())
        return DeliveryReceipt(DeliveryChannel.EMAIL, recipient, utcnow(), True, "sent")
    except Exception as exc:
        return DeliveryReceipt(DeliveryChannel.EMAIL, recipient, utcnow(), False, str(exc))


def _persist_receipt(out_dir: Path, receipt: DeliveryReceipt) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with (out_dir / "receipts.jsonl").open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(receipt.to_dict()) + "\n")
    except OSError:
        pass  # receipts are best-effort bookkeeping
