"""Local HTTP service tying the dialog engine, workspace queue, and hub together.

Endpoints (bearer-token auth, loopback binding by default):

    POST /v1/webhook                conversational fulfillment
    POST /v1/events/editor          editor-activity ingestion
    GET  /v1/context/active         current IDE context
    POST /v1/scans                  start a scan programmatically
    GET  /v1/scans/{id}             scan lifecycle
    GET  /v1/reports/{id}           persisted report (byte-identical)
    GET  /v1/reports/{id}/clones    clone pairs for the side-by-side view
    GET  /v1/reports/{id}/summary   ReportSummary JSON
    GET  /v1/reports/{id}/source    source lines referenced by a finding/clone
    GET  /ui/...                    static dashboard assets (when configured)

Webhook handling is serialized per session; distinct sessions, and scans of
distinct targets, proceed concurrently.
"""

from __future__ import annotations

import hmac
import json
import logging
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import timedelta
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .dialog import DialogEngine, IntentClassifier, load_trigger_phrases, new_session
from .dialog.engine import CLONE_ANALYZER_ID, SessionState, SystemEvent
from .errors import ConvoscanError, FetchError, InputError
from .hub import AnalyzerRegistry, ReportStore, ScanRequest, detect_project_language, run_scan
from .hub.clone_adapter import CloneDetectorAdapter
from .hub.gitfetch import fetch_git_target
from .hub.minilint import MinilintAdapter
from .hub.pmd import PmdAdapter
from .model import ReportStatus, ScanTarget, TargetKind, utcnow
from .report import DeliveryChannel, deliver, summarize
from .workspace import (
    EnvironmentProbe,
    EventQueue,
    FileProbe,
    RepoRef,
    StaticProbe,
    WorkspaceEvent,
    detect_github_repos,
    frontmost_hint,
)

log = logging.getLogger(__name__)

DEFAULT_LISTEN = "127.0.0.1:7700"
DEFAULT_KNOWN_IDES = ("idea", "pycharm", "eclipse", "vscode", "sublime")


class ScanConflict(ConvoscanError):
    """A scan is already running for the same target path."""


@dataclass(frozen=True)
class GatewayConfig:
    listen_addr: str = DEFAULT_LISTEN
    data_dir: str = "convoscan-data"
    auth_token: str = ""
    pmd_executable: str | None = None
    known_ides: tuple[str, ...] = DEFAULT_KNOWN_IDES
    trigger_phrase_file: str | None = None
    staleness_minutes: int = 30
    clone_window: int = 50
    probe_fixture: str | None = None
    ui_dir: str | None = None
    scan_timeout: float = 300.0

    @classmethod
    def from_dict(cls, d: dict) -> "GatewayConfig":
        known = d.get("known_ides")
        return cls(
            listen_addr=d.get("listen_addr", DEFAULT_LISTEN),
            data_dir=d.get("data_dir", "convoscan-data"),
            auth_token=d.get("auth_token", ""),
            pmd_executable=d.get("pmd_executable"),
            known_ides=tuple(known) if known else DEFAULT_KNOWN_IDES,
            trigger_phrase_file=d.get("trigger_phrase_file"),
            staleness_minutes=int(d.get("staleness_minutes", 30)),
            clone_window=int(d.get("clone_window", 50)),
            probe_fixture=d.get("probe_fixture"),
            ui_dir=d.get("ui_dir"),
            scan_timeout=float(d.get("scan_timeout", 300.0)),
        )

    @property
    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen_addr.rpartition(":")
        return host or "127.0.0.1", int(port)


def load_config(path: str | Path) -> GatewayConfig:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"config file not found: {path}")
    try:
        return GatewayConfig.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        raise InputError(f"config file {path} is not valid: {exc}") from exc


@dataclass
class ScanRecord:
    scan_id: str
    target_path: str
    status: str = "Running"  # Running | Completed | Failed | Cancelled
    report_id: str | None = None
    detail: str = ""
    session_id: str | None = None

    def to_dict(self) -> dict:
        d = {"scan_id": self.scan_id, "status": self.status}
        if self.report_id:
            d["report_id"] = self.report_id
        if self.detail:
            d["detail"] = self.detail
        return d


class ScanManager:
    """Runs scans on worker threads; one live scan per target path."""

    def __init__(self, registry: AnalyzerRegistry, store: ReportStore, checkout_dir: Path):
        self._registry = registry
        self._store = store
        self._checkout_dir = checkout_dir
        self._lock = threading.Lock()
        self._records: dict[str, ScanRecord] = {}
        self.launch_count = 0

    def start(self, request: ScanRequest, session_id: str | None = None) -> str:
        if request.target.kind is TargetKind.IDE_PROJECT and not os.path.isdir(
            request.target.path
        ):
            raise InputError(f"scan target path does not exist: {request.target.path}")
        key = os.path.abspath(request.target.path)
        with self._lock:
            for record in self._records.values():
                if record.status == "Running" and record.target_path == key:
                    raise ScanConflict(
                        f"a scan is already running for {request.target.path}"
                    )
            record = ScanRecord(
                scan_id=uuid.uuid4().hex[:12], target_path=key, session_id=session_id
            )
            self._records[record.scan_id] = record
            self.launch_count += 1
        thread = threading.Thread(
            target=self._run, args=(record, request), daemon=True
        )
        thread.start()
        return record.scan_id

    def attach(self, session_id: str, target_path: str) -> str | None:
        """Point a session at the already-running scan of the same target."""
        key = os.path.abspath(target_path)
        with self._lock:
            for record in self._records.values():
                if record.status == "Running" and record.target_path == key:
                    record.session_id = session_id
                    return record.scan_id
        return None

    def _run(self, record: ScanRecord, request: ScanRequest) -> None:
        try:
            target = request.target
            if target.kind is TargetKind.GIT_REPO and target.origin:
                owner, _, repo = target.display_name.partition("/")
                ref = RepoRef(owner=owner or "repo", repo=repo or "checkout",
                              url=target.origin)
                target = fetch_git_target(ref, self._checkout_dir)
                request = ScanRequest(
                    target=target,
                    analyzer_id=request.analyzer_id,
                    ruleset_labels=request.ruleset_labels,
                    timeout=request.timeout,
                )
            report = run_scan(request, registry=self._registry, store=self._store)
            with self._lock:
                record.report_id = report.report_id
                record.status = report.status.value
        except (FetchError, InputError, ConvoscanError) as exc:
            with self._lock:
                record.status = "Failed"
                record.detail = str(exc)
        except Exception as exc:  # last-ditch: a scan crash must be observable
            log.exception("scan %s crashed", record.scan_id)
            with self._lock:
                record.status = "Failed"
                record.detail = str(exc)

    def get(self, scan_id: str) -> ScanRecord | None:
        with self._lock:
            record = self._records.get(scan_id)
            return ScanRecord(**vars(record)) if record else None

    def for_session(self, session_id: str) -> ScanRecord | None:
        with self._lock:
            newest = None
            for record in self._records.values():
                if record.session_id == session_id:
                    newest = record
            return ScanRecord(**vars(newest)) if newest else None


class Service:
    """Everything the HTTP layer (and the in-process chat) talks to."""

    def __init__(self, config: GatewayConfig):
        self.config = config
        data_dir = Path(config.data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        self.out_dir = data_dir / "out"

        self.queue = EventQueue(
            data_dir / "queue.jsonl",
            staleness=timedelta(minutes=config.staleness_minutes),
        )
        self.store = ReportStore(data_dir)
        self.registry = AnalyzerRegistry(data_dir / "registry.json")
        self.registry.register(MinilintAdapter())
        self.registry.register(
            CloneDetectorAdapter(window=config.clone_window, store=self.store)
        )
        if config.pmd_executable:
            self.registry.register(PmdAdapter(executable=config.pmd_executable))

        self.probe: EnvironmentProbe = (
            FileProbe(config.probe_fixture) if config.probe_fixture else StaticProbe()
        )
        analyzer_ids = [d.analyzer_id for d in self.registry.list_descriptors()]
        classifier = IntentClassifier(
            load_trigger_phrases(config.trigger_phrase_file),
            analyzer_ids=analyzer_ids,
        )
        self.engine = DialogEngine(
            classifier,
            self.registry,
            context_provider=self.queue.active_context,
            repo_target_provider=self._repo_target,
            report_provider=self._load_report,
            deliverer=self._deliver_email,
            frontmost_provider=lambda: frontmost_hint(
                self.probe, list(config.known_ides)
            ),
            language_detector=self._detect_language,
        )
        self.scans = ScanManager(self.registry, self.store, data_dir / "checkouts")

        self._sessions: dict[str, object] = {}
        self._session_locks: dict[str, threading.Lock] = {}
        self._sessions_guard = threading.Lock()

    # -- engine collaborators -------------------------------------------

    def _repo_target(self) -> ScanTarget | None:
        refs = detect_github_repos(self.probe.list_browser_tab_urls())
        if not refs:
            return None
        ref = refs[0]
        dest = Path(self.config.data_dir) / "checkouts" / f"{ref.owner}-{ref.repo}"
        return ScanTarget(
            kind=TargetKind.GIT_REPO,
            path=str(dest),
            display_name=f"{ref.owner}/{ref.repo}",
            origin=ref.url,
        )

    def _load_report(self, report_id: str):
        try:
            return self.store.load(report_id)
        except FileNotFoundError:
            return None

    def _deliver_email(self, report_id: str):
        return deliver(
            report_id,
            DeliveryChannel.EMAIL,
            "",
            store=self.store,
            out_dir=self.out_dir,
        )

    def _detect_language(self, target: ScanTarget) -> str | None:
        if os.path.isdir(target.path):
            return detect_project_language(target.path)
        return None

    # -- webhook ----------------------------------------------------------

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._sessions_guard:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def handle_webhook(self, session_id: str, query: str) -> dict:
        """Classify + advance, launching a scan when the dialog asks for one.

        Serialized per session; raises InputError for malformed input.
        """
        if not session_id:
            raise InputError("session is empty")
        with self._session_lock(session_id):
            session = self._sessions.get(session_id)
            if session is None or session.state is SessionState.ENDED:
                session = new_session(session_id)

            if (
                session.state is SessionState.SCANNING
                and query.strip().lower() == "status"
            ):
                session, reply = self._handle_status(session, session_id)
            else:
                match = self.engine.classify(query)
                previous = session.state
                session, reply = self.engine.advance(session, match)
                if (
                    session.state is SessionState.SCANNING
                    and previous is not SessionState.SCANNING
                ):
                    session = self._launch_from_dialog(session, session_id)

            self._sessions[session_id] = session
            return {
                "session": session_id,
                "speech": reply.speech,
                "expects_input": reply.expects_input,
                "end_session": reply.end_session,
                **({"report_id": reply.attachment} if reply.attachment else {}),
            }

    def _handle_status(self, session, session_id: str):
        record = self.scans.for_session(session_id)
        session = session.with_turn("user", "status")
        if record is None:
            return self.engine.advance(
                session, SystemEvent(SystemEvent.SCAN_FAILED, detail="scan lost")
            )
        if record.status == "Running":
            reply = self.engine.progress_reply(session)
            return session.with_turn("assistant", reply.speech), reply
        if record.report_id:
            event = SystemEvent(SystemEvent.SCAN_FINISHED, report_id=record.report_id)
        else:
            event = SystemEvent(SystemEvent.SCAN_FAILED, detail=record.detail)
        return self.engine.advance(session, event)

    def _launch_from_dialog(self, session, session_id: str):
        pending = session.pending
        labels: tuple[str, ...] = ()
        if pending.analyzer_id == CLONE_ANALYZER_ID:
            labels = ("clone",)
        request = ScanRequest(
            target=pending.target,
            analyzer_id=pending.analyzer_id,
            ruleset_labels=labels,
            timeout=self.config.scan_timeout,
        )
        try:
            self.scans.start(request, session_id=session_id)
        except ScanConflict:
            self.scans.attach(session_id, pending.target.path)
        except (InputError, ConvoscanError) as exc:
            log.warning("dialog scan launch failed: %s", exc)
            session, _ = self.engine.advance(
                session, SystemEvent(SystemEvent.SCAN_FAILED, detail=str(exc))
            )
        return session

    # -- programmatic surface ----------------------------------------------

    def record_editor_event(self, payload: dict) -> None:
        self.queue.record_event(WorkspaceEvent.from_dict(payload))

    def active_context(self) -> dict | None:
        ctx = self.queue.active_context(utcnow())
        return ctx.to_dict() if ctx else None

    def start_scan(self, payload: dict) -> str:
        return self.scans.start(ScanRequest.from_dict(payload))

    def scan_status(self, scan_id: str) -> dict | None:
        record = self.scans.get(scan_id)
        return record.to_dict() if record else None

    def report_bytes(self, report_id: str) -> bytes | None:
        try:
            return self.store.raw_bytes(report_id)
        except FileNotFoundError:
            return None

    def report_clones(self, report_id: str) -> list | None:
        return self.store.load_clones(report_id)

    def report_summary(self, report_id: str) -> dict | None:
        report = self._load_report(report_id)
        if report is None:
            return None
        if report.status is not ReportStatus.COMPLETED:
            raise InputError(f"report {report_id} is {report.status.value}, not Completed")
        return summarize(report).to_dict()

    def report_source(
        self, report_id: str, rel_path: str, begin: int, end: int
    ) -> dict | None:
        report = self._load_report(report_id)
        if report is None:
            return None
        root = Path(report.target.path).resolve()
        candidate = (root / rel_path).resolve()
        if root not in candidate.parents and candidate != root:
            raise InputError(f"path escapes the scan target: {rel_path}")
        if not candidate.is_file():
            return None
        lines = candidate.read_text(encoding="utf-8", errors="replace").splitlines()
        begin = max(begin, 1)
        end = min(max(end, begin), len(lines))
        return {
            "file_path": rel_path,
            "begin_line": begin,
            "end_line": end,
            "lines": lines[begin - 1 : end],
        }


# ---------------------------------------------------------------------------
# HTTP layer


class _GatewayHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, addr, handler, service: Service):
        super().__init__(addr, handler)
        self.service = service


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: _GatewayHTTPServer

    # -- plumbing --------------------------------------------------------

    def log_message(self, fmt, *args):
        log.debug("http: " + fmt, *args)

    def _send_json(self, code: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_bytes(self, code: int, body: bytes, content_type: str) -> None:
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, code: int, message: str) -> None:
        self._send_json(code, {"error": message})

    def _authorized(self) -> bool:
        token = self.server.service.config.auth_token
        if not token:
            return True
        header = self.headers.get("Authorization", "")
        expected = f"Bearer {token}"
        return hmac.compare_digest(header.encode(), expected.encode())

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", 0) or 0)
        raw = self.rfile.read(length) if length else b""
        try:
            payload = json.loads(raw.decode("utf-8")) if raw else {}
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise InputError(f"request body is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise InputError("request body must be a JSON object")
        return payload

    # -- methods -----------------------------------------------------------

    def do_POST(self):  # noqa: N802  (http.server naming)
        try:
            path = urlparse(self.path).path
            if path.startswith("/v1/") and not self._authorized():
                return self._error(401, "missing or invalid bearer token")
            if path == "/v1/webhook":
                return self._post_webhook()
            if path == "/v1/events/editor":
                return self._post_editor_event()
            if path == "/v1/scans":
                return self._post_scan()
            return self._error(404, f"unknown endpoint: {path}")
        except InputError as exc:
            return self._error(400, str(exc))
        except ScanConflict as exc:
            return self._error(409, str(exc))
        except Exception as exc:
            log.exception("unhandled gateway error")
            return self._error(500, str(exc))

    def do_GET(self):  # noqa: N802
        try:
            parsed = urlparse(self.path)
            path = parsed.path
            if path == "/healthz":
                return self._send_bytes(200, b"ok", "text/plain")
            if path.startswith("/ui"):
                return self._get_static(path)
            if not self._authorized():
                return self._error(401, "missing or invalid bearer token")
            if path == "/v1/context/active":
                return self._get_context()
            if path.startswith("/v1/scans/"):
                return self._get_scan(path.removeprefix("/v1/scans/"))
            if path.startswith("/v1/reports/"):
                return self._get_report(path.removeprefix("/v1/reports/"), parsed.query)
            return self._error(404, f"unknown endpoint: {path}")
        except InputError as exc:
            return self._error(400, str(exc))
        except Exception as exc:
            log.exception("unhandled gateway error")
            return self._error(500, str(exc))

    # -- endpoint bodies ----------------------------------------------------

    def _post_webhook(self):
        payload = self._read_json()
        session = payload.get("session")
        query = payload.get("query")
        if not isinstance(session, str) or not session:
            raise InputError("webhook body needs a non-empty 'session' string")
        if not isinstance(query, str) or not query.strip():
            raise InputError("webhook body needs a non-empty 'query' string")
        response = self.server.service.handle_webhook(session, query)
        self._send_json(200, response)

    def _post_editor_event(self):
        payload = self._read_json()
        try:
            self.server.service.record_editor_event(payload)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"invalid workspace event: {exc}") from exc
        self.send_response(204)
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _post_scan(self):
        payload = self._read_json()
        try:
            scan_id = self.server.service.start_scan(payload)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"invalid scan request: {exc}") from exc
        self._send_json(202, {"scan_id": scan_id})

    def _get_context(self):
        ctx = self.server.service.active_context()
        if ctx is None:
            return self._error(404, "no active editor context")
        self._send_json(200, ctx)

    def _get_scan(self, scan_id: str):
        status = self.server.service.scan_status(scan_id)
        if status is None:
            return self._error(404, f"unknown scan: {scan_id}")
        self._send_json(200, status)

    def _get_report(self, rest: str, query: str):
        service = self.server.service
        report_id, _, sub = rest.partition("/")
        if not report_id:
            return self._error(404, "missing report id")
        if sub == "":
            body = service.report_bytes(report_id)
            if body is None:
                return self._error(404, f"unknown report: {report_id}")
            return self._send_bytes(200, body, "application/json")
        if sub == "clones":
            clones = service.report_clones(report_id)
            if clones is None:
                return self._error(404, f"no clone data for report: {report_id}")
            return self._send_json(200, clones)
        if sub == "summary":
            summary = service.report_summary(report_id)
            if summary is None:
                return self._error(404, f"unknown report: {report_id}")
            return self._send_json(200, summary)
        if sub == "source":
            params = parse_qs(query)
            rel = params.get("path", [""])[0]
            begin = int(params.get("begin", ["1"])[0])
            end = int(params.get("end", [str(begin)])[0])
            if not rel:
                raise InputError("source endpoint needs a 'path' parameter")
            source = service.report_source(report_id, rel, begin, end)
            if source is None:
                return self._error(404, f"no such file in report target: {rel}")
            return self._send_json(200, source)
        return self._error(404, f"unknown report endpoint: {sub}")

    _STATIC_TYPES = {
        ".html": "text/html; charset=utf-8",
        ".js": "application/javascript",
        ".css": "text/css",
        ".map": "application/json",
        ".svg": "image/svg+xml",
        ".json": "application/json",
    }

    def _get_static(self, path: str):
        ui_dir = self.server.service.config.ui_dir
        if not ui_dir:
            return self._error(404, "dashboard is not configured (ui_dir unset)")
        rel = path.removeprefix("/ui").lstrip("/") or "index.html"
        root = Path(ui_dir).resolve()
        candidate = (root / rel).resolve()
        if root not in candidate.parents and candidate != root:
            return self._error(404, "not found")
        if candidate.is_dir():
            candidate = candidate / "index.html"
        if not candidate.is_file():
            return self._error(404, f"no such asset: {rel}")
        content_type = self._STATIC_TYPES.get(candidate.suffix, "application/octet-stream")
        return self._send_bytes(200, candidate.read_bytes(), content_type)


class Gateway:
    """Owns the HTTP server lifecycle around a Service."""

    def __init__(self, config: GatewayConfig):
        self.service = Service(config)
        host, port = config.host_port
        self._server = _GatewayHTTPServer((host, port), _Handler, self.service)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> str:
        host, port = self._server.server_address[:2]
        return f"{host}:{port}"

    def start(self) -> None:
        self._thread = threading.Thread(
            target=lambda: self._server.serve_forever(poll_interval=0.05), daemon=True
        )
        self._thread.start()

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
