"""Operator entry points: serve the gateway, chat, one-shot scans, fixtures.

Exit codes follow the common linter convention so the tool composes with CI:
0 = clean, 1 = findings exist, 2 = error (3 = bind failure for ``serve``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import urllib.error
import urllib.request
import uuid
from datetime import timedelta
from pathlib import Path

from . import fixtures
from .errors import ConvoscanError, InputError
from .gateway import Gateway, GatewayConfig, Service, load_config
from .hub import AnalyzerRegistry, ReportStore, ScanRequest, detect_project_language, run_scan
from .hub.clone_adapter import CloneDetectorAdapter
from .hub.minilint import MinilintAdapter
from .hub.pmd import PmdAdapter
from .model import ReportStatus, ScanTarget, TargetKind
from .report import render_html, speech_text, summarize
from .workspace import EventQueue, watch_directory

POLL_INTERVAL = 0.2
POLL_ATTEMPTS = 300  # one minute of scan polling in scripted chat


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convoscan",
        description="Conversational code-analysis orchestrator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the gateway HTTP service")
    serve.add_argument(
        "--config",
        help="path to the JSON config file (falls back to $CONVOSCAN_CONFIG)",
    )

    chat = sub.add_parser("chat", help="talk to the assistant from the terminal")
    chat.add_argument("--server", help="gateway base URL; omit for in-process mode")
    chat.add_argument("--token", default="", help="bearer token for --server")
    chat.add_argument("--config", help="config file for in-process mode")
    chat.add_argument("--script", help="file of utterances to replay, one per line")

    scan = sub.add_parser("scan", help="run one scan and print the result")
    scan.add_argument("path", help="directory to scan")
    scan.add_argument("--analyzer", help="analyzer id (default: best vulnerability analyzer)")
    scan.add_argument("--rulesets", default="", help="comma-separated ruleset labels")
    scan.add_argument("--format", choices=("json", "html", "text"), default="text")
    scan.add_argument("--data-dir", default="convoscan-data", help="report store location")
    scan.add_argument("--pmd-executable", help="enable the PMD adapter via this binary")

    watch = sub.add_parser(
        "watch", help="watch a directory and feed editor-activity events"
    )
    watch.add_argument("dir", help="project directory to watch")
    watch.add_argument("--server", help="gateway base URL to POST events to")
    watch.add_argument("--token", default="", help="bearer token for --server")
    watch.add_argument("--config", help="config file; events go straight to its queue")
    watch.add_argument("--interval", type=float, default=0.5, help="poll interval (s)")
    watch.add_argument(
        "--max-events", type=int, default=0, help="stop after N events (0 = forever)"
    )

    seed = sub.add_parser("seed", help="write a demo fixture corpus")
    seed.add_argument("kind", choices=("vulnerable", "clean", "clone", "probe"))
    seed.add_argument("dir", help="destination directory (or file for 'probe')")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "chat":
            return _cmd_chat(args)
        if args.command == "scan":
            return _cmd_scan(args)
        if args.command == "watch":
            return _cmd_watch(args)
        if args.command == "seed":
            return _cmd_seed(args)
    except ConvoscanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


# ---------------------------------------------------------------------------
# serve


def _cmd_serve(args) -> int:
    config_path = args.config or os.environ.get("CONVOSCAN_CONFIG")
    if not config_path:
        print("error: pass --config or set CONVOSCAN_CONFIG", file=sys.stderr)
        return 2
    try:
        config = load_config(config_path)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        gateway = Gateway(config)
    except OSError as exc:
        print(f"error: cannot bind {config.listen_addr}: {exc}", file=sys.stderr)
        return 3
    print(f"convoscan gateway listening on http://{gateway.address}")
    try:
        gateway.serve_forever()
    except KeyboardInterrupt:
        gateway.stop()
    return 0


# ---------------------------------------------------------------------------
# chat


class _RemoteChat:
    def __init__(self, base_url: str, token: str):
        self._url = base_url.rstrip("/") + "/v1/webhook"
        self._token = token
        self._session = uuid.uuid4().hex[:10]

    def send(self, text: str) -> dict:
        body = json.dumps(
            {"session": self._session, "query": text, "timestamp": ""}
        ).encode("utf-8")
        request = urllib.request.Request(
            self._url, data=body, headers={"Content-Type": "application/json"}
        )
        if self._token:
            request.add_header("Authorization", f"Bearer {self._token}")
        try:
            with urllib.request.urlopen(request, timeout=60) as response:
                return json.loads(response.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            detail = exc.read().decode("utf-8", errors="replace")
            raise InputError(f"gateway returned {exc.code}: {detail}") from exc
        except urllib.error.URLError as exc:
            raise InputError(f"cannot reach gateway: {exc.reason}") from exc


class _LocalChat:
    def __init__(self, config: GatewayConfig):
        self._service = Service(config)
        self._session = uuid.uuid4().hex[:10]

    def send(self, text: str) -> dict:
        return self._service.handle_webhook(self._session, text)


def _chat_lines(args):
    if args.script:
        text = Path(args.script).read_text(encoding="utf-8")
        for line in text.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                yield line
        return
    while True:
        try:
            yield input("you> ")
        except EOFError:
            return


def _cmd_chat(args) -> int:
    if args.server:
        client = _RemoteChat(args.server, args.token)
    else:
        config = load_config(args.config) if args.config else GatewayConfig()
        client = _LocalChat(config)

    scripted = bool(args.script)
    for line in _chat_lines(args):
        if not line.strip():
            continue
        if scripted:
            print(f"you> {line}")
        response = client.send(line)
        if scripted and line.strip().lower() == "status":
            response = _poll_scan(client, response)
        print(f"assistant> {response['speech']}")
        if response.get("end_session"):
            return 0
    return 0


def _poll_scan(client, response: dict) -> dict:
    """Re-ask for status until the scan settles, for deterministic scripts."""
    for _ in range(POLL_ATTEMPTS):
        if response.get("report_id") or "still running" not in response["speech"]:
            break
        time.sleep(POLL_INTERVAL)
        response = client.send("status")
    return response


# ---------------------------------------------------------------------------
# scan


def _cmd_scan(args) -> int:
    root = Path(args.path)
    if not root.is_dir():
        print(f"error: no such directory: {args.path}", file=sys.stderr)
        return 2

    store = ReportStore(args.data_dir)
    registry = AnalyzerRegistry(Path(args.data_dir) / "registry.json")
    registry.register(MinilintAdapter())
    registry.register(CloneDetectorAdapter(store=store))
    if args.pmd_executable:
        registry.register(PmdAdapter(executable=args.pmd_executable))

    if args.analyzer:
        analyzer_id = args.analyzer
        if registry.find(analyzer_id) is None:
            print(f"error: unknown analyzer: {analyzer_id}", file=sys.stderr)
            return 2
    else:
        language = detect_project_language(root) or "java"
        candidates = [
            d for d in registry.list_descriptors()
            if d.supports(language) and any(c != "clone" for c in d.categories)
        ]
        if not candidates:
            print(f"error: no analyzer supports {language}", file=sys.stderr)
            return 2
        analyzer_id = min(candidates, key=lambda d: (-d.popularity, d.analyzer_id)).analyzer_id

    labels = tuple(x.strip() for x in args.rulesets.split(",") if x.strip())
    target = ScanTarget(
        kind=TargetKind.IDE_PROJECT, path=str(root), display_name=root.name
    )
    report = run_scan(
        ScanRequest(target=target, analyzer_id=analyzer_id, ruleset_labels=labels),
        registry=registry,
        store=store,
    )
    if report.status is not ReportStatus.COMPLETED:
        print(f"error: scan {report.status.value.lower()}", file=sys.stderr)
        return 2

    if args.format == "json":
        sys.stdout.write(store.raw_bytes(report.report_id).decode("utf-8"))
    elif args.format == "html":
        sys.stdout.write(render_html(report))
    else:
        summary = summarize(report)
        print(f"report {report.report_id} ({analyzer_id} on {root})")
        print(speech_text(summary))
        for f in report.findings:
            print(
                f"  {f.severity.label:8} {f.file_path}:{f.begin_line} "
                f"{f.rule_id}: {f.message}"
            )
    return 1 if report.findings else 0


# ---------------------------------------------------------------------------
# watch


def _cmd_watch(args) -> int:
    watcher = watch_directory(args.dir)
    if args.server:
        url = args.server.rstrip("/") + "/v1/events/editor"

        def sink(event):
            body = json.dumps(event.to_dict()).encode("utf-8")
            request = urllib.request.Request(
                url, data=body, headers={"Content-Type": "application/json"}
            )
            if args.token:
                request.add_header("Authorization", f"Bearer {args.token}")
            urllib.request.urlopen(request, timeout=10).close()
    else:
        config = load_config(args.config) if args.config else GatewayConfig()
        queue = EventQueue(
            Path(config.data_dir) / "queue.jsonl",
            staleness=timedelta(minutes=config.staleness_minutes),
        )
        sink = queue.record_event

    print(f"watching {args.dir} (interval {args.interval}s)")
    emitted = 0
    try:
        for event in watcher.watch(interval=args.interval):
            sink(event)
            print(f"  {event.current_file}")
            emitted += 1
            if args.max_events and emitted >= args.max_events:
                break
    except KeyboardInterrupt:
        pass
    return 0


# ---------------------------------------------------------------------------
# seed


def _cmd_seed(args) -> int:
    dest = Path(args.dir)
    if args.kind == "vulnerable":
        fixtures.write_vulnerable_corpus(dest)
    elif args.kind == "clean":
        fixtures.write_clean_corpus(dest)
    elif args.kind == "clone":
        fixtures.write_clone_corpus(dest)
    else:
        fixtures.write_probe_fixture(dest)
    print(f"wrote {args.kind} fixture to {dest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
