from __future__ import annotations

import json
import urllib.error
import urllib.request
from datetime import timedelta
from pathlib import Path

import pytest

from convoscan import fixtures
from convoscan.gateway import Gateway, GatewayConfig
from convoscan.model import (
    Finding,
    NormalizedReport,
    ReportStatus,
    ScanTarget,
    Severity,
    TargetKind,
    utcnow,
)

FIXTURE_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def vulnerable_dir(tmp_path_factory) -> Path:
    return fixtures.write_vulnerable_corpus(tmp_path_factory.mktemp("vulnerable"))


@pytest.fixture(scope="session")
def clean_dir(tmp_path_factory) -> Path:
    return fixtures.write_clean_corpus(tmp_path_factory.mktemp("clean"))


@pytest.fixture(scope="session")
def clone_dir(tmp_path_factory) -> Path:
    return fixtures.write_clone_corpus(tmp_path_factory.mktemp("clones"))


def make_finding(**overrides) -> Finding:
    base = dict(
        file_path="src/Main.java",
        begin_line=10,
        end_line=12,
        begin_col=1,
        end_col=20,
        rule_id="security/HardcodedCredential",
        category="security",
        severity=Severity.HIGH,
        message="credential in source",
        analyzer_id="minilint",
        info_url=None,
    )
    base.update(overrides)
    return Finding(**base)


def make_report(findings=(), status=ReportStatus.COMPLETED, **overrides) -> NormalizedReport:
    started = utcnow()
    base = dict(
        report_id="r-test",
        target=ScanTarget(
            kind=TargetKind.IDE_PROJECT, path="/tmp/project", display_name="project"
        ),
        analyzer_id="minilint",
        ruleset_labels=("security", "errorprone"),
        findings=tuple(findings),
        started_at=started,
        finished_at=started + timedelta(seconds=3),
        status=status,
    )
    base.update(overrides)
    return NormalizedReport(**base)


class GatewayHarness:
    def __init__(self, gateway: Gateway, token: str):
        self.gateway = gateway
        self.token = token
        self.base_url = f"http://{gateway.address}"
        self.service = gateway.service

    def request(self, method: str, path: str, body: dict | None = None,
                token: str | None = None, raw: bool = False):
        data = json.dumps(body).encode() if body is not None else None
        req = urllib.request.Request(
            self.base_url + path, data=data, method=method,
            headers={"Content-Type": "application/json"},
        )
        use_token = self.token if token is None else token
        if use_token:
            req.add_header("Authorization", f"Bearer {use_token}")
        try:
            with urllib.request.urlopen(req, timeout=30) as resp:
                payload = resp.read()
                return resp.status, payload if raw else (
                    json.loads(payload) if payload else None
                )
        except urllib.error.HTTPError as exc:
            payload = exc.read()
            return exc.code, payload if raw else (
                json.loads(payload) if payload else None
            )


@pytest.fixture
def gateway_harness(tmp_path):
    token = "secret-token"
    config = GatewayConfig(
        listen_addr="127.0.0.1:0",
        data_dir=str(tmp_path / "data"),
        auth_token=token,
        probe_fixture=str(
            fixtures.write_probe_fixture(tmp_path / "probe.json")
        ),
    )
    gateway = Gateway(config)
    gateway.start()
    harness = GatewayHarness(gateway, token)
    yield harness
    gateway.stop()
