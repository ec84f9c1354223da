from __future__ import annotations

from dataclasses import replace
from datetime import timedelta

import pytest
from hypothesis import given, strategies as st

from convoscan.errors import MappingError
from convoscan.model import (
    Finding,
    NormalizedReport,
    ReportStatus,
    ScanTarget,
    Severity,
    TargetKind,
    dedupe_findings,
    finding_fingerprint,
    format_timestamp,
    parse_timestamp,
    severity_from_priority,
    utcnow,
    validate_report,
)

from conftest import make_finding, make_report


class TestSeverity:
    def test_total_order(self):
        assert Severity.CRITICAL > Severity.HIGH > Severity.MEDIUM > Severity.LOW > Severity.INFO

    def test_labels_round_trip(self):
        for sev in Severity:
            assert Severity.from_label(sev.label) is sev

    def test_unknown_label(self):
        with pytest.raises(MappingError):
            Severity.from_label("catastrophic")


class TestSeverityFromPriority:
    # Mapping verified against PMD 6.x semantics: priority 1 is the most
    # urgent ("change absolutely required"), 5 the least.
    @pytest.mark.parametrize(
        "priority,expected",
        [
            (1, Severity.CRITICAL),
            (2, Severity.HIGH),
            (3, Severity.MEDIUM),
            (4, Severity.LOW),
            (5, Severity.INFO),
        ],
    )
    def test_pmd_mapping_is_total_and_order_reversing(self, priority, expected):
        assert severity_from_priority("pmd", priority) is expected

    def test_unknown_analyzer_defaults_to_medium(self):
        assert severity_from_priority("unknown-tool", 2) is Severity.MEDIUM

    @pytest.mark.parametrize("priority", [0, 6, -1, 100])
    def test_out_of_range_pmd_priority(self, priority):
        with pytest.raises(MappingError) as exc:
            severity_from_priority("pmd", priority)
        assert "pmd" in str(exc.value)
        assert str(priority) in str(exc.value)

    def test_monotone(self):
        severities = [severity_from_priority("pmd", p) for p in range(1, 6)]
        assert severities == sorted(severities, reverse=True)


class TestFingerprint:
    def test_identical_findings_identical_fingerprint(self):
        assert finding_fingerprint(make_finding()) == finding_fingerprint(make_finding())

    def test_message_excluded(self):
        a = make_finding(message="one wording")
        b = make_finding(message="another wording entirely")
        assert finding_fingerprint(a) == finding_fingerprint(b)

    def test_begin_line_differentiates(self):
        assert finding_fingerprint(make_finding(begin_line=10)) != finding_fingerprint(
            make_finding(begin_line=11)
        )

    def test_perturbations(self):
        # Brute-force check: the four identity fields each change the
        # fingerprint, every other field leaves it alone.
        base = make_finding()
        base_fp = finding_fingerprint(base)
        changing = {
            "file_path": "src/Other.java",
            "begin_line": 99,
            "rule_id": "security/Other",
            "analyzer_id": "pmd",
        }
        inert = {
            "end_line": 99,
            "begin_col": 7,
            "end_col": 9,
            "category": "errorprone",
            "severity": Severity.INFO,
            "message": "different",
            "info_url": "https://example.org",
        }
        for field, value in changing.items():
            assert finding_fingerprint(replace(base, **{field: value})) != base_fp, field
        for field, value in inert.items():
            assert finding_fingerprint(replace(base, **{field: value})) == base_fp, field

    def test_dedupe_preserves_identity_tuples(self):
        findings = [
            make_finding(),
            make_finding(message="same place, new words"),
            make_finding(begin_line=42),
        ]
        deduped = dedupe_findings(findings)
        tuples = {(f.file_path, f.begin_line, f.rule_id, f.analyzer_id) for f in findings}
        assert {(f.file_path, f.begin_line, f.rule_id, f.analyzer_id) for f in deduped} == tuples
        assert len(deduped) == 2


class TestValidateReport:
    def test_well_formed(self):
        assert validate_report(make_report([make_finding()])) == []

    def test_end_line_before_begin_line_names_index(self):
        bad = make_finding(begin_line=10, end_line=5)
        problems = validate_report(make_report([make_finding(), bad]))
        assert len(problems) == 1
        assert "finding 1" in problems[0]

    def test_timestamp_violation(self):
        report = make_report([])
        report = replace(report, finished_at=report.started_at - timedelta(seconds=1))
        problems = validate_report(report)
        assert len(problems) == 1
        assert "finished_at" in problems[0]

    def test_git_target_requires_origin(self):
        report = make_report(
            [],
            target=ScanTarget(
                kind=TargetKind.GIT_REPO, path="/tmp/x", display_name="x"
            ),
        )
        assert any("origin" in p for p in validate_report(report))

    def test_empty_fields_flagged(self):
        bad = make_finding(rule_id="", message="", analyzer_id="")
        problems = validate_report(make_report([bad]))
        assert len(problems) == 3


finding_strategy = st.builds(
    make_finding,
    file_path=st.text(
        alphabet=st.characters(min_codepoint=48, max_codepoint=122), min_size=1, max_size=30
    ),
    begin_line=st.integers(min_value=1, max_value=5000),
    end_line=st.integers(min_value=0, max_value=400),
    begin_col=st.integers(min_value=0, max_value=200),
    end_col=st.integers(min_value=0, max_value=200),
    severity=st.sampled_from(list(Severity)),
    rule_id=st.text(min_size=1, max_size=20),
    category=st.sampled_from(["security", "errorprone", "clone"]),
    message=st.text(min_size=1, max_size=60),
    analyzer_id=st.sampled_from(["pmd", "minilint", "clone-detector"]),
    info_url=st.none() | st.just("https://example.org/rule"),
).map(lambda f: replace(f, end_line=f.begin_line + f.end_line))


@given(findings=st.lists(finding_strategy, max_size=8))
def test_round_trip_stability(findings):
    # validate_report(r) == [] implies serialize -> parse is identity.
    report = make_report(findings)
    assert validate_report(report) == []
    assert NormalizedReport.from_json(report.to_json()) == report


def test_timestamp_z_suffix_accepted():
    stamp = parse_timestamp("2021-03-05T14:12:33Z")
    assert stamp.tzinfo is not None
    assert format_timestamp(stamp) == "2021-03-05T14:12:33+00:00"


def test_timestamp_round_trip():
    now = utcnow()
    assert parse_timestamp(format_timestamp(now)) == now
