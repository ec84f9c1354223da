from __future__ import annotations

from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from convoscan.dialog.classifier import Intent, IntentClassifier, IntentMatch
from convoscan.dialog.engine import (
    CLONE_ANALYZER_ID,
    ConversationSession,
    DialogEngine,
    PendingScan,
    SessionState,
    SystemEvent,
    new_session,
)
from convoscan.errors import InputError, SessionError
from convoscan.hub import AnalyzerRegistry, detect_project_language
from convoscan.hub.clone_adapter import CloneDetectorAdapter
from convoscan.hub.minilint import MinilintAdapter
from convoscan.hub.pmd import PmdAdapter
from convoscan.model import ScanTarget, TargetKind, utcnow
from convoscan.report import DeliveryChannel, DeliveryReceipt
from convoscan.workspace import ActiveContext

from conftest import make_finding, make_report

NON_ENDED_STATES = (
    SessionState.IDLE,
    SessionState.AWAIT_TARGET,
    SessionState.AWAIT_ANALYZER,
    SessionState.SCANNING,
    SessionState.AWAIT_ACTION,
)


def match_for(intent: Intent, entities: dict | None = None, text: str = "") -> IntentMatch:
    return IntentMatch(intent, 1.0 if intent is not Intent.FALLBACK else 0.0,
                       entities or {}, text or intent.value.lower())


def build_engine(
    tmp_path,
    analyzers=("minilint", "clone-detector"),
    with_context=True,
    report=None,
    receipt=None,
):
    registry = AnalyzerRegistry()
    adapters = {
        "minilint": MinilintAdapter,
        "clone-detector": CloneDetectorAdapter,
        "pmd": PmdAdapter,
    }
    for analyzer_id in analyzers:
        registry.register(adapters[analyzer_id]())

    project = tmp_path / "proj"
    (project / "src").mkdir(parents=True, exist_ok=True)
    (project / "src" / "Main.java").write_text("public class Main {}\n")
    ctx = ActiveContext(
        project=ScanTarget(
            kind=TargetKind.IDE_PROJECT, path=str(project), display_name="proj"
        ),
        current_file="src/Main.java",
        as_of=utcnow(),
    )
    engine = DialogEngine(
        IntentClassifier(analyzer_ids=list(analyzers)),
        registry,
        context_provider=(lambda: ctx) if with_context else (lambda: None),
        report_provider=(lambda rid: report),
        deliverer=(lambda rid: receipt),
        frontmost_provider=lambda: "idea",
        language_detector=lambda t: detect_project_language(t.path),
    )
    return engine, ctx


class TestNewSession:
    def test_starts_idle(self):
        session = new_session("abc")
        assert session.state is SessionState.IDLE
        assert session.fallback_count == 0
        assert session.transcript == ()

    def test_same_id_independent_equal_values(self):
        assert new_session("abc") == new_session("abc")
        assert new_session("abc") is not new_session("abc")

    def test_empty_id_rejected(self):
        with pytest.raises(InputError):
            new_session("")


class TestTableRows:
    def test_idle_bye_ends_session(self, tmp_path):
        engine, _ = build_engine(tmp_path)
        session, reply = engine.advance(new_session("s"), match_for(Intent.BYE))
        assert session.state is SessionState.ENDED
        assert reply.end_session is True

    def test_cancel_from_await_target(self, tmp_path):
        engine, _ = build_engine(tmp_path)
        session = replace(new_session("s"), state=SessionState.AWAIT_TARGET)
        session, reply = engine.advance(session, match_for(Intent.CANCEL))
        assert session.state is SessionState.IDLE
        assert "cancel" in reply.speech.lower()

    def test_three_fallbacks_return_to_idle(self, tmp_path):
        engine, _ = build_engine(tmp_path)
        session = replace(new_session("s"), state=SessionState.AWAIT_TARGET)
        for i in range(2):
            session, reply = engine.advance(session, match_for(Intent.FALLBACK))
            assert session.state is SessionState.AWAIT_TARGET
            assert session.fallback_count == i + 1
        session, reply = engine.advance(session, match_for(Intent.FALLBACK))
        assert session.state is SessionState.IDLE
        assert "sorry" in reply.speech.lower()
        assert session.fallback_count == 0

    def test_fallback_count_resets_on_match(self, tmp_path):
        engine, _ = build_engine(tmp_path)
        session, _ = engine.advance(new_session("s"), match_for(Intent.FALLBACK))
        assert session.fallback_count == 1
        session, _ = engine.advance(session, match_for(Intent.WELCOME))
        assert session.fallback_count == 0

    def test_advance_on_ended_session(self, tmp_path):
        engine, _ = build_engine(tmp_path)
        session, _ = engine.advance(new_session("s"), match_for(Intent.BYE))
        with pytest.raises(SessionError):
            engine.advance(session, match_for(Intent.WELCOME))


class TestVulnerabilityFlow:
    def test_target_prompt_names_active_project(self, tmp_path):
        engine, ctx = build_engine(tmp_path)
        session, reply = engine.advance(
            new_session("s"), match_for(Intent.VULNERABILITY_SCANNING)
        )
        assert session.state is SessionState.AWAIT_TARGET
        assert "proj" in reply.speech
        assert "IDE" in reply.speech

    def test_ide_slot_with_single_analyzer_goes_scanning(self, tmp_path):
        engine, ctx = build_engine(tmp_path)
        session, _ = engine.advance(
            new_session("s"), match_for(Intent.VULNERABILITY_SCANNING)
        )
        session, reply = engine.advance(
            session, match_for(Intent.FALLBACK, {"target": "ide"}, "IDE")
        )
        assert session.state is SessionState.SCANNING
        assert session.pending.target == ctx.project
        assert session.pending.analyzer_id == "minilint"

    def test_two_analyzers_ask_which(self, tmp_path):
        engine, _ = build_engine(tmp_path, analyzers=("minilint", "pmd"))
        session, _ = engine.advance(
            new_session("s"), match_for(Intent.VULNERABILITY_SCANNING)
        )
        session, reply = engine.advance(
            session, match_for(Intent.FALLBACK, {"target": "ide"}, "IDE")
        )
        assert session.state is SessionState.AWAIT_ANALYZER
        assert "minilint" in reply.speech and "pmd" in reply.speech
        session, _ = engine.advance(
            session, match_for(Intent.FALLBACK, {"analyzer": "pmd"}, "use pmd")
        )
        assert session.state is SessionState.SCANNING
        assert session.pending.analyzer_id == "pmd"

    def test_slot_in_first_utterance_chains(self, tmp_path):
        engine, _ = build_engine(tmp_path)
        session, _ = engine.advance(
            new_session("s"),
            match_for(Intent.VULNERABILITY_SCANNING, {"target": "ide"}),
        )
        assert session.state is SessionState.SCANNING

    def test_no_active_context_stays_put(self, tmp_path):
        engine, _ = build_engine(tmp_path, with_context=False)
        session, _ = engine.advance(
            new_session("s"), match_for(Intent.VULNERABILITY_SCANNING)
        )
        session, reply = engine.advance(
            session, match_for(Intent.FALLBACK, {"target": "ide"}, "IDE")
        )
        assert session.state is SessionState.AWAIT_TARGET
        assert "cannot see an active project" in reply.speech

    def test_scan_finished_speaks_summary(self, tmp_path):
        report = make_report([make_finding()], report_id="r-9")
        engine, _ = build_engine(tmp_path, report=report)
        session = replace(
            new_session("s"),
            state=SessionState.SCANNING,
            pending=PendingScan(analyzer_id="minilint"),
        )
        session, reply = engine.advance(
            session, SystemEvent(SystemEvent.SCAN_FINISHED, report_id="r-9")
        )
        assert session.state is SessionState.AWAIT_ACTION
        assert "1 issue" in reply.speech
        assert reply.attachment == "r-9"


class TestAwaitAction:
    def _session(self):
        return replace(
            new_session("s"),
            state=SessionState.AWAIT_ACTION,
            pending=PendingScan(analyzer_id="minilint", last_report_id="r-9"),
        )

    def test_read_speaks_top_items(self, tmp_path):
        report = make_report([make_finding()], report_id="r-9")
        engine, _ = build_engine(tmp_path, report=report)
        session, reply = engine.advance(
            self._session(), match_for(Intent.FALLBACK, {"action": "read"}, "read")
        )
        assert session.state is SessionState.IDLE
        assert "security/HardcodedCredential" in reply.speech
        assert "src/Main.java" in reply.speech

    def test_email_delivers(self, tmp_path):
        receipt = DeliveryReceipt(
            DeliveryChannel.EMAIL, "dev@example.org", utcnow(), True, "sent"
        )
        engine, _ = build_engine(tmp_path, receipt=receipt)
        session, reply = engine.advance(
            self._session(), match_for(Intent.FALLBACK, {"action": "email"}, "email")
        )
        assert session.state is SessionState.IDLE
        assert "dev@example.org" in reply.speech

    def test_email_failure_is_graceful(self, tmp_path):
        receipt = DeliveryReceipt(
            DeliveryChannel.EMAIL, "", utcnow(), False, "mail gateway not configured"
        )
        engine, _ = build_engine(tmp_path, receipt=receipt)
        session, reply = engine.advance(
            self._session(), match_for(Intent.FALLBACK, {"action": "email"}, "email")
        )
        assert session.state is SessionState.IDLE
        assert "mail gateway not configured" in reply.speech

    def test_autofix_reports_unsupported(self, tmp_path):
        engine, _ = build_engine(tmp_path)
        session, reply = engine.advance(
            self._session(), match_for(Intent.FALLBACK, {"action": "autofix"}, "fix")
        )
        assert session.state is SessionState.IDLE
        assert "not supported" in reply.speech
        assert "minilint" in reply.speech


class TestCloneFlow:
    def test_idle_clone_detection_uses_clone_analyzer(self, tmp_path):
        engine, ctx = build_engine(tmp_path)
        session, reply = engine.advance(
            new_session("s"), match_for(Intent.CLONE_DETECTION)
        )
        assert session.state is SessionState.SCANNING
        assert session.pending.analyzer_id == CLONE_ANALYZER_ID
        assert session.pending.target == ctx.project

    def test_clone_without_target_prompts(self, tmp_path):
        engine, _ = build_engine(tmp_path, with_context=False)
        session, reply = engine.advance(
            new_session("s"), match_for(Intent.CLONE_DETECTION)
        )
        assert session.state is SessionState.AWAIT_TARGET
        assert session.pending.clone_scan is True


class TestTotality:
    def _session_in(self, state: SessionState, tmp_path) -> ConversationSession:
        target = ScanTarget(
            kind=TargetKind.IDE_PROJECT, path=str(tmp_path), display_name="p"
        )
        pending = {
            SessionState.IDLE: PendingScan(),
            SessionState.AWAIT_TARGET: PendingScan(),
            SessionState.AWAIT_ANALYZER: PendingScan(target=target),
            SessionState.SCANNING: PendingScan(target=target, analyzer_id="minilint"),
            SessionState.AWAIT_ACTION: PendingScan(
                target=target, analyzer_id="minilint", last_report_id="r-9"
            ),
        }[state]
        return replace(new_session("s"), state=state, pending=pending)

    def test_every_state_intent_pair_defined(self, tmp_path):
        engine, _ = build_engine(tmp_path, report=make_report([], report_id="r-9"))
        for state in NON_ENDED_STATES:
            for intent in Intent:
                session = self._session_in(state, tmp_path)
                new, reply = engine.advance(session, match_for(intent))
                assert new.state in SessionState, (state, intent)
                assert reply.speech, (state, intent)

    def test_system_events_defined_everywhere(self, tmp_path):
        engine, _ = build_engine(tmp_path, report=make_report([], report_id="r-9"))
        events = [
            SystemEvent(SystemEvent.SCAN_FINISHED, report_id="r-9"),
            SystemEvent(SystemEvent.SCAN_FAILED, detail="boom"),
        ]
        for state in NON_ENDED_STATES:
            for event in events:
                session = self._session_in(state, tmp_path)
                new, reply = engine.advance(session, event)
                assert reply.speech, (state, event.kind)

    def test_transcript_grows_two_per_utterance_one_per_event(self, tmp_path):
        engine, _ = build_engine(tmp_path, report=make_report([], report_id="r-9"))
        session = new_session("s")
        session, _ = engine.advance(session, match_for(Intent.WELCOME))
        assert len(session.transcript) == 2
        session, _ = engine.advance(session, match_for(Intent.FALLBACK))
        assert len(session.transcript) == 4
        scanning = self._session_in(SessionState.SCANNING, tmp_path)
        after, _ = engine.advance(
            scanning, SystemEvent(SystemEvent.SCAN_FINISHED, report_id="r-9")
        )
        assert len(after.transcript) == len(scanning.transcript) + 1


intent_step = st.tuples(
    st.sampled_from(list(Intent)),
    st.sampled_from(
        [{}, {"target": "ide"}, {"target": "git"}, {"action": "read"},
         {"action": "email"}, {"analyzer": "minilint"}]
    ),
)


@settings(max_examples=60, deadline=None)
@given(steps=st.lists(intent_step, min_size=1, max_size=12))
def test_random_walk_invariants(tmp_path_factory, steps):
    tmp_path = tmp_path_factory.mktemp("walk")
    engine, _ = build_engine(tmp_path, report=make_report([], report_id="r-9"))
    session = new_session("s")
    for intent, entities in steps:
        if session.state is SessionState.ENDED:
            break
        session, reply = engine.advance(session, match_for(intent, dict(entities)))
        assert session.fallback_count <= 3
        if session.state is SessionState.SCANNING:
            assert session.pending.target is not None
            assert session.pending.analyzer_id is not None
