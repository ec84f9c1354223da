"""Tree-structured conversation driving scan configuration and launch.

State machine::

    Idle --VulnerabilityScanning--> AwaitTarget --target slot--> AwaitAnalyzer
    Idle --CloneDetection--------> Scanning (clone detector)        |
    AwaitAnalyzer --analyzer slot--> Scanning <---------------------+
    Scanning --ScanFinished------> AwaitAction --email/read/fix--> Idle
    any --Cancel--> Idle      any --Bye--> Ended
    any --Fallback--> same state (3 misses return to Idle)

``advance`` is a pure function of (session, input): it returns a new session
value and never mutates its argument. Launching the scan itself is the
caller's job, signalled by the transition into ``SCANNING`` (the resolved
target and analyzer sit in ``session.pending``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

from ..errors import InputError, SessionError
from ..model import NormalizedReport, ReportStatus, ScanTarget
from ..report import summarize, speech_text, top_items_text
from ..workspace import ActiveContext
from .classifier import Intent, IntentMatch

CLONE_ANALYZER_ID = "clone-detector"
FALLBACK_LIMIT = 3


class SessionState(Enum):
    IDLE = "Idle"
    AWAIT_TARGET = "AwaitTarget"
    AWAIT_ANALYZER = "AwaitAnalyzer"
    SCANNING = "Scanning"
    AWAIT_ACTION = "AwaitAction"
    ENDED = "Ended"


@dataclass(frozen=True)
class PendingScan:
    """Partially configured scan request accumulated across turns."""

    target: ScanTarget | None = None
    analyzer_id: str | None = None
    last_report_id: str | None = None
    clone_scan: bool = False


@dataclass(frozen=True)
class Reply:
    speech: str
    expects_input: bool = True
    end_session: bool = False
    attachment: str | None = None  # report_id the speech refers to


@dataclass(frozen=True)
class SystemEvent:
    """Out-of-band input injected by the scan runner, not the user."""

    SCAN_FINISHED = "scan_finished"
    SCAN_FAILED = "scan_failed"

    kind: str
    report_id: str | None = None
    detail: str = ""


@dataclass(frozen=True)
class ConversationSession:
    session_id: str
    state: SessionState = SessionState.IDLE
    pending: PendingScan = field(default_factory=PendingScan)
    fallback_count: int = 0
    transcript: tuple[tuple[str, str], ...] = ()

    def with_turn(self, speaker: str, text: str) -> "ConversationSession":
        return replace(self, transcript=self.transcript + ((speaker, text),))


def new_session(session_id: str) -> ConversationSession:
    if not session_id:
        raise InputError("session_id is empty")
    return ConversationSession(session_id=session_id)


_GREETING = (
    "Hello! I can scan a project for vulnerabilities, look for duplicated "
    "code, email you a report, or read out the top action items. "
    "What would you like to do?"
)
_APOLOGY = (
    "Sorry, I keep missing what you mean. Let's start over. Ask me to scan "
    "for vulnerabilities or to find duplicate code whenever you are ready."
)
_CANCELLED = "Okay, task cancelled. What would you like to do next?"

_REPROMPTS = {
    SessionState.IDLE: (
        "Sorry, I did not catch that. You can ask me to scan for "
        "vulnerabilities or to find duplicate code."
    ),
    SessionState.AWAIT_TARGET: "Sorry, I did not catch that. Please say IDE or Git.",
    SessionState.AWAIT_ANALYZER: (
        "Sorry, I did not catch that. Please name one of the analyzers I listed."
    ),
    SessionState.SCANNING: (
        "The scan is still running. Say status to check on it, or cancel to stop."
    ),
    SessionState.AWAIT_ACTION: (
        "Sorry, I did not catch that. Say email, read, or fix."
    ),
}


class DialogEngine:
    """Drives conversations; collaborators are injected and read-only.

    Every provider is optional so the engine degrades gracefully: a missing
    workspace monitor simply means no project can be resolved from the IDE.
    """

    def __init__(
        self,
        classifier=None,
        registry=None,
        *,
        context_provider: Callable[[], ActiveContext | None] | None = None,
        repo_target_provider: Callable[[], ScanTarget | None] | None = None,
        report_provider: Callable[[str], NormalizedReport | None] | None = None,
        deliverer: Callable[[str], object] | None = None,
        frontmost_provider: Callable[[], str | None] | None = None,
        language_detector: Callable[[ScanTarget], str | None] | None = None,
        top_n: int = 5,
    ):
        self._classifier = classifier
        self._registry = registry
        self._context_provider = context_provider
        self._repo_target_provider = repo_target_provider
        self._report_provider = report_provider
        self._deliverer = deliverer
        self._frontmost_provider = frontmost_provider
        self._language_detector = language_detector
        self._top_n = top_n

    # ------------------------------------------------------------------
    # public API

    def classify(self, utterance: str) -> IntentMatch:
        if self._classifier is None:
            raise InputError("engine has no classifier configured")
        return self._classifier.classify(utterance)

    def advance(
        self, session: ConversationSession, input: IntentMatch | SystemEvent
    ) -> tuple[ConversationSession, Reply]:
        if session.state is SessionState.ENDED:
            raise SessionError(f"session {session.session_id} has ended")
        if isinstance(input, SystemEvent):
            session, reply = self._on_system_event(session, input)
            return session.with_turn("assistant", reply.speech), reply

        match = input
        session = session.with_turn("user", match.utterance or match.intent.value)
        session, reply = self._dispatch(session, match)
        return session.with_turn("assistant", reply.speech), reply

    def progress_reply(self, session: ConversationSession) -> Reply:
        name = ""
        if session.pending.target is not None:
            name = f" of {session.pending.target.display_name}"
        return Reply(f"The scan{name} is still running. Ask me for status again in a moment.")

    # ------------------------------------------------------------------
    # transitions

    def _dispatch(
        self, session: ConversationSession, match: IntentMatch
    ) -> tuple[ConversationSession, Reply]:
        if match.intent is Intent.CANCEL:
            return self._to_idle(session), Reply(_CANCELLED)
        if match.intent is Intent.BYE:
            ended = replace(session, state=SessionState.ENDED, fallback_count=0)
            return ended, Reply("Goodbye!", expects_input=False, end_session=True)

        handler = {
            SessionState.IDLE: self._in_idle,
            SessionState.AWAIT_TARGET: self._in_await_target,
            SessionState.AWAIT_ANALYZER: self._in_await_analyzer,
            SessionState.SCANNING: self._in_scanning,
            SessionState.AWAIT_ACTION: self._in_await_action,
        }[session.state]
        return handler(session, match)

    def _in_idle(self, session, match):
        if match.intent is Intent.WELCOME:
            return self._reset_fallback(session), Reply(_GREETING)
        if match.intent is Intent.VULNERABILITY_SCANNING:
            session = replace(
                session,
                state=SessionState.AWAIT_TARGET,
                pending=PendingScan(),
                fallback_count=0,
            )
            if match.entities.get("target"):
                return self._apply_target(session, match)
            return session, Reply(self._target_prompt())
        if match.intent is Intent.CLONE_DETECTION:
            return self._start_clone_flow(session, match)
        return self._fallback(session)

    def _in_await_target(self, session, match):
        if match.entities.get("target"):
            return self._apply_target(self._reset_fallback(session), match)
        if match.intent is not Intent.FALLBACK:
            return self._reset_fallback(session), Reply(self._target_prompt())
        return self._fallback(session)

    def _in_await_analyzer(self, session, match):
        analyzer = match.entities.get("analyzer")
        if analyzer:
            session = self._reset_fallback(session)
            descriptor = self._find_descriptor(analyzer)
            if descriptor is None:
                return session, Reply(
                    f"I do not know the analyzer {analyzer}. "
                    f"Available: {self._analyzer_names()}."
                )
            return self._enter_scanning(session, analyzer_id=analyzer)
        if match.intent is not Intent.FALLBACK:
            return self._reset_fallback(session), Reply(
                f"Please pick an analyzer: {self._analyzer_names()}."
            )
        return self._fallback(session)

    def _in_scanning(self, session, match):
        if match.intent is not Intent.FALLBACK:
            return self._reset_fallback(session), Reply(
                "A scan is already running. Say status to check on it, "
                "or cancel to stop waiting."
            )
        return self._fallback(session)

    def _in_await_action(self, session, match):
        action = match.entities.get("action")
        if action:
            return self._apply_action(self._reset_fallback(session), action)
        if match.intent is not Intent.FALLBACK:
            return self._reset_fallback(session), Reply(
                "Say email to get the report by mail, read to hear the top "
                "action items, or fix to attempt repairs."
            )
        return self._fallback(session)

    def _on_system_event(self, session, event: SystemEvent):
        if session.state is not SessionState.SCANNING:
            return session, Reply("There is no scan in progress.")
        if event.kind == SystemEvent.SCAN_FAILED or event.report_id is None:
            detail = f" ({event.detail})" if event.detail else ""
            return self._to_idle(session), Reply(
                f"The scan failed{detail}. Try again or pick a different analyzer."
            )
        report = self._load_report(event.report_id)
        if report is None:
            return self._to_idle(session), Reply(
                "The scan finished but I could not load its report."
            )
        if report.status is not ReportStatus.COMPLETED:
            return self._to_idle(session), Reply(
                f"The scan did not complete (status {report.status.value})."
            )
        summary = summarize(report, self._top_n)
        session = replace(
            session,
            state=SessionState.AWAIT_ACTION,
            pending=replace(session.pending, last_report_id=event.report_id),
            fallback_count=0,
        )
        speech = (
            speech_text(summary)
            + " Should I email the report, read the top action items, or try a fix?"
        )
        return session, Reply(speech, attachment=event.report_id)

    # ------------------------------------------------------------------
    # helpers

    def _apply_target(self, session, match: IntentMatch):
        kind = match.entities["target"]
        if kind == "ide":
            ctx = self._active_context()
            if ctx is None:
                return session, Reply(
                    "I cannot see an active project in your editor right now. "
                    "Say Git to scan a repository from your browser instead, "
                    "or cancel."
                )
            target = ctx.project
        else:
            target = self._repo_target()
            if target is None:
                return session, Reply(
                    "I could not find any GitHub repository tabs in your "
                    "browser. Say IDE to scan your editor project instead, "
                    "or cancel."
                )
        session = replace(session, pending=replace(session.pending, target=target))
        if session.pending.clone_scan:
            return self._enter_scanning(session, analyzer_id=CLONE_ANALYZER_ID)

        preference = match.entities.get("analyzer")
        candidates = self._vulnerability_analyzers(target)
        if preference and any(d.analyzer_id == preference for d in candidates):
            return self._enter_scanning(session, analyzer_id=preference)
        if not candidates:
            language = self._detect_language(target) or "this"
            return self._to_idle(session), Reply(
                f"No registered analyzer supports {language} projects, "
                f"so I cannot scan {target.display_name}."
            )
        if len(candidates) == 1:
            return self._enter_scanning(session, analyzer_id=candidates[0].analyzer_id)
        names = ", ".join(sorted(d.analyzer_id for d in candidates))
        session = replace(session, state=SessionState.AWAIT_ANALYZER)
        return session, Reply(f"I can use {names}. Which analyzer should I run?")

    def _apply_action(self, session, action: str):
        report_id = session.pending.last_report_id
        if action == "email":
            reply = self._deliver_reply(report_id)
        elif action == "read":
            reply = self._read_reply(report_id)
        else:  # autofix: in the dialog tree, but no analyzer supports it yet
            analyzer = session.pending.analyzer_id or "the analyzer"
            reply = Reply(
                f"Auto-fix is not supported by {analyzer} yet, so nothing "
                "was changed. Anything else?",
                attachment=report_id,
            )
        return self._to_idle(session, keep_report=True), reply

    def _deliver_reply(self, report_id: str | None) -> Reply:
        if report_id is None or self._deliverer is None:
            return Reply(
                "There is no report to deliver right now.", attachment=report_id
            )
        receipt = self._deliverer(report_id)
        if getattr(receipt, "ok", False):
            return Reply(
                f"Done. I emailed the report to {receipt.destination}.",
                attachment=report_id,
            )
        detail = getattr(receipt, "detail", "delivery failed")
        return Reply(
            f"I could not email the report ({detail}). "
            "It is still saved locally.",
            attachment=report_id,
        )

    def _read_reply(self, report_id: str | None) -> Reply:
        report = self._load_report(report_id) if report_id else None
        if report is None:
            return Reply("There is no report to read right now.")
        summary = summarize(report, self._top_n)
        return Reply(top_items_text(summary) + " Anything else?", attachment=report_id)

    def _start_clone_flow(self, session, match: IntentMatch):
        session = replace(
            session, pending=PendingScan(clone_scan=True), fallback_count=0
        )
        kind = match.entities.get("target")
        target: ScanTarget | None = None
        if kind == "git":
            target = self._repo_target()
        else:
            ctx = self._active_context()
            target = ctx.project if ctx else None
            if target is None and kind is None:
                target = self._repo_target()
        if target is None:
            session = replace(session, state=SessionState.AWAIT_TARGET)
            return session, Reply(self._target_prompt(clone=True))
        session = replace(session, pending=replace(session.pending, target=target))
        return self._enter_scanning(session, analyzer_id=CLONE_ANALYZER_ID)

    def _enter_scanning(self, session, analyzer_id: str):
        if self._find_descriptor(analyzer_id) is None:
            return self._to_idle(session), Reply(
                f"The analyzer {analyzer_id} is not available right now."
            )
        target = session.pending.target
        if target is None:  # scanning is never entered without a resolved target
            session = replace(session, state=SessionState.AWAIT_TARGET)
            return session, Reply(self._target_prompt(clone=session.pending.clone_scan))
        session = replace(
            session,
            state=SessionState.SCANNING,
            pending=replace(session.pending, analyzer_id=analyzer_id),
            fallback_count=0,
        )
        what = "duplicate-code" if session.pending.clone_scan else "vulnerability"
        return session, Reply(
            f"Starting a {what} scan of {target.display_name} with "
            f"{analyzer_id}. Say status when you want an update."
        )

    def _fallback(self, session):
        count = session.fallback_count + 1
        if count >= FALLBACK_LIMIT:
            return self._to_idle(session), Reply(_APOLOGY)
        session = replace(session, fallback_count=count)
        return session, Reply(_REPROMPTS[session.state])

    def _target_prompt(self, clone: bool = False) -> str:
        task = "look for duplicated code in" if clone else "scan"
        ctx = self._active_context()
        if ctx is not None:
            where = self._frontmost() or "your editor"
            return (
                f"Say IDE and I will {task} {ctx.project.display_name}, the "
                f"project you are working on in {where}. Say Git to use a "
                "GitHub repository from your browser instead."
            )
        return (
            f"Say IDE and I will {task} the project open in your editor, or "
            "say Git to use a GitHub repository from your browser."
        )

    def _to_idle(self, session, keep_report: bool = False):
        pending = PendingScan(
            last_report_id=session.pending.last_report_id if keep_report else None
        )
        return replace(
            session, state=SessionState.IDLE, pending=pending, fallback_count=0
        )

    @staticmethod
    def _reset_fallback(session):
        return replace(session, fallback_count=0)

    # provider wrappers: every failure degrades to "not available"

    def _active_context(self) -> ActiveContext | None:
        if self._context_provider is None:
            return None
        try:
            return self._context_provider()
        except Exception:
            return None

    def _repo_target(self) -> ScanTarget | None:
        if self._repo_target_provider is None:
            return None
        try:
            return self._repo_target_provider()
        except Exception:
            return None

    def _frontmost(self) -> str | None:
        if self._frontmost_provider is None:
            return None
        try:
            return self._frontmost_provider()
        except Exception:
            return None

    def _load_report(self, report_id: str) -> NormalizedReport | None:
        if self._report_provider is None:
            return None
        try:
            return self._report_provider(report_id)
        except Exception:
            return None

    def _detect_language(self, target: ScanTarget) -> str | None:
        if self._language_detector is None:
            return None
        try:
            return self._language_detector(target)
        except Exception:
            return None

    def _find_descriptor(self, analyzer_id: str):
        if self._registry is None:
            return None
        return self._registry.find(analyzer_id)

    def _vulnerability_analyzers(self, target: ScanTarget) -> list:
        if self._registry is None:
            return []
        language = self._detect_language(target)
        out = []
        for d in self._registry.list_descriptors():
            if not any(cat != "clone" for cat in d.categories):
                continue  # clone-only tools never serve a vulnerability scan
            if language is not None and language not in d.supported_languages:
                continue
            out.append(d)
        return out

    def _analyzer_names(self) -> str:
        if self._registry is None:
            return "none"
        names = sorted(d.analyzer_id for d in self._registry.list_descriptors())
        return ", ".join(names) if names else "none"
