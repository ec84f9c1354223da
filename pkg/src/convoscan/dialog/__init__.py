from .classifier import Intent, IntentClassifier, IntentMatch, load_trigger_phrases
from .engine import (
    ConversationSession,
    DialogEngine,
    Reply,
    SessionState,
    SystemEvent,
    new_session,
)

__all__ = [
    "Intent",
    "IntentClassifier",
    "IntentMatch",
    "load_trigger_phrases",
    "ConversationSession",
    "DialogEngine",
    "Reply",
    "SessionState",
    "SystemEvent",
    "new_session",
]
