"""Utterance classification into the six dialog intents.

Deterministic by design: an utterance is scored against every intent's
trigger-phrase set by maximum token-overlap (Jaccard), and the best intent
wins when its score clears the 0.5 threshold. Anything below the threshold
is a Fallback. Slot keywords (scan target, analyzer, follow-up action) are
extracted independently of the matched intent, so "IDE" answers the target
prompt even though it matches no trigger phrase.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from ..errors import InputError

MATCH_THRESHOLD = 0.5


class Intent(Enum):
    WELCOME = "Welcome"
    VULNERABILITY_SCANNING = "VulnerabilityScanning"
    CLONE_DETECTION = "CloneDetection"
    CANCEL = "Cancel"
    BYE = "Bye"
    FALLBACK = "Fallback"


# Tie-break order when two intents score equally.
_PRIORITY: tuple[Intent, ...] = (
    Intent.CANCEL,
    Intent.BYE,
    Intent.VULNERABILITY_SCANNING,
    Intent.CLONE_DETECTION,
    Intent.WELCOME,
)

_TARGET_KEYWORDS = {
    "ide": "ide",
    "intellij": "ide",
    "git": "git",
    "github": "git",
    "repository": "git",
}

_ACTION_KEYWORDS = {
    "email": "email",
    "read": "read",
    "fix": "autofix",
    "autofix": "autofix",
}

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class IntentMatch:
    """Classification result plus any slots recognized in the utterance."""

    intent: Intent
    score: float
    entities: dict[str, str] = field(default_factory=dict)
    utterance: str = ""


def load_trigger_phrases(path: str | Path | None = None) -> dict[Intent, list[str]]:
    """Load the trigger-phrase file (the shipped canonical one by default)."""
    if path is None:
        raw = (
            resources.files("convoscan").joinpath("data/trigger_phrases.json")
        ).read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    data = json.loads(raw)
    phrases: dict[Intent, list[str]] = {}
    for name, entries in data.items():
        phrases[Intent(name)] = [str(p) for p in entries]
    return phrases


class IntentClassifier:
    def __init__(
        self,
        trigger_phrases: dict[Intent, list[str]] | None = None,
        analyzer_ids: list[str] | None = None,
    ):
        self._phrases = trigger_phrases or load_trigger_phrases()
        # Pre-tokenize once; analyzer ids become token sequences so that
        # hyphenated ids ("clone-detector") still match spoken words.
        self._phrase_tokens: dict[Intent, list[frozenset[str]]] = {
            intent: [frozenset(tokenize(p)) for p in phrases]
            for intent, phrases in self._phrases.items()
        }
        self._analyzer_tokens: list[tuple[str, list[str]]] = [
            (aid, tokenize(aid)) for aid in (analyzer_ids or [])
        ]

    def classify(self, utterance: str) -> IntentMatch:
        if not utterance or not utterance.strip():
            raise InputError("utterance is empty")
        tokens = tokenize(utterance)
        token_set = frozenset(tokens)

        best_intent = Intent.FALLBACK
        best_score = 0.0
        for intent in _PRIORITY:
            score = self._intent_score(intent, token_set)
            if score > best_score:
                best_intent, best_score = intent, score

        entities = self._extract_entities(tokens)
        if best_score >= MATCH_THRESHOLD:
            return IntentMatch(best_intent, best_score, entities, utterance)
        return IntentMatch(Intent.FALLBACK, best_score, entities, utterance)

    def _intent_score(self, intent: Intent, tokens: frozenset[str]) -> float:
        best = 0.0
        for phrase in self._phrase_tokens.get(intent, ()):
            if not phrase and not tokens:
                continue
            union = len(tokens | phrase)
            if union == 0:
                continue
            best = max(best, len(tokens & phrase) / union)
        return best

    def _extract_entities(self, tokens: list[str]) -> dict[str, str]:
        entities: dict[str, str] = {}
        for tok in tokens:
            if "target" not in entities and tok in _TARGET_KEYWORDS:
                entities["target"] = _TARGET_KEYWORDS[tok]
            if "action" not in entities and tok in _ACTION_KEYWORDS:
                entities["action"] = _ACTION_KEYWORDS[tok]
        for analyzer_id, id_tokens in self._analyzer_tokens:
            if "analyzer" in entities:
                break
            if id_tokens and _contains_run(tokens, id_tokens):
                entities["analyzer"] = analyzer_id
        return entities


def _contains_run(haystack: list[str], needle: list[str]) -> bool:
    n = len(needle)
    return any(haystack[i : i + n] == needle for i in range(len(haystack) - n + 1))
