"""Token-based duplicate-code detection (Type-1 and Type-2 clones).

Sources are tokenized with a language-light scanner; identifiers normalize
to ``ID`` and literals to ``LIT`` so renamed copies still match. Detection
hashes every W-token window with a rolling polynomial hash, verifies every
hash hit token-by-token (correctness never rests on hash quality), and
merges overlapping or adjacent matches on the same diagonal into maximal
regions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .errors import InputError
from .model import Finding, Severity

DEFAULT_WINDOW = 50  # normalized tokens, roughly 8..12 lines of code
MIN_WINDOW = 10

_HASH_BASE = 1_000_003
_HASH_MOD = (1 << 61) - 1


class TokenKind(Enum):
    KEYWORD = "Keyword"
    IDENT = "Ident"
    LITERAL = "Literal"
    PUNCT = "Punct"


class Token(NamedTuple):
    kind: TokenKind
    normalized_text: str
    line: int


@dataclass(frozen=True)
class TokenStream:
    file_path: str
    tokens: tuple[Token, ...]


@dataclass(frozen=True)
class CloneRegion:
    file_path: str
    begin_line: int
    end_line: int

    def to_dict(self) -> dict:
        return {
            "file_path": self.file_path,
            "begin_line": self.begin_line,
            "end_line": self.end_line,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CloneRegion":
        return cls(d["file_path"], int(d["begin_line"]), int(d["end_line"]))

    def sort_key(self) -> tuple:
        return (self.file_path, self.begin_line, self.end_line)


@dataclass(frozen=True)
class ClonePair:
    left: CloneRegion
    right: CloneRegion
    token_length: int
    similarity: float

    def to_dict(self) -> dict:
        return {
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
            "token_length": self.token_length,
            "similarity": self.similarity,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClonePair":
        return cls(
            left=CloneRegion.from_dict(d["left"]),
            right=CloneRegion.from_dict(d["right"]),
            token_length=int(d["token_length"]),
            similarity=float(d["similarity"]),
        )


_KEYWORDS = frozenset("""
abstract and assert boolean break byte case catch char class const continue
def default del do double elif else enum except extends final finally float
for from goto if implements import in instanceof int interface is lambda long
native new none not null or package pass private protected public raise
return short static strictfp super switch synchronized this throw throws
transient true false try var void volatile while with yield
""".split())

_SCANNER = re.compile(
    r"""
      (?P<block_comment>/\*.*?(?:\*/|\Z))
    | (?P<line_comment>//[^\n]*|\#[^\n]*)
    | (?P<string>"(?:[^"\\\n]|\\.)*(?:"|(?=\n)|\Z))
    | (?P<char>'(?:[^'\\\n]|\\.)*(?:'|(?=\n)|\Z))
    | (?P<word>[A-Za-z_$][A-Za-z0-9_$]*)
    | (?P<number>[0-9][0-9A-Za-z_.]*)
    | (?P<space>\s+)
    | (?P<punct>.)
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize_normalize(source: str, file_path: str) -> TokenStream:
    """Language-light tokenizer: comments and whitespace vanish, identifiers
    become ``ID``, literals become ``LIT``. An unterminated string literal
    closes at end-of-line."""
    tokens: list[Token] = []
    line = 1
    for m in _SCANNER.finditer(source):
        kind = m.lastgroup
        text = m.group(0)
        if kind == "word":
            lowered = text.lower()
            if lowered in _KEYWORDS:
                tokens.append(Token(TokenKind.KEYWORD, text, line))
            else:
                tokens.append(Token(TokenKind.IDENT, "ID", line))
        elif kind in ("string", "char", "number"):
            tokens.append(Token(TokenKind.LITERAL, "LIT", line))
        elif kind == "punct":
            tokens.append(Token(TokenKind.PUNCT, text, line))
        # comments and whitespace drop, but their newlines still count
        line += text.count("\n")
    return TokenStream(file_path=file_path, tokens=tuple(tokens))


def _window_hashes(texts: list[str], window: int) -> list[int]:
    """Rolling polynomial hash of every ``window``-token slice."""
    n = len(texts)
    if n < window:
        return []
    codes = [hash(t) & 0xFFFFFFFF for t in texts]
    power = pow(_HASH_BASE, window - 1, _HASH_MOD)
    hashes = []
    current = 0
    for i in range(window):
        current = (current * _HASH_BASE + codes[i]) % _HASH_MOD
    hashes.append(current)
    for i in range(window, n):
        current = (current - codes[i - window] * power) % _HASH_MOD
        current = (current * _HASH_BASE + codes[i]) % _HASH_MOD
        hashes.append(current)
    return hashes


def _merge_runs(starts: list[int], window: int) -> list[tuple[int, int]]:
    """Collapse overlapping/adjacent window starts into [begin, end) regions."""
    regions: list[tuple[int, int]] = []
    run_first = run_last = starts[0]
    for s in starts[1:]:
        if s <= run_last + window:
            run_last = s
        else:
            regions.append((run_first, run_last + window))
            run_first = run_last = s
    regions.append((run_first, run_last + window))
    return regions


def detect_clones(streams: list[TokenStream], window: int = DEFAULT_WINDOW) -> list[ClonePair]:
    """Find all maximal duplicated token regions of at least ``window`` tokens."""
    if window < MIN_WINDOW:
        raise InputError(f"clone window must be at least {MIN_WINDOW}, got {window}")

    texts = [[t.normalized_text for t in s.tokens] for s in streams]
    buckets: dict[int, list[tuple[int, int]]] = {}
    for si, stream_texts in enumerate(texts):
        for i, h in enumerate(_window_hashes(stream_texts, window)):
            buckets.setdefault(h, []).append((si, i))

    # (left stream, right stream, diagonal) -> matching left-window starts
    matches: dict[tuple[int, int, int], list[int]] = {}
    for entries in buckets.values():
        if len(entries) < 2:
            continue
        for a in range(len(entries)):
            sa, ia = entries[a]
            win_a = texts[sa][ia : ia + window]
            for b in range(a + 1, len(entries)):
                sb, ib = entries[b]
                if texts[sb][ib : ib + window] != win_a:
                    continue  # hash collision, rejected by verification
                matches.setdefault((sa, sb, ib - ia), []).append(ia)

    pairs: list[ClonePair] = []
    for (sa, sb, diag), starts in matches.items():
        starts = sorted(set(starts))
        for begin, end in _merge_runs(starts, window):
            length = end - begin
            if sa == sb and length > diag:
                continue  # self-pair whose regions overlap
            left = _region(streams[sa], begin, end)
            right = _region(streams[sb], begin + diag, end + diag)
            if right.sort_key() < left.sort_key():
                left, right = right, left
            shared = sum(
                1 for x, y in zip(
                    texts[sa][begin:end], texts[sb][begin + diag : end + diag]
                ) if x == y
            )
            pairs.append(
                ClonePair(
                    left=left,
                    right=right,
                    token_length=length,
                    similarity=shared / length,
                )
            )

    pairs.sort(
        key=lambda p: (
            -p.token_length,
            p.left.file_path,
            p.left.begin_line,
            p.right.file_path,
            p.right.begin_line,
            -p.similarity,
        )
    )
    return list(dict.fromkeys(pairs))  # distinct diagonals can land on equal spans


def _region(stream: TokenStream, begin: int, end: int) -> CloneRegion:
    return CloneRegion(
        file_path=stream.file_path,
        begin_line=stream.tokens[begin].line,
        end_line=stream.tokens[end - 1].line,
    )


CLONE_RULE_ID = "clone/DuplicatedBlock"


def as_findings(pairs: list[ClonePair], analyzer_id: str = "clone-detector") -> list[Finding]:
    """Two findings per pair, one anchored on each side."""
    findings: list[Finding] = []
    for pair in pairs:
        for mine, other in ((pair.left, pair.right), (pair.right, pair.left)):
            findings.append(
                Finding(
                    file_path=mine.file_path,
                    begin_line=mine.begin_line,
                    end_line=mine.end_line,
                    begin_col=0,
                    end_col=0,
                    rule_id=CLONE_RULE_ID,
                    category="clone",
                    severity=Severity.LOW,
                    message=(
                        f"Duplicated block of {pair.token_length} tokens; "
                        f"counterpart at {other.file_path} lines "
                        f"{other.begin_line}-{other.end_line} "
                        f"(similarity {pair.similarity:.0%})"
                    ),
                    analyzer_id=analyzer_id,
                )
            )
    return findings
