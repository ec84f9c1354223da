from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from convoscan.clones import (
    ClonePair,
    TokenKind,
    TokenStream,
    as_findings,
    detect_clones,
    tokenize_normalize,
)
from convoscan.errors import InputError
from convoscan.hub import AnalyzerRegistry, ReportStore, ScanRequest, run_scan
from convoscan.hub.clone_adapter import CloneDetectorAdapter
from convoscan.model import ScanTarget, Severity, TargetKind


# ---------------------------------------------------------------------------
# independent oracle: exhaustive all-pairs window comparison, no hashing

def brute_force_clones(streams: list[TokenStream], window: int) -> set[tuple]:
    texts = [[t.normalized_text for t in s.tokens] for s in streams]
    groups: dict[tuple[int, int, int], list[int]] = {}
    for sa in range(len(streams)):
        for sb in range(sa, len(streams)):
            for ia in range(len(texts[sa]) - window + 1):
                lo = ia + 1 if sa == sb else 0
                for ib in range(lo, len(texts[sb]) - window + 1):
                    if (
                        texts[sa][ia] == texts[sb][ib]
                        and texts[sa][ia : ia + window] == texts[sb][ib : ib + window]
                    ):
                        groups.setdefault((sa, sb, ib - ia), []).append(ia)

    pairs: set[tuple] = set()
    for (sa, sb, diag), starts in groups.items():
        starts = sorted(set(starts))
        runs: list[tuple[int, int]] = []
        first = last = starts[0]
        for s in starts[1:]:
            if s <= last + window:
                last = s
            else:
                runs.append((first, last))
                first = last = s
        runs.append((first, last))
        for begin, final in runs:
            end = final + window
            length = end - begin
            if sa == sb and length > diag:
                continue
            left = _span(streams[sa], begin, end)
            right = _span(streams[sb], begin + diag, end + diag)
            if right < left:
                left, right = right, left
            shared = sum(
                1 for x, y in zip(
                    texts[sa][begin:end], texts[sb][begin + diag : end + diag]
                ) if x == y
            )
            pairs.add((left, right, length, round(shared / length, 9)))
    return pairs


def _span(stream: TokenStream, begin: int, end: int) -> tuple:
    return (stream.file_path, stream.tokens[begin].line, stream.tokens[end - 1].line)


def as_tuples(pairs: list[ClonePair]) -> set[tuple]:
    return {
        (
            (p.left.file_path, p.left.begin_line, p.left.end_line),
            (p.right.file_path, p.right.begin_line, p.right.end_line),
            p.token_length,
            round(p.similarity, 9),
        )
        for p in pairs
    }


# ---------------------------------------------------------------------------
# tokenizer

class TestTokenizer:
    def test_declaration(self):
        stream = tokenize_normalize("int x = 42;", "A.java")
        assert [(t.kind, t.normalized_text) for t in stream.tokens] == [
            (TokenKind.KEYWORD, "int"),
            (TokenKind.IDENT, "ID"),
            (TokenKind.PUNCT, "="),
            (TokenKind.LITERAL, "LIT"),
            (TokenKind.PUNCT, ";"),
        ]

    def test_comment_only(self):
        assert tokenize_normalize("// comment", "A.java").tokens == ()

    def test_call_with_string_concat(self):
        stream = tokenize_normalize('foo("a"+b)', "A.java")
        assert [(t.kind, t.normalized_text) for t in stream.tokens] == [
            (TokenKind.IDENT, "ID"),
            (TokenKind.PUNCT, "("),
            (TokenKind.LITERAL, "LIT"),
            (TokenKind.PUNCT, "+"),
            (TokenKind.IDENT, "ID"),
            (TokenKind.PUNCT, ")"),
        ]

    def test_block_comment_spanning_lines(self):
        stream = tokenize_normalize("/* one\ntwo */ int y;", "A.java")
        assert [t.normalized_text for t in stream.tokens] == ["int", "ID", ";"]
        assert stream.tokens[0].line == 2

    def test_unterminated_string_closes_at_eol(self):
        stream = tokenize_normalize('s = "abc\nnext', "A.java")
        kinds = [t.kind for t in stream.tokens]
        assert kinds == [
            TokenKind.IDENT, TokenKind.PUNCT, TokenKind.LITERAL, TokenKind.IDENT,
        ]
        assert stream.tokens[-1].line == 2

    def test_line_numbers(self):
        stream = tokenize_normalize("a\nb\nc", "A.java")
        assert [t.line for t in stream.tokens] == [1, 2, 3]


# ---------------------------------------------------------------------------
# detection

def stream_of(words: str, path: str) -> TokenStream:
    return tokenize_normalize(words, path)


IDENTICAL_FUNCTION = """\
public int accumulate(int[] values) {
    int total = 0;
    for (int i = 0; i < values.length; i++) {
        int current = values[i];
        if (current > 0) {
            total = total + current;
        } else {
            total = total - current;
        }
    }
    return total;
}
"""

RENAMED_FUNCTION = """\
public int merge(int[] samples) {
    int sum = 0;
    for (int k = 0; k < samples.length; k++) {
        int item = samples[k];
        if (item > 0) {
            sum = sum + item;
        } else {
            sum = sum - item;
        }
    }
    return sum;
}
"""


class TestDetect:
    def test_identical_function_across_files(self):
        streams = [
            stream_of(IDENTICAL_FUNCTION, "A.java"),
            stream_of(IDENTICAL_FUNCTION, "B.java"),
        ]
        assert len(streams[0].tokens) >= 60
        pairs = detect_clones(streams, 50)
        assert len(pairs) == 1
        assert pairs[0].similarity == 1.0
        assert pairs[0].token_length >= 60
        assert pairs[0].left.file_path == "A.java"
        assert pairs[0].right.file_path == "B.java"

    def test_renamed_identifiers_still_match(self):
        pairs = detect_clones(
            [stream_of(IDENTICAL_FUNCTION, "A.java"), stream_of(RENAMED_FUNCTION, "B.java")],
            50,
        )
        assert len(pairs) == 1
        assert pairs[0].similarity == 1.0

    def test_unrelated_files_share_nothing(self):
        pairs = detect_clones(
            [
                stream_of("int a = 1; int b = 2; print(a + b);", "A.java"),
                stream_of('while (x < 9) { x = read("file"); }', "B.java"),
            ],
            10,
        )
        assert pairs == []

    def test_self_pair_within_one_file(self):
        source = IDENTICAL_FUNCTION + "\nint gap = 1;\n" + RENAMED_FUNCTION
        pairs = detect_clones([stream_of(source, "A.java")], 50)
        assert len(pairs) == 1
        left, right = pairs[0].left, pairs[0].right
        assert left.file_path == right.file_path == "A.java"
        assert left.end_line < right.begin_line  # disjoint regions

    def test_periodic_self_pairs_never_overlap(self):
        # 160 tokens with period 4: small diagonals would overlap themselves
        # and must be dropped; large diagonals (first half vs second half)
        # are genuine disjoint self-clones and stay.
        source = "x = 1 ;\n" * 40
        pairs = detect_clones([stream_of(source, "A.java")], 10)
        assert pairs, "disjoint self-clones are allowed"
        for pair in pairs:
            assert pair.token_length <= 80  # the overlapping 156-token match is gone

    def test_window_floor_enforced(self):
        with pytest.raises(InputError):
            detect_clones([stream_of("int a;", "A.java")], 9)

    def test_canonical_orientation(self):
        streams = [
            stream_of(IDENTICAL_FUNCTION, "zzz/Last.java"),
            stream_of(IDENTICAL_FUNCTION, "aaa/First.java"),
        ]
        pairs = detect_clones(streams, 50)
        assert pairs[0].left.file_path == "aaa/First.java"

    def test_symmetry_under_stream_order(self, clone_dir):
        streams = [
            tokenize_normalize(p.read_text(), p.name)
            for p in sorted((clone_dir / "src").glob("*.java"))
        ]
        forward = as_tuples(detect_clones(streams, 10))
        backward = as_tuples(detect_clones(list(reversed(streams)), 10))
        assert forward == backward


class TestOracleEquivalence:
    @pytest.mark.parametrize("window", [10, 50])
    def test_fixture_corpus(self, clone_dir, window):
        streams = [
            tokenize_normalize(p.read_text(), p.name)
            for p in sorted((clone_dir / "src").glob("*.java"))
        ]
        assert sum(len(s.tokens) for s in streams) <= 2000
        assert as_tuples(detect_clones(streams, window)) == brute_force_clones(
            streams, window
        )

    def test_fixture_has_the_planted_clone_at_default_window(self, clone_dir):
        streams = [
            tokenize_normalize(p.read_text(), p.name)
            for p in sorted((clone_dir / "src").glob("*.java"))
        ]
        pairs = detect_clones(streams, 50)
        assert len(pairs) == 1
        names = {pairs[0].left.file_path, pairs[0].right.file_path}
        assert names == {"ReportTotals.java", "MetricsMerge.java"}
        assert pairs[0].similarity == 1.0

    def test_synthetic_corpus_with_planted_segment(self):
        rng = random.Random(7)
        vocab = ["alpha", "beta", "gamma", "if", "else", "return",
                 "0", "1", "(", ")", "{", "}", ";", "+", "="]
        files = [
            " ".join(rng.choice(vocab) for _ in range(260)) for _ in range(3)
        ]
        planted = " ".join(rng.choice(vocab) for _ in range(30))
        files[0] += " " + planted
        files[2] = planted + " " + files[2]
        streams = [stream_of(text, f"F{i}.java") for i, text in enumerate(files)]
        for window in (10, 25):
            assert as_tuples(detect_clones(streams, window)) == brute_force_clones(
                streams, window
            ), f"W={window}"
        assert detect_clones(streams, 25), "planted clone must be found"


token_texts = st.lists(
    st.sampled_from(["a", "b", "if", "(", ")", ";", "0"]), min_size=0, max_size=90
)


@settings(max_examples=40, deadline=None)
@given(texts=st.lists(token_texts, min_size=1, max_size=3))
def test_oracle_equivalence_random(texts):
    streams = [stream_of(" ".join(words), f"S{i}.java") for i, words in enumerate(texts)]
    assert as_tuples(detect_clones(streams, 10)) == brute_force_clones(streams, 10)


@settings(max_examples=30, deadline=None)
@given(texts=st.lists(token_texts, min_size=1, max_size=3))
def test_monotonicity_in_window(texts):
    streams = [stream_of(" ".join(words), f"S{i}.java") for i, words in enumerate(texts)]
    counts = [len(detect_clones(streams, w)) for w in (10, 14, 20)]
    assert counts == sorted(counts, reverse=True)


class TestAsFindings:
    def _pair(self) -> ClonePair:
        pairs = detect_clones(
            [stream_of(IDENTICAL_FUNCTION, "A.java"), stream_of(IDENTICAL_FUNCTION, "B.java")],
            50,
        )
        return pairs[0]

    def test_two_findings_per_pair(self):
        findings = as_findings([self._pair()])
        assert len(findings) == 2
        assert {f.file_path for f in findings} == {"A.java", "B.java"}
        for f in findings:
            assert f.category == "clone"
            assert f.severity is Severity.LOW
            assert f.rule_id == "clone/DuplicatedBlock"
        assert "B.java" in findings[0].message
        assert "A.java" in findings[1].message

    def test_empty(self):
        assert as_findings([]) == []

    def test_same_file_pair(self):
        source = IDENTICAL_FUNCTION + "\nint gap = 1;\n" + RENAMED_FUNCTION
        pairs = detect_clones([stream_of(source, "A.java")], 50)
        findings = as_findings(pairs)
        assert len(findings) == 2
        assert findings[0].file_path == findings[1].file_path == "A.java"
        assert (findings[0].begin_line, findings[0].end_line) != (
            findings[1].begin_line, findings[1].end_line,
        )


class TestAdapter:
    def test_scan_persists_clone_sidecar(self, clone_dir, tmp_path):
        store = ReportStore(tmp_path)
        registry = AnalyzerRegistry()
        registry.register(CloneDetectorAdapter(window=50, store=store))
        report = run_scan(
            ScanRequest(
                target=ScanTarget(
                    kind=TargetKind.IDE_PROJECT,
                    path=str(clone_dir),
                    display_name="clones",
                ),
                analyzer_id="clone-detector",
            ),
            registry=registry,
            store=store,
        )
        assert len(report.findings) == 2  # one planted pair, two sides
        sidecar = store.load_clones(report.report_id)
        assert len(sidecar) == 1
        pair = ClonePair.from_dict(sidecar[0])
        assert pair.similarity == 1.0
        assert pair.token_length >= 50
