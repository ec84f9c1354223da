// Side-by-side clone view: a port of the server's language-light token
// normalization (identifiers -> ID, literals -> LIT) used to decide which
// tokens of the two regions correspond. Alignment is positional: the
// detector only reports regions whose normalized streams match.

import type { ClonePair, SourceSlice } from "./types.js";

const KEYWORDS = new Set(
  (
    "abstract and assert boolean break byte case catch char class const continue " +
    "def default del do double elif else enum except extends final finally float " +
    "for from goto if implements import in instanceof int interface is lambda long " +
    "native new none not null or package pass private protected public raise " +
    "return short static strictfp super switch synchronized this throw throws " +
    "transient true false try var void volatile while with yield"
  ).split(" "),
);

export interface ViewerToken {
  line: number; // 0-based within the slice
  start: number; // column offsets within the line
  end: number;
  normalized: string;
}

const WORD_RE = /[A-Za-z_$][A-Za-z0-9_$]*/y;
const NUMBER_RE = /[0-9][0-9A-Za-z_.]*/y;

export function tokenizeForViewer(lines: string[]): ViewerToken[] {
  const tokens: ViewerToken[] = [];
  let inBlockComment = false;
  for (let lineNo = 0; lineNo < lines.length; lineNo++) {
    const line = lines[lineNo];
    let i = 0;
    while (i < line.length) {
      if (inBlockComment) {
        const close = line.indexOf("*/", i);
        if (close === -1) {
          i = line.length;
          continue;
        }
        inBlockComment = false;
        i = close + 2;
        continue;
      }
      const ch = line[i];
      if (ch === " " || ch === "\t" || ch === "\r") {
        i++;
        continue;
      }
      if (ch === "/" && line[i + 1] === "/") break; // line comment
      if (ch === "#") break;
      if (ch === "/" && line[i + 1] === "*") {
        inBlockComment = true;
        i += 2;
        continue;
      }
      if (ch === '"' || ch === "'") {
        const start = i;
        i++;
        while (i < line.length && line[i] !== ch) {
          i += line[i] === "\\" ? 2 : 1;
        }
        i = Math.min(i + 1, line.length);
        tokens.push({ line: lineNo, start, end: i, normalized: "LIT" });
        continue;
      }
      WORD_RE.lastIndex = i;
      const word = WORD_RE.exec(line);
      if (word) {
        const text = word[0];
        tokens.push({
          line: lineNo,
          start: i,
          end: i + text.length,
          normalized: KEYWORDS.has(text.toLowerCase()) ? text : "ID",
        });
        i += text.length;
        continue;
      }
      NUMBER_RE.lastIndex = i;
      const num = NUMBER_RE.exec(line);
      if (num) {
        tokens.push({ line: lineNo, start: i, end: i + num[0].length, normalized: "LIT" });
        i += num[0].length;
        continue;
      }
      tokens.push({ line: lineNo, start: i, end: i + 1, normalized: ch });
      i++;
    }
  }
  return tokens;
}

export interface AlignedSide {
  tokens: ViewerToken[];
  matched: boolean[];
}

export interface Alignment {
  left: AlignedSide;
  right: AlignedSide;
  matchedCount: number;
}

// The fetched slices are whole lines, but a clone region can start and end
// mid-line with different intra-line offsets per side. When the region's
// token length is known, locate the equal window in both streams; otherwise
// fall back to positional comparison.
function findRegionOffsets(
  left: ViewerToken[], right: ViewerToken[], length: number,
): [number, number] | null {
  for (let oa = 0; oa + length <= left.length; oa++) {
    for (let ob = 0; ob + length <= right.length; ob++) {
      let equal = true;
      for (let i = 0; i < length; i++) {
        if (left[oa + i].normalized !== right[ob + i].normalized) {
          equal = false;
          break;
        }
      }
      if (equal) return [oa, ob];
    }
  }
  return null;
}

export function alignClone(
  leftLines: string[], rightLines: string[], tokenLength?: number,
): Alignment {
  const left = tokenizeForViewer(leftLines);
  const right = tokenizeForViewer(rightLines);
  const leftMatched = new Array<boolean>(left.length).fill(false);
  const rightMatched = new Array<boolean>(right.length).fill(false);
  let matchedCount = 0;

  const length = tokenLength ?? 0;
  if (length > 0 && length <= left.length && length <= right.length) {
    const offsets = findRegionOffsets(left, right, length);
    if (offsets) {
      const [oa, ob] = offsets;
      for (let i = 0; i < length; i++) {
        leftMatched[oa + i] = rightMatched[ob + i] = true;
      }
      return {
        left: { tokens: left, matched: leftMatched },
        right: { tokens: right, matched: rightMatched },
        matchedCount: length,
      };
    }
  }

  const n = Math.min(left.length, right.length);
  for (let i = 0; i < n; i++) {
    if (left[i].normalized === right[i].normalized) {
      leftMatched[i] = rightMatched[i] = true;
      matchedCount++;
    }
  }
  return {
    left: { tokens: left, matched: leftMatched },
    right: { tokens: right, matched: rightMatched },
    matchedCount,
  };
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function renderLine(line: string, spans: Array<[number, number]>): string {
  if (spans.length === 0) return escapeHtml(line) || "&nbsp;";
  let html = "";
  let cursor = 0;
  for (const [start, end] of spans) {
    html += escapeHtml(line.slice(cursor, start));
    html += `<mark>${escapeHtml(line.slice(start, end))}</mark>`;
    cursor = end;
  }
  html += escapeHtml(line.slice(cursor));
  return html;
}

function renderPane(slice: SourceSlice, side: AlignedSide, cssClass: string): string {
  const spansByLine = new Map<number, Array<[number, number]>>();
  side.tokens.forEach((token, i) => {
    if (!side.matched[i]) return;
    const spans = spansByLine.get(token.line) ?? [];
    spans.push([token.start, token.end]);
    spansByLine.set(token.line, spans);
  });
  const rows = slice.lines.map((line, i) => {
    const number = slice.begin_line + i;
    return (
      `<tr><td class="lineno">${number}</td>` +
      `<td class="code">${renderLine(line, spansByLine.get(i) ?? [])}</td></tr>`
    );
  });
  return (
    `<div class="clone-pane ${cssClass}">` +
    `<h4>${escapeHtml(slice.file_path)} (${slice.begin_line}-${slice.end_line})</h4>` +
    `<table>${rows.join("")}</table></div>`
  );
}

export function renderCloneViewer(
  pair: ClonePair,
  leftSlice: SourceSlice,
  rightSlice: SourceSlice,
): string {
  const alignment = alignClone(leftSlice.lines, rightSlice.lines, pair.token_length);
  const similarity = Math.round(pair.similarity * 100);
  return (
    `<div class="clone-viewer" data-similarity="${pair.similarity}">` +
    `<p class="clone-meta">${pair.token_length} duplicated tokens, ` +
    `${similarity}% similar</p>` +
    `<div class="clone-panes">` +
    renderPane(leftSlice, alignment.left, "left") +
    renderPane(rightSlice, alignment.right, "right") +
    `</div></div>`
  );
}

export function emptyCloneState(): string {
  return '<p class="clone-empty" id="clone-empty">No clone pairs in this report.</p>';
}
