// Severity breakdown chart: pure segment math plus an SVG-string renderer,
// so tests never need a DOM.

import { SEVERITY_ORDER, type ReportSummary, type SeverityLabel } from "./types.js";

export interface ChartSegment {
  severity: SeverityLabel;
  count: number;
  fraction: number;
}

export const SEVERITY_COLORS: Record<SeverityLabel, string> = {
  Critical: "#7a0010",
  High: "#c0392b",
  Medium: "#b9770e",
  Low: "#1f618d",
  Info: "#5d6d7e",
};

export function severitySegments(
  bySeverity: Partial<Record<SeverityLabel, number>>,
): ChartSegment[] {
  const total = Object.values(bySeverity).reduce((a, b) => a + (b ?? 0), 0);
  const segments: ChartSegment[] = [];
  for (const severity of SEVERITY_ORDER) {
    const count = bySeverity[severity] ?? 0;
    if (count > 0) {
      segments.push({ severity, count, fraction: count / total });
    }
  }
  return segments;
}

function donutSlice(
  cx: number, cy: number, r: number, from: number, to: number,
): string {
  // angles as fractions of a full turn, starting at 12 o'clock
  const angle = (f: number) => 2 * Math.PI * f - Math.PI / 2;
  const x1 = cx + r * Math.cos(angle(from));
  const y1 = cy + r * Math.sin(angle(from));
  const x2 = cx + r * Math.cos(angle(to));
  const y2 = cy + r * Math.sin(angle(to));
  const large = to - from > 0.5 ? 1 : 0;
  return `M ${cx} ${cy} L ${x1.toFixed(2)} ${y1.toFixed(2)} ` +
    `A ${r} ${r} 0 ${large} 1 ${x2.toFixed(2)} ${y2.toFixed(2)} Z`;
}

export function renderSeverityChart(summary: ReportSummary): string {
  const segments = severitySegments(summary.by_severity);
  if (segments.length === 0) {
    return '<p class="chart-empty" id="chart-empty">No issues found.</p>';
  }
  const size = 180;
  const parts: string[] = [
    `<svg id="severity-chart" viewBox="0 0 ${size} ${size}" role="img" ` +
      `aria-label="findings by severity">`,
  ];
  let cursor = 0;
  for (const segment of segments) {
    const end = cursor + segment.fraction;
    const path = segments.length === 1
      ? `M 90 90 m -80 0 a 80 80 0 1 0 160 0 a 80 80 0 1 0 -160 0`
      : donutSlice(size / 2, size / 2, 80, cursor, end);
    parts.push(
      `<path d="${path}" fill="${SEVERITY_COLORS[segment.severity]}" ` +
        `data-severity="${segment.severity}" data-count="${segment.count}">` +
        `<title>${segment.severity}: ${segment.count}</title></path>`,
    );
    cursor = end;
  }
  parts.push(`<circle cx="90" cy="90" r="46" fill="#fff"></circle>`);
  parts.push(
    `<text x="90" y="96" text-anchor="middle" id="chart-total" ` +
      `font-size="28" font-family="Georgia">${summary.total}</text>`,
  );
  parts.push("</svg>");
  const legend = segments
    .map(
      (s) =>
        `<li><span class="swatch" style="background:${SEVERITY_COLORS[s.severity]}"></span>` +
        `${s.severity}: <b data-legend="${s.severity}">${s.count}</b></li>`,
    )
    .join("");
  return parts.join("") + `<ul class="chart-legend">${legend}</ul>`;
}
