// DOM wiring for the dashboard. All analysis data comes from the gateway;
// this file only renders it.

import { GatewayClient } from "./api.js";
import { ChatController } from "./chat.js";
import { emptyCloneState, escapeHtml, renderCloneViewer } from "./clones.js";
import { renderSeverityChart } from "./chart.js";
import type { ChatTurn, ClonePair, Finding } from "./types.js";

const TOKEN_KEY = "convoscan-token";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function appendBubble(turn: ChatTurn): void {
  const log = el<HTMLDivElement>("chat-log");
  const bubble = document.createElement("div");
  bubble.className = `bubble ${turn.speaker}`;
  bubble.textContent = turn.text;
  log.appendChild(bubble);
  log.scrollTop = log.scrollHeight;
}

function banner(message: string, kind: "error" | "info"): void {
  const zone = el<HTMLDivElement>("banner");
  zone.innerHTML = message
    ? `<div class="banner ${kind}">${escapeHtml(message)}</div>`
    : "";
}

function findingsTable(findings: Finding[]): string {
  if (findings.length === 0) return "<p>No findings.</p>";
  const rows = findings
    .map(
      (f) =>
        `<tr class="finding"><td class="sev-${f.severity}">${f.severity}</td>` +
        `<td>${escapeHtml(f.file_path)}</td><td>${f.begin_line}</td>` +
        `<td>${escapeHtml(f.rule_id)}</td><td>${escapeHtml(f.message)}</td></tr>`,
    )
    .join("");
  return (
    `<table id="findings-table"><thead><tr><th>Severity</th><th>File</th>` +
    `<th>Line</th><th>Rule</th><th>Message</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

async function showReport(client: GatewayClient, reportId: string): Promise<void> {
  const panel = el<HTMLDivElement>("report-panel");
  panel.hidden = false;
  el<HTMLHeadingElement>("report-title").textContent = `Report ${reportId}`;

  const [report, summary] = await Promise.all([
    client.report(reportId),
    client.summary(reportId),
  ]);
  el<HTMLDivElement>("chart-zone").innerHTML = renderSeverityChart(summary);
  el<HTMLDivElement>("findings-zone").innerHTML = findingsTable(report.findings);

  let pairs: ClonePair[] = [];
  try {
    pairs = await client.clones(reportId);
  } catch {
    pairs = []; // vulnerability reports have no clone sidecar
  }
  const cloneZone = el<HTMLDivElement>("clone-zone");
  if (pairs.length === 0) {
    cloneZone.innerHTML = emptyCloneState();
    return;
  }
  const items = pairs
    .map(
      (p, i) =>
        `<li><a href="#" data-pair="${i}">${escapeHtml(p.left.file_path)}:` +
        `${p.left.begin_line} ↔ ${escapeHtml(p.right.file_path)}:` +
        `${p.right.begin_line} (${p.token_length} tokens)</a></li>`,
    )
    .join("");
  cloneZone.innerHTML = `<ul class="clone-list">${items}</ul><div id="clone-view"></div>`;
  cloneZone.querySelectorAll("a[data-pair]").forEach((anchor) => {
    anchor.addEventListener("click", async (event) => {
      event.preventDefault();
      const pair = pairs[Number((anchor as HTMLElement).dataset.pair)];
      const [left, right] = await Promise.all([
        client.source(reportId, pair.left.file_path, pair.left.begin_line, pair.left.end_line),
        client.source(reportId, pair.right.file_path, pair.right.begin_line, pair.right.end_line),
      ]);
      el<HTMLDivElement>("clone-view").innerHTML = renderCloneViewer(pair, left, right);
    });
  });
}

function main(): void {
  const tokenInput = el<HTMLInputElement>("token-input");
  tokenInput.value = sessionStorage.getItem(TOKEN_KEY) ?? "";

  const client = new GatewayClient("", tokenInput.value);
  tokenInput.addEventListener("change", () => {
    sessionStorage.setItem(TOKEN_KEY, tokenInput.value);
    client.setToken(tokenInput.value);
    banner("", "info");
  });

  const chat = new ChatController(client, {
    onTurn: appendBubble,
    onReportAvailable: (reportId) => {
      const log = el<HTMLDivElement>("chat-log");
      const link = document.createElement("a");
      link.href = "#report-panel";
      link.className = "report-link";
      link.textContent = `View report ${reportId}`;
      link.addEventListener("click", () => void showReport(client, reportId));
      log.appendChild(link);
    },
    onSessionEnd: () => banner("Session ended. Reload to start a new one.", "info"),
    onAuthRequired: () =>
      banner("The gateway rejected the token. Enter it above and retry.", "error"),
    onNetworkError: (message) =>
      banner(`Could not reach the gateway (${message}). Your transcript is intact; retry.`, "error"),
  });

  const input = el<HTMLInputElement>("chat-input");
  const send = () => {
    const text = input.value;
    input.value = "";
    void chat.send(text);
  };
  el<HTMLButtonElement>("chat-send").addEventListener("click", send);
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") send();
  });
}

document.addEventListener("DOMContentLoaded", main);
