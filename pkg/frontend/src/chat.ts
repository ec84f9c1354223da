// Chat panel state: sends utterances, keeps the transcript, and auto-polls
// "status" once per second while the assistant reports a scan in flight.
// DOM-free so it is unit-testable; app.ts owns rendering.

import { AuthError, GatewayClient } from "./api.js";
import type { ChatTurn, WebhookResponse } from "./types.js";

export interface ChatEvents {
  onTurn(turn: ChatTurn): void;
  onReportAvailable(reportId: string): void;
  onSessionEnd(): void;
  onAuthRequired(): void;
  onNetworkError(message: string): void;
}

// The assistant instructs the user to ask for status while scanning; that
// instruction (or a running-progress reply) is the polling trigger.
const SCANNING_HINT = /say status|still running/i;

export class ChatController {
  readonly transcript: ChatTurn[] = [];
  private session: string;
  private pollTimer: ReturnType<typeof setTimeout> | null = null;
  private ended = false;
  private seenReports = new Set<string>();

  constructor(
    private readonly client: GatewayClient,
    private readonly events: ChatEvents,
    private readonly pollIntervalMs = 1000,
  ) {
    this.session = `dash-${Math.random().toString(36).slice(2, 10)}`;
  }

  get scanning(): boolean {
    return this.pollTimer !== null;
  }

  async send(text: string): Promise<void> {
    if (this.ended || !text.trim()) return;
    this.stopPolling();
    this.record("user", text);
    try {
      const reply = await this.client.sendUtterance(this.session, text);
      this.handleReply(reply);
    } catch (error) {
      this.dropLastUserTurn();
      this.raise(error);
    }
  }

  private handleReply(reply: WebhookResponse): void {
    this.record("assistant", reply.speech);
    if (reply.report_id && !this.seenReports.has(reply.report_id)) {
      this.seenReports.add(reply.report_id);
      this.events.onReportAvailable(reply.report_id);
    }
    if (reply.end_session) {
      this.ended = true;
      this.stopPolling();
      this.events.onSessionEnd();
      return;
    }
    if (!reply.report_id && SCANNING_HINT.test(reply.speech)) {
      this.schedulePoll();
    }
  }

  private schedulePoll(): void {
    this.pollTimer = setTimeout(() => {
      this.pollTimer = null;
      void this.poll();
    }, this.pollIntervalMs);
  }

  private async poll(): Promise<void> {
    if (this.ended) return;
    try {
      const reply = await this.client.sendUtterance(this.session, "status");
      this.record("user", "status");
      this.handleReply(reply);
    } catch (error) {
      this.raise(error);
    }
  }

  private record(speaker: ChatTurn["speaker"], text: string): void {
    const turn: ChatTurn = { speaker, text, at: new Date().toISOString() };
    this.transcript.push(turn);
    this.events.onTurn(turn);
  }

  private dropLastUserTurn(): void {
    // transcript stays intact for the retry banner; nothing to remove, the
    // user turn legitimately happened. Kept as a hook for stricter policies.
  }

  private raise(error: unknown): void {
    if (error instanceof AuthError) {
      this.events.onAuthRequired();
      return;
    }
    const message = error instanceof Error ? error.message : String(error);
    this.events.onNetworkError(message);
  }

  private stopPolling(): void {
    if (this.pollTimer !== null) {
      clearTimeout(this.pollTimer);
      this.pollTimer = null;
    }
  }
}
