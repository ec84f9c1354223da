// JSON schemas of the gateway API (snake_case, exactly as served).

export type SeverityLabel = "Critical" | "High" | "Medium" | "Low" | "Info";

export const SEVERITY_ORDER: SeverityLabel[] = [
  "Critical",
  "High",
  "Medium",
  "Low",
  "Info",
];

export interface Finding {
  file_path: string;
  begin_line: number;
  end_line: number;
  begin_col: number;
  end_col: number;
  rule_id: string;
  category: string;
  severity: SeverityLabel;
  message: string;
  analyzer_id: string;
  info_url?: string;
}

export interface ScanTarget {
  kind: "IdeProject" | "GitRepo";
  path: string;
  display_name: string;
  origin?: string;
}

export interface NormalizedReport {
  report_id: string;
  target: ScanTarget;
  analyzer_id: string;
  ruleset_labels: string[];
  findings: Finding[];
  started_at: string;
  finished_at: string;
  status: "Completed" | "Failed" | "Cancelled";
}

export interface ReportSummary {
  report_id: string;
  total: number;
  by_severity: Partial<Record<SeverityLabel, number>>;
  by_category: Record<string, number>;
  top_items: Finding[];
  files_affected: number;
}

export interface CloneRegion {
  file_path: string;
  begin_line: number;
  end_line: number;
}

export interface ClonePair {
  left: CloneRegion;
  right: CloneRegion;
  token_length: number;
  similarity: number;
}

export interface WebhookResponse {
  session: string;
  speech: string;
  expects_input: boolean;
  end_session: boolean;
  report_id?: string;
}

export interface SourceSlice {
  file_path: string;
  begin_line: number;
  end_line: number;
  lines: string[];
}

export interface ChatTurn {
  speaker: "user" | "assistant";
  text: string;
  at: string;
}
