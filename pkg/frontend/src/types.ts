/** Payload types for the audit service API (see docs/INTERFACES.md). */

export type ItemKind = "FN" | "FP" | "class-swap";

export type ItemStatus =
  | "pending"
  | "annotator-error-fixed"
  | "model-error-confirmed";

export interface HealthInfo {
  ok: boolean;
  round: number;
  round_status: "idle" | "running" | "review" | "failed";
  dataset_version: number;
  pending_items: number;
  converged: boolean;
}

export interface ReviewItem {
  item_id: string;
  doc_id: string;
  token_start: number;
  token_end: number;
  /** Character offsets into the document, server-computed. */
  start: number;
  end: number;
  kind: ItemKind;
  gold_label: string;
  model_label: string;
  fold_index: number;
  round_number: number;
  status: ItemStatus;
  claimed_by: string | null;
}

export interface SpanInfo {
  start: number;
  end: number;
  concept_id: string;
  origin: "gold" | "model";
}

export interface DocumentWindow {
  start: number;
  end: number;
  text: string;
}

export interface ItemDetail extends ReviewItem {
  window: DocumentWindow;
  spans: SpanInfo[];
  queue: { pending: number; total: number };
}

export interface SpanEdit {
  doc_id: string;
  start: number;
  end: number;
  /** null deletes the overlapping gold spans. */
  concept_id: string | null;
}

export type Verdict = "fix-annotation" | "confirm-model-error";

export interface DecisionReply {
  item_id: string;
  verdict: Verdict;
  dataset_version: number;
}

export interface VersionInfo {
  version_id: number;
  parent_version: number | null;
  documents: number;
  spans: number;
  changelog_entries: number;
}

export interface RoundSummary {
  round: number;
  status: string;
  error: string | null;
  dataset_version: number;
  item_count: number;
  by_kind: Record<string, number>;
  by_status: Record<string, number>;
}

export interface SweepPoint {
  lambda: number;
  precision: number | null;
  recall: number | null;
  merged_precision: number | null;
  merged_recall: number | null;
}
