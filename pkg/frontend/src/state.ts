/** Triage state machine: one service call per state change, server as the
 * single source of truth. A refresh rebuilds everything from the API alone.
 *
 * Stale-item races (another tab claimed or decided first) surface as a
 * non-blocking banner plus a queue refresh, never as a dead end.
 */

import { ApiError, ReviewApi } from "./api.js";
import type {
  HealthInfo,
  ItemDetail,
  ItemKind,
  ReviewItem,
  SpanEdit,
  SweepPoint,
  VersionInfo,
} from "./types.js";

export interface ProposedAction {
  /** What the affordance preselects for this item kind. */
  action: "add-annotation" | "remove-annotation" | "relabel";
  label: string | null;
  edit: SpanEdit;
}

/** The preselected fix per item kind. Offsets echo the server's item range
 * verbatim; the UI never adjusts them. */
export function proposeFix(item: ReviewItem): ProposedAction {
  const base = { doc_id: item.doc_id, start: item.start, end: item.end };
  const byKind: Record<ItemKind, ProposedAction> = {
    FN: {
      action: "add-annotation",
      label: item.model_label,
      edit: { ...base, concept_id: item.model_label },
    },
    FP: {
      action: "remove-annotation",
      label: null,
      edit: { ...base, concept_id: null },
    },
    "class-swap": {
      action: "relabel",
      label: item.model_label,
      edit: { ...base, concept_id: item.model_label },
    },
  };
  return byKind[item.kind];
}

export interface TriageState {
  health: HealthInfo | null;
  queue: ReviewItem[];
  cursor: number;
  current: ItemDetail | null;
  versions: VersionInfo[];
  sweep: SweepPoint[];
  banner: string | null;
  busy: boolean;
}

export class TriageController {
  readonly state: TriageState = {
    health: null,
    queue: [],
    cursor: 0,
    current: null,
    versions: [],
    sweep: [],
    banner: null,
    busy: false,
  };

  private listeners: Array<() => void> = [];

  constructor(
    private readonly api: ReviewApi,
    readonly reviewerId: string,
  ) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  /** Rebuild every piece of state from the server. */
  async refresh(): Promise<void> {
    this.state.health = await this.api.health();
    this.state.queue = await this.api.items("pending");
    this.state.versions = await this.api.versions();
    if (this.state.health.round > 0 && this.state.health.round_status === "review") {
      this.state.sweep = await this.api.sweep().catch(() => []);
    }
    if (this.state.cursor >= this.state.queue.length) {
      this.state.cursor = Math.max(0, this.state.queue.length - 1);
    }
    this.state.current = null;
    this.emit();
  }

  get roundEnabled(): boolean {
    const h = this.state.health;
    if (!h) return false;
    if (h.round === 0) return true; // first round
    return h.round_status === "review" && h.pending_items === 0;
  }

  get converged(): boolean {
    return this.state.health?.converged ?? false;
  }

  /** Claim the item under the cursor and load its detail view. */
  async openCurrent(): Promise<ItemDetail | null> {
    const item = this.state.queue[this.state.cursor];
    if (!item) {
      this.state.current = null;
      this.emit();
      return null;
    }
    try {
      await this.api.claim(item.item_id, this.reviewerId);
      this.state.current = await this.api.itemDetail(item.item_id);
      this.state.banner = null;
    } catch (err) {
      if (err instanceof ApiError && err.isStaleItem) {
        await this.handleStale(err);
        return null;
      }
      throw err;
    }
    this.emit();
    return this.state.current;
  }

  private async handleStale(err: ApiError): Promise<void> {
    this.state.banner = `Item was taken over or closed elsewhere (${err.message}); queue refreshed.`;
    this.state.queue = await this.api.items("pending");
    if (this.state.cursor >= this.state.queue.length) {
      this.state.cursor = Math.max(0, this.state.queue.length - 1);
    }
    this.state.current = null;
    this.emit();
  }

  private async decide(verdict: "fix-annotation" | "confirm-model-error",
                       edits?: SpanEdit[]): Promise<void> {
    const current = this.state.current;
    if (!current || this.state.busy) return;
    this.state.busy = true;
    try {
      await this.api.decide(current.item_id, verdict, this.reviewerId, edits);
      this.state.queue = this.state.queue.filter(
        (it) => it.item_id !== current.item_id,
      );
      this.state.current = null;
      this.state.health = await this.api.health();
      this.state.versions = await this.api.versions();
      if (this.state.cursor >= this.state.queue.length) {
        this.state.cursor = Math.max(0, this.state.queue.length - 1);
      }
    } catch (err) {
      if (err instanceof ApiError && err.isStaleItem) {
        await this.handleStale(err);
        return;
      }
      throw err;
    } finally {
      this.state.busy = false;
    }
    this.emit();
  }

  /** Fix the annotation: the edit echoes the server range; the reviewer may
   * only substitute the label. */
  async submitFix(labelOverride?: string): Promise<void> {
    const current = this.state.current;
    if (!current) return;
    const proposal = proposeFix(current);
    const edit: SpanEdit =
      labelOverride === undefined
        ? proposal.edit
        : { ...proposal.edit, concept_id: labelOverride };
    await this.decide("fix-annotation", [edit]);
  }

  async submitConfirm(): Promise<void> {
    await this.decide("confirm-model-error");
  }

  move(delta: number): void {
    const n = this.state.queue.length;
    if (n === 0) return;
    this.state.cursor = Math.min(n - 1, Math.max(0, this.state.cursor + delta));
    this.state.current = null;
    this.emit();
  }

  async triggerRound(): Promise<void> {
    if (!this.roundEnabled) return;
    await this.api.triggerRound();
    this.state.health = await this.api.health();
    this.emit();
  }
}
