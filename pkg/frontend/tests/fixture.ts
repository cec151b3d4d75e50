/** Scripted service fixture: a stateful in-memory stand-in for the audit
 * service, speaking the exact wire schemas from docs/INTERFACES.md. */

import type {
  HealthInfo,
  ItemDetail,
  ReviewItem,
  SpanEdit,
  SpanInfo,
  SweepPoint,
  VersionInfo,
} from "../src/types.js";

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
  headers: Record<string, string>;
}

const DOC_TEXT =
  "Clinic note.\nPatient James Smith attended with his carer.\n" +
  "NHS 943 476 5919 was quoted at the desk.\nFollow up in 6 weeks.\n";

export class ScriptedService {
  calls: RecordedCall[] = [];
  items: Map<string, ReviewItem> = new Map();
  goldSpans: SpanInfo[] = [];
  versions: VersionInfo[] = [
    { version_id: 1, parent_version: null, documents: 1, spans: 2, changelog_entries: 0 },
  ];
  round = 1;
  roundStatus: HealthInfo["round_status"] = "review";
  converged = false;
  failNextNetwork = 0;

  constructor() {
    const mk = (
      id: string,
      kind: ReviewItem["kind"],
      start: number,
      end: number,
      gold: string,
      model: string,
    ): ReviewItem => ({
      item_id: id,
      doc_id: "d001",
      token_start: 0,
      token_end: 1,
      start,
      end,
      kind,
      gold_label: gold,
      model_label: model,
      fold_index: 0,
      round_number: 1,
      status: "pending",
      claimed_by: null,
    });
    // "James Smith" at [21, 32); NHS digits at [62, 74); "6 weeks" benign
    this.items.set("r1:d001:4-6", mk("r1:d001:4-6", "FN", 21, 32, "non-PHI", "name"));
    this.items.set("r1:d001:12-15", mk("r1:d001:12-15", "class-swap", 62, 74,
      "telephone_number", "nhs_number"));
    this.items.set("r1:d001:20-21", mk("r1:d001:20-21", "FP", 100, 107,
      "name", "non-PHI"));
    this.goldSpans = [
      { start: 62, end: 74, concept_id: "telephone_number", origin: "gold" },
      { start: 100, end: 107, concept_id: "name", origin: "gold" },
    ];
  }

  pending(): ReviewItem[] {
    return [...this.items.values()].filter((it) => it.status === "pending");
  }

  health(): HealthInfo {
    return {
      ok: true,
      round: this.round,
      round_status: this.roundStatus,
      dataset_version: this.versions[this.versions.length - 1].version_id,
      pending_items: this.pending().length,
      converged: this.converged,
    };
  }

  sweep(): SweepPoint[] {
    return [0, 0.5, 1].map((lambda) => ({
      lambda,
      precision: 0.9 - 0.4 * lambda,
      recall: 0.8 + 0.2 * lambda,
      merged_precision: 0.92 - 0.5 * lambda,
      merged_recall: 0.85 + 0.15 * lambda,
    }));
  }

  private reply(status: number, payload: unknown): Response {
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  private error(code: string, message: string): Response {
    return this.reply(409, { error: code, message });
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    if (this.failNextNetwork > 0) {
      this.failNextNetwork--;
      throw new TypeError("network down");
    }
    const method = init?.method ?? "GET";
    const u = new URL(url, "http://fixture");
    const path = u.pathname;
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    this.calls.push({
      method,
      path: path + (u.search || ""),
      body,
      headers: Object.fromEntries(
        Object.entries((init?.headers as Record<string, string>) ?? {}),
      ),
    });

    if (method === "GET" && path === "/api/health") {
      return this.reply(200, this.health());
    }
    if (method === "GET" && path === "/api/items") {
      const status = u.searchParams.get("status") ?? "pending";
      const items = status === "pending" ? this.pending() : [...this.items.values()];
      return this.reply(200, { items });
    }
    const itemDetail = path.match(/^\/api\/items\/([^/]+)$/);
    if (method === "GET" && itemDetail) {
      const item = this.items.get(decodeURIComponent(itemDetail[1]));
      if (!item) return this.error("stale-item", "unknown item");
      const detail: ItemDetail = {
        ...item,
        window: { start: 0, end: DOC_TEXT.length, text: DOC_TEXT },
        spans: this.goldSpans,
        queue: { pending: this.pending().length, total: this.items.size },
      };
      return this.reply(200, detail);
    }
    const claim = path.match(/^\/api\/items\/([^/]+)\/claim$/);
    if (method === "POST" && claim) {
      const item = this.items.get(decodeURIComponent(claim[1]));
      if (!item || item.status !== "pending") {
        return this.error("stale-item", "item is closed");
      }
      const reviewer = body?.reviewer_id ?? "anonymous";
      if (item.claimed_by && item.claimed_by !== reviewer) {
        return this.error("stale-item", `claimed by ${item.claimed_by}`);
      }
      item.claimed_by = reviewer;
      return this.reply(200, item);
    }
    const decision = path.match(/^\/api\/items\/([^/]+)\/decision$/);
    if (method === "POST" && decision) {
      const item = this.items.get(decodeURIComponent(decision[1]));
      if (!item || item.status !== "pending") {
        return this.error("stale-item", "item is closed");
      }
      const reviewer = body?.reviewer_id ?? "anonymous";
      if (item.claimed_by && item.claimed_by !== reviewer) {
        return this.error("stale-item", `claimed by ${item.claimed_by}`);
      }
      if (body.verdict === "fix-annotation") {
        const edits = (body.edits ?? []) as SpanEdit[];
        if (!edits.length) return this.error("stale-item", "fix without edits");
        item.status = "annotator-error-fixed";
        const last = this.versions[this.versions.length - 1];
        this.versions.push({
          version_id: last.version_id + 1,
          parent_version: last.version_id,
          documents: last.documents,
          spans: last.spans + edits.filter((e) => e.concept_id !== null).length,
          changelog_entries: edits.length,
        });
      } else {
        item.status = "model-error-confirmed";
      }
      if (this.pending().length === 0) {
        this.converged = [...this.items.values()].every(
          (it) => it.status === "model-error-confirmed",
        );
      }
      return this.reply(200, {
        item_id: item.item_id,
        verdict: body.verdict,
        dataset_version: this.versions[this.versions.length - 1].version_id,
      });
    }
    if (method === "POST" && path === "/api/rounds") {
      if (this.pending().length > 0) {
        return this.error("stale-item", "items pending");
      }
      this.round += 1;
      this.roundStatus = "review";
      this.items.clear(); // next round converges clean
      this.converged = true;
      return this.reply(202, { round: this.round, status: "running" });
    }
    if (method === "GET" && path === "/api/rounds") {
      return this.reply(200, {
        rounds: [{
          round: this.round,
          status: this.roundStatus,
          error: null,
          dataset_version: 1,
          item_count: this.items.size,
          by_kind: {},
          by_status: {},
        }],
      });
    }
    if (method === "GET" && path === "/api/versions") {
      return this.reply(200, { versions: this.versions });
    }
    if (method === "GET" && path === "/api/sweep") {
      return this.reply(200, { series: this.sweep() });
    }
    if (method === "GET" && path === "/api/converged") {
      return this.reply(200, { converged: this.converged });
    }
    const doc = path.match(/^\/api\/documents\/([^/]+)$/);
    if (method === "GET" && doc) {
      return this.reply(200, { doc_id: decodeURIComponent(doc[1]), text: DOC_TEXT });
    }
    return this.reply(404, { error: "not-found" });
  };
}

export { DOC_TEXT };
