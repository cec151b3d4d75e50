/** Review UI entry point: keyboard-first triage over the audit service.
 *
 * Keys: j/k or arrows move the queue, Enter opens (claims) an item,
 * c confirms a model error, f applies the preselected fix, r triggers the
 * next round once the queue is empty.
 */

import { ReviewApi } from "./api.js";
import { sweepChartSvg } from "./chart.js";
import { conceptColor, marksFor, windowSegments } from "./highlight.js";
import { TriageController, proposeFix } from "./state.js";

const api = new ReviewApi("");
const reviewer =
  new URLSearchParams(location.search).get("reviewer") ?? "reviewer";
const controller = new TriageController(api, reviewer);

const el = (id: string) => document.getElementById(id)!;
const queueList = el("queue-list");
const docView = el("doc-view");
const itemInfo = el("item-info");
const banner = el("banner");
const statusLine = el("status-line");
const roundButton = el("round-button") as HTMLButtonElement;
const fixButton = el("fix-button") as HTMLButtonElement;
const confirmButton = el("confirm-button") as HTMLButtonElement;
const labelSelect = el("label-select") as HTMLSelectElement;
const versionsView = el("versions");
const chartView = el("chart");
const roundsView = el("rounds");

function render(): void {
  const s = controller.state;
  banner.textContent = s.banner ?? "";
  banner.classList.toggle("hidden", !s.banner);

  if (s.health) {
    const h = s.health;
    statusLine.textContent =
      `round ${h.round} (${h.round_status}) · dataset v${h.dataset_version} · ` +
      `${h.pending_items} pending` + (h.converged ? " · CONVERGED" : "");
  }
  roundButton.disabled = !controller.roundEnabled;

  queueList.replaceChildren(
    ...s.queue.map((item, i) => {
      const li = document.createElement("li");
      li.textContent = `${item.kind} ${item.doc_id} [${item.start},${item.end}) ` +
        `${item.gold_label} -> ${item.model_label}`;
      li.className = i === s.cursor ? "cursor" : "";
      li.onclick = () => {
        controller.state.cursor = i;
        void controller.openCurrent();
      };
      queueList.appendChild(li);
      return li;
    }),
  );

  renderCurrent();
  renderSide();
}

function renderCurrent(): void {
  const current = controller.state.current;
  docView.replaceChildren();
  itemInfo.textContent = "";
  const hasItem = current !== null;
  fixButton.disabled = !hasItem;
  confirmButton.disabled = !hasItem;
  labelSelect.disabled = !hasItem;
  if (!current) {
    docView.textContent = controller.state.queue.length
      ? "Press Enter to open the selected item."
      : "Queue is empty.";
    return;
  }

  const proposal = proposeFix(current);
  itemInfo.textContent =
    `${current.item_id} · ${current.kind} · gold ${current.gold_label} · ` +
    `model ${current.model_label} · fold ${current.fold_index} · ` +
    `${current.queue.pending}/${current.queue.total} pending · ` +
    `preselected: ${proposal.action}${proposal.label ? " as " + proposal.label : ""}`;

  labelSelect.replaceChildren();
  const labels = new Set<string>(
    [current.model_label, current.gold_label,
     ...current.spans.map((sp) => sp.concept_id)].filter((l) => l !== "non-PHI"),
  );
  for (const label of labels) {
    const opt = document.createElement("option");
    opt.value = label;
    opt.textContent = label;
    opt.selected = label === proposal.label;
    labelSelect.appendChild(opt);
  }

  // Server offsets only: slice the window where the server said spans are.
  const segments = windowSegments(
    current.window,
    marksFor(current.start, current.end, current.spans),
  );
  for (const seg of segments) {
    const span = document.createElement("span");
    span.textContent = seg.text;
    const concept = seg.classes.find((c) => c !== "disagreement");
    if (concept) {
      span.style.backgroundColor = conceptColor(concept);
      span.title = concept;
    }
    if (seg.classes.includes("disagreement")) {
      span.classList.add("disagreement");
    }
    docView.appendChild(span);
  }
}

function renderSide(): void {
  const s = controller.state;
  versionsView.textContent = s.versions
    .map((v) => `v${v.version_id}${v.parent_version ? ` <- v${v.parent_version}` : ""}` +
      ` · ${v.spans} spans · ${v.changelog_entries} edits`)
    .join("\n");
  chartView.innerHTML = s.sweep.length ? sweepChartSvg(s.sweep) : "";
  void refreshRounds();
}

async function refreshRounds(): Promise<void> {
  try {
    const rounds = await api.rounds();
    roundsView.textContent = rounds
      .map((r) => {
        const kinds = Object.entries(r.by_kind)
          .map(([k, n]) => `${k}:${n}`)
          .join(" ");
        return `round ${r.round} (${r.status}) · ${r.item_count} items · ${kinds}`;
      })
      .join("\n");
  } catch {
    roundsView.textContent = "";
  }
}

function bindKeys(): void {
  document.addEventListener("keydown", (ev) => {
    if (ev.target instanceof HTMLSelectElement) return;
    switch (ev.key) {
      case "j":
      case "ArrowDown":
        controller.move(1);
        break;
      case "k":
      case "ArrowUp":
        controller.move(-1);
        break;
      case "Enter":
        void controller.openCurrent();
        break;
      case "c":
        void controller.submitConfirm();
        break;
      case "f":
        void controller.submitFix(labelSelect.value || undefined);
        break;
      case "r":
        void controller.triggerRound().then(() => poll());
        break;
      default:
        return;
    }
    ev.preventDefault();
  });
}

let pollTimer: number | undefined;

function poll(): void {
  window.clearTimeout(pollTimer);
  void controller.refresh().then(() => {
    const status = controller.state.health?.round_status;
    if (status === "running") {
      pollTimer = window.setTimeout(poll, 1000);
    }
  });
}

roundButton.onclick = () => void controller.triggerRound().then(() => poll());
fixButton.onclick = () => void controller.submitFix(labelSelect.value || undefined);
confirmButton.onclick = () => void controller.submitConfirm();

controller.onChange(render);
bindKeys();
poll();
