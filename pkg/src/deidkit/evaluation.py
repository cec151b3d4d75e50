"""Token-level evaluation: per-class P/R/F1 and merged PHI metrics.

The merged metrics collapse every PHI class into a single positive label,
so a token detected as the wrong PHI class still counts as found. Only a
PHI token predicted non-PHI is a merged miss. Zero-denominator ratios are
reported as NA (``None``), never as 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ShapeMismatch
from .tokenizer import TokenLabeling


@dataclass(frozen=True)
class ClassMetrics:
    precision: float | None
    recall: float | None
    f1: float | None
    support: int
    merged_recall: float | None


@dataclass(frozen=True)
class MetricsReport:
    class_order: tuple[str, ...]
    counts: np.ndarray  # confusion matrix, rows = gold class, cols = predicted class
    per_class: dict[str, ClassMetrics]
    merged_precision: float | None
    merged_recall: float | None
    provenance: dict = field(default_factory=dict)

    @property
    def merged(self) -> tuple[float | None, float | None]:
        return (self.merged_precision, self.merged_recall)

    def micro(self) -> tuple[float | None, float | None, float | None]:
        """Micro-averaged P/R/F1 over the positive classes."""
        cm = self.counts
        tp = int(np.trace(cm)) - int(cm[0, 0])
        fp = int(cm[:, 1:].sum()) - tp
        fn = int(cm[1:, :].sum()) - tp
        p = _ratio(tp, tp + fp)
        r = _ratio(tp, tp + fn)
        return p, r, _f1(p, r)

    def macro(self) -> tuple[float | None, float | None, float | None]:
        """Macro averages over classes with defined values (NA excluded)."""
        ps = [m.precision for m in self.per_class.values() if m.precision is not None]
        rs = [m.recall for m in self.per_class.values() if m.recall is not None]
        fs = [m.f1 for m in self.per_class.values() if m.f1 is not None]
        mean = lambda xs: sum(xs) / len(xs) if xs else None
        return mean(ps), mean(rs), mean(fs)

    def to_dict(self) -> dict:
        micro_p, micro_r, micro_f = self.micro()
        macro_p, macro_r, macro_f = self.macro()
        return {
            "class_order": list(self.class_order),
            "confusion": self.counts.tolist(),
            "per_class": {
                cid: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                    "merged_recall": m.merged_recall,
                }
                for cid, m in self.per_class.items()
            },
            "merged": {"precision": self.merged_precision, "recall": self.merged_recall},
            "micro": {"precision": micro_p, "recall": micro_r, "f1": micro_f},
            "macro": {"precision": macro_p, "recall": macro_r, "f1": macro_f},
            "provenance": dict(self.provenance),
        }


def _ratio(num: int, denom: int) -> float | None:
    return None if denom == 0 else num / denom


def _f1(p: float | None, r: float | None) -> float | None:
    if p is None or r is None:
        return None
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def confusion_matrix(
    gold: Mapping[str, TokenLabeling],
    pred: Mapping[str, TokenLabeling],
    n_classes: int,
) -> np.ndarray:
    if set(gold) != set(pred):
        raise ShapeMismatch(
            f"gold and pred cover different documents: "
            f"{sorted(set(gold) ^ set(pred))[:5]} ..."
        )
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    for doc_id in sorted(gold):
        g, p = gold[doc_id].labels, pred[doc_id].labels
        if len(g) != len(p):
            raise ShapeMismatch(
                f"doc {doc_id!r}: gold has {len(g)} tokens, pred has {len(p)}"
            )
        if g:
            flat = np.asarray(g, dtype=np.int64) * n_classes + np.asarray(p, dtype=np.int64)
            cm += np.bincount(flat, minlength=n_classes * n_classes).reshape(n_classes, n_classes)
    return cm


def evaluate(
    gold: Mapping[str, TokenLabeling],
    pred: Mapping[str, TokenLabeling],
    class_order: Sequence[str],
    provenance: Mapping | None = None,
) -> MetricsReport:
    """Compare per-token labelings covering the same documents."""
    n = len(class_order)
    cm = confusion_matrix(gold, pred, n)

    per_class: dict[str, ClassMetrics] = {}
    for c in range(1, n):
        tp = int(cm[c, c])
        fp = int(cm[:, c].sum()) - tp
        fn = int(cm[c, :].sum()) - tp
        support = int(cm[c, :].sum())
        p = _ratio(tp, tp + fp)
        r = _ratio(tp, tp + fn)
        merged_hits = int(cm[c, 1:].sum())
        per_class[class_order[c]] = ClassMetrics(
            precision=p,
            recall=r,
            f1=_f1(p, r),
            support=support,
            merged_recall=_ratio(merged_hits, support),
        )

    tp_m = int(cm[1:, 1:].sum())
    fp_m = int(cm[0, 1:].sum())
    fn_m = int(cm[1:, 0].sum())
    return MetricsReport(
        class_order=tuple(class_order),
        counts=cm,
        per_class=per_class,
        merged_precision=_ratio(tp_m, tp_m + fp_m),
        merged_recall=_ratio(tp_m, tp_m + fn_m),
        provenance=dict(provenance or {}),
    )


def _fmt(x: float | None) -> str:
    return "NA" if x is None else f"{x:.2f}"


def report_table(reports: Sequence[MetricsReport], names: Sequence[str] | None = None) -> str:
    """Aligned comparison table: one row per concept, P/R/R_m per report.

    The merged row repeats the corpus-global P_m and R_m; per-class R_m is
    the merged recall restricted to that concept's gold tokens. Classes
    absent from a corpus render as NA.
    """
    if not reports:
        return ""
    classes = [c for c in reports[0].class_order[1:]]
    if names is None:
        names = [r.provenance.get("name", f"model {i + 1}") for i, r in enumerate(reports)]

    header = ["concept"]
    for name in names:
        header += [f"{name} P", "R", "R_m"]
    rows = [header]
    for cid in classes:
        row = [cid]
        for rep in reports:
            m = rep.per_class.get(cid)
            if m is None or m.support == 0:
                row += ["NA", "NA", "NA"]
            else:
                row += [_fmt(m.precision), _fmt(m.recall), _fmt(m.merged_recall)]
        rows.append(row)
    merged_row = ["merged (PHI)"]
    micro_row = ["micro"]
    macro_row = ["macro"]
    for rep in reports:
        merged_row += [_fmt(rep.merged_precision), "", _fmt(rep.merged_recall)]
        micro_p, micro_r, _ = rep.micro()
        macro_p, macro_r, _ = rep.macro()
        micro_row += [_fmt(micro_p), _fmt(micro_r), ""]
        macro_row += [_fmt(macro_p), _fmt(macro_r), ""]
    rows += [merged_row, micro_row, macro_row]

    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines) + "\n"
