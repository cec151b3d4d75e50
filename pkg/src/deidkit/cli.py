"""One binary, subcommand style: the pipeline's linear workflow as commands.

Exit codes: 0 success, 1 domain error (structured JSON on stderr), 2 usage
error. Every command prints a provenance line (config hash, dataset
version, model id, seed) sufficient to reproduce it. Logs are PHI-safe by
default: token surfaces are only ever logged under --unsafe-logs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .backend import (
    BACKEND_REFERENCE,
    BACKEND_RULES,
    TrainConfig,
    fine_tune,
    load_model,
    rule_baseline_db,
    save_model,
    train,
)
from .bias import decide_labels, sweep
from .corpus import Document, PreprocessConfig, dataset_to_exchange_json, ingest, preprocess
from .errors import DeidError, MissingKey
from .evaluation import evaluate, report_table
from .ontology import apply_remap, build_default_db, load_db, remap_granularity, save_db
from .redactor import MODE_PSEUDONYMIZE, MODE_REMOVE, PlanSpan, RedactionPlan, redact
from .storage import VersionStore
from .synth import SynthConfig, generate
from .tokenizer import TokenLabeling, lift_labels, project_spans, tokenize

logger = logging.getLogger("deidkit")


@dataclass(frozen=True)
class EngineConfig:
    """Resolved deployment configuration for the long-running service."""

    db_path: str | None
    backend_kind: str
    lambda_default: float
    granularity: tuple[str, ...]
    bind: str
    storage_dir: str
    fold_k: int = 5
    fold_seed: int = 0
    iterations: int = 150
    token: str | None = None
    ui_dir: str | None = None

    def __post_init__(self):
        if not (0.0 <= self.lambda_default <= 1.0):
            raise DeidError(f"lambda default {self.lambda_default} outside [0, 1]")
        for label, path in (("concept db", self.db_path), ("UI assets", self.ui_dir)):
            if path is not None and not Path(path).exists():
                raise DeidError(f"{label} path does not exist: {path}")

    @staticmethod
    def from_args(args) -> "EngineConfig":
        return EngineConfig(
            db_path=args.db,
            backend_kind=args.backend,
            lambda_default=args.lam,
            granularity=tuple(
                t.strip() for t in (getattr(args, "granularity", "") or "").split(",")
                if t.strip()),
            bind=os.environ.get("DEIDKIT_BIND", args.bind),
            storage_dir=os.environ.get("DEIDKIT_STORAGE", args.store),
            fold_k=args.k,
            fold_seed=args.fold_seed,
            iterations=args.iterations,
            token=args.token,
            ui_dir=args.ui,
        )


def _config_sha(args: argparse.Namespace) -> str:
    skip = {"func"}
    obj = {k: str(v) for k, v in sorted(vars(args).items()) if k not in skip}
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:12]


def _provenance(args, **extra) -> None:
    fields = {"cmd": args.cmd, "config_sha": _config_sha(args)}
    fields.update({k: v for k, v in extra.items() if v is not None})
    print("provenance: " + " ".join(f"{k}={v}" for k, v in fields.items()))


def _load_db_arg(args):
    return load_db(args.db) if getattr(args, "db", None) else build_default_db()


def _ingest_file(path: str, db):
    return ingest(Path(path), db).dataset


# --- commands ----------------------------------------------------------------

def cmd_ingest(args) -> int:
    db = _load_db_arg(args)
    result = ingest(Path(args.input), db, on_error=args.on_error)
    store = VersionStore(args.store)
    store.save(result.dataset)
    _provenance(args, dataset=f"v{result.dataset.version_id}")
    print(json.dumps({
        "version_id": result.dataset.version_id,
        "documents": len(result.dataset.documents),
        "spans": len(result.dataset.gold_spans),
        "rejected": [{"record": r, "reason": why} for r, why in result.rejected],
    }, indent=2))
    return 0


def cmd_preprocess(args) -> int:
    db = _load_db_arg(args)
    store = VersionStore(args.store)
    ds = store.load(args.version) if args.version else store.latest()
    merge = () if args.no_merge else PreprocessConfig().merge_map
    cfg = PreprocessConfig(min_occurrences=args.min_occurrences, merge_map=merge)
    result = preprocess(ds, cfg, db)
    store.save(result.dataset)
    _provenance(args, dataset=f"v{result.dataset.version_id}")
    print(json.dumps({
        "version_id": result.dataset.version_id,
        "parent_version": ds.version_id,
        "merged_counts": result.merged_counts,
        "dropped_span_counts": result.dropped_span_counts,
        "deactivated": list(result.deactivated),
    }, indent=2))
    return 0


def cmd_synth(args) -> int:
    cfg = SynthConfig(doc_count=args.docs, style=args.style, seed=args.seed)
    ds = generate(cfg)
    Path(args.out).write_text(dataset_to_exchange_json(ds), encoding="utf-8")
    _provenance(args, dataset=f"v{ds.version_id}", seed=args.seed)
    print(json.dumps({
        "documents": len(ds.documents),
        "spans": len(ds.gold_spans),
        "out": args.out,
    }, indent=2))
    return 0


def _train_cfg(args, db) -> TrainConfig:
    return TrainConfig(
        db=db,
        seed=args.seed,
        iterations=args.iterations,
        learning_rate=args.learning_rate,
    )


def cmd_train(args) -> int:
    db = _load_db_arg(args)
    ds = _ingest_file(args.data, db)
    cfg = _train_cfg(args, db)
    model = train(BACKEND_REFERENCE, ds, ds.doc_ids(), cfg)
    save_model(model, args.out)
    _provenance(args, dataset=f"v{ds.version_id}", model=model.model_id, seed=args.seed)
    print(json.dumps({"model_id": model.model_id, "out": args.out}, indent=2))
    return 0


def cmd_finetune(args) -> int:
    db = _load_db_arg(args)
    ds = _ingest_file(args.data, db)
    parent = load_model(args.model)
    doc_ids = ds.doc_ids()
    if args.docs:
        doc_ids = doc_ids[: args.docs]
    cfg = _train_cfg(args, db)
    model = fine_tune(parent, ds, doc_ids, cfg)
    save_model(model, args.out)
    _provenance(args, dataset=f"v{ds.version_id}", model=model.model_id, seed=args.seed)
    print(json.dumps({"model_id": model.model_id, "parent": parent.model_id,
                      "out": args.out}, indent=2))
    return 0


def _labelings(ds, db):
    index = {c: i for i, c in enumerate(db.class_order)}
    out = {}
    for doc_id in ds.doc_ids():
        doc = ds.document(doc_id)
        tokens = tokenize(doc.text)
        out[doc_id] = project_spans(tokens, ds.spans_for(doc_id), index, doc_id, len(doc.text))
    return out


def cmd_eval(args) -> int:
    db = _load_db_arg(args)
    gold_ds = _ingest_file(args.gold, db)
    pred_ds = _ingest_file(args.pred, db)
    report = evaluate(_labelings(gold_ds, db), _labelings(pred_ds, db), db.class_order,
                      {"name": Path(args.pred).stem})
    _provenance(args, dataset=f"v{gold_ds.version_id}")
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report_table([report]))
        p_m, r_m = report.merged
        fmt = lambda x: "NA" if x is None else f"{x:.4f}"
        print(f"P_m={fmt(p_m)} R_m={fmt(r_m)}")
    return 0


def cmd_sweep(args) -> int:
    db = _load_db_arg(args)
    ds = _ingest_file(args.data, db)
    model = load_model(args.model) if args.model else rule_baseline_db(db)
    grid = [float(x) for x in args.grid.split(",")]
    reports = sweep(model, ds, ds.doc_ids(), grid, {"model": model.model_id})
    _provenance(args, dataset=f"v{ds.version_id}", model=model.model_id)
    rows = ["lambda,precision,recall,merged_precision,merged_recall"]
    fmt = lambda x: "NA" if x is None else f"{x:.6f}"
    for rep in reports:
        micro_p, micro_r, _ = rep.micro()
        rows.append(",".join([
            f"{rep.provenance['lambda']:.3f}", fmt(micro_p), fmt(micro_r),
            fmt(rep.merged_precision), fmt(rep.merged_recall),
        ]))
    out = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    print(out, end="")
    return 0


def cmd_redact(args) -> int:
    db = _load_db_arg(args)
    if args.backend == BACKEND_RULES:
        model = rule_baseline_db(db)
    else:
        if not args.model:
            raise DeidError("--model is required unless --backend rule-baseline")
        model = load_model(args.model)
    key = None
    if args.mode == MODE_PSEUDONYMIZE:
        if not args.key_file:
            raise MissingKey("pseudonymize mode requires --key-file")
        key = Path(args.key_file).read_bytes().strip()
        if not key:
            raise MissingKey(f"key file {args.key_file} is empty")

    remap = {}
    if args.granularity:
        targets = [t.strip() for t in args.granularity.split(",") if t.strip()]
        remap = remap_granularity(db, targets)

    src = Path(args.input)
    files = sorted(src.glob("*.txt")) if src.is_dir() else [src]
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    class_order = model.class_order

    for f in files:
        text = f.read_text(encoding="utf-8")
        tokens, probs = model.score_text(text)
        labels = decide_labels(probs, args.lam)
        lifted = lift_labels(tokens, TokenLabeling(f.stem, tuple(labels.tolist())))
        spans = tuple(
            PlanSpan(s.start, s.end, apply_remap(remap, class_order[s.class_id]))
            for s in lifted
        )
        plan = RedactionPlan(doc_id=f.stem, spans=spans, mode=args.mode, key=key)
        output = redact(Document(f.stem, text), plan, db)
        (outdir / f.name).write_text(output.text, encoding="utf-8")
        sidecar = {
            "doc_id": f.stem,
            "mode": args.mode,
            "lambda": args.lam,
            "model": model.model_id,
            "digest": output.metadata.get("digest"),
            "spans": [
                {
                    "concept_id": a.concept_id,
                    "replacement": a.replacement,
                    "original_range": list(a.original_range),
                    "output_range": list(a.output_range),
                }
                for a in output.audit
            ],
        }
        (outdir / f"{f.stem}.audit.json").write_text(
            json.dumps(sidecar, indent=2), encoding="utf-8")
        logger.info("redacted %s: %d spans", f.stem, len(output.audit))
    _provenance(args, model=model.model_id)
    print(json.dumps({"files": len(files), "out": str(outdir)}, indent=2))
    return 0


def cmd_export_db(args) -> int:
    save_db(build_default_db(), args.out)
    _provenance(args)
    print(json.dumps({"out": args.out}, indent=2))
    return 0


def cmd_audit_serve(args) -> int:
    from .audit import AuditSession
    from .service import AuditService, serve

    engine = EngineConfig.from_args(args)
    db = load_db(engine.db_path) if engine.db_path else build_default_db()
    store = VersionStore(engine.storage_dir)
    if args.data:
        ds = _ingest_file(args.data, db)
        store.save(ds)
    else:
        ds = store.latest()
    cfg = TrainConfig(db=db, seed=args.seed, iterations=engine.iterations,
                      decision_lambda=engine.lambda_default)
    session = AuditSession(ds, cfg, backend_kind=engine.backend_kind,
                           k=engine.fold_k, fold_seed=engine.fold_seed)
    service = AuditService(session, store, token=engine.token)

    host, _, port = engine.bind.partition(":")
    static_dir = Path(engine.ui_dir).resolve() if engine.ui_dir else None
    server = serve(service, host or "127.0.0.1", int(port or 8311), static_dir)
    _provenance(args, dataset=f"v{ds.version_id}", seed=args.seed)
    print(f"audit service on http://{server.server_address[0]}:{server.server_address[1]}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deidkit",
        description="De-identification toolkit for free-text health records",
    )
    parser.add_argument("--version", action="version", version=f"deidkit {__version__}")
    parser.add_argument("--unsafe-logs", action="store_true",
                        help="allow token surfaces in debug logs")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("ingest", cmd_ingest, "ingest an annotation-exchange file into a store")
    p.add_argument("--input", required=True)
    p.add_argument("--store", required=True, help="storage directory")
    p.add_argument("--db", help="concept db file (default: built-in)")
    p.add_argument("--on-error", choices=["raise", "skip"], default="raise")

    p = add("preprocess", cmd_preprocess, "merge labels and drop rare concepts")
    p.add_argument("--store", required=True)
    p.add_argument("--version", type=int, help="source version (default latest)")
    p.add_argument("--min-occurrences", type=int, default=10)
    p.add_argument("--no-merge", action="store_true")
    p.add_argument("--db")

    p = add("synth", cmd_synth, "generate a synthetic annotated corpus")
    p.add_argument("--docs", type=int, required=True)
    p.add_argument("--style", choices=["A", "B"], default="A")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    for name, fn, help_ in (
        ("train", cmd_train, "train the reference scorer on an exchange file"),
        ("finetune", cmd_finetune, "fine-tune an existing model on new documents"),
    ):
        p = add(name, fn, help_)
        p.add_argument("--data", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--db")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--iterations", type=int, default=150)
        p.add_argument("--learning-rate", type=float, default=0.5)
        if name == "finetune":
            p.add_argument("--model", required=True)
            p.add_argument("--docs", type=int, help="cap the number of fine-tune documents")

    p = add("eval", cmd_eval, "evaluate predicted spans against gold spans")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--db")
    p.add_argument("--json", action="store_true")

    p = add("sweep", cmd_sweep, "lambda precision/recall tradeoff sweep")
    p.add_argument("--data", required=True)
    p.add_argument("--model", help="model file (default: rule baseline)")
    p.add_argument("--grid", default="0,0.25,0.5,0.75,1.0")
    p.add_argument("--db")
    p.add_argument("--out", help="write the CSV series here as well")

    p = add("redact", cmd_redact, "redact or pseudonymize text files")
    p.add_argument("--input", required=True, help="a .txt file or a directory of them")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=[MODE_REMOVE, MODE_PSEUDONYMIZE], default=MODE_REMOVE)
    p.add_argument("--key-file")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--granularity", help="comma-separated target node ids")
    p.add_argument("--model")
    p.add_argument("--backend", choices=[BACKEND_REFERENCE, BACKEND_RULES],
                   default=BACKEND_REFERENCE)
    p.add_argument("--db")

    p = add("export-db", cmd_export_db, "write the built-in concept db to a file")
    p.add_argument("--out", required=True)

    p = add("audit-serve", cmd_audit_serve, "run the audit/review service")
    p.add_argument("--store", help="storage directory (env: DEIDKIT_STORAGE)",
                   default=os.environ.get("DEIDKIT_STORAGE"),
                   required=os.environ.get("DEIDKIT_STORAGE") is None)
    p.add_argument("--data", help="bootstrap the store from an exchange file")
    p.add_argument("--db")
    p.add_argument("--bind", default=os.environ.get("DEIDKIT_BIND", "127.0.0.1:8311"))
    p.add_argument("--backend", default=BACKEND_REFERENCE)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--fold-seed", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=150)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--token", help="bearer token required on API calls")
    p.add_argument("--ui", help="directory of built UI assets to serve at /")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if not args.unsafe_logs:
        logging.getLogger("deidkit").setLevel(logging.INFO)
    if not (0.0 <= getattr(args, "lam", 0.0) <= 1.0):
        print(json.dumps({"error": "lambda-out-of-range"}), file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except DeidError as e:
        print(json.dumps(e.payload()), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
