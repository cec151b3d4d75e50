"""Audit/review HTTP service: the machine side of the human-in-the-loop cycle.

JSON over a local port. Reads are concurrent; every mutation funnels
through the audit session's single-writer lock. Round training runs as a
background task whose status is polled. Request logs never include token
surfaces: only item ids, doc ids, and offsets.

Endpoints (see docs/INTERFACES.md for request/response examples):

  GET  /api/health                 service and round status
  GET  /api/items                  review queue (``?status=pending|closed|all``)
  GET  /api/items/<id>             one item with its document window and spans
  POST /api/items/<id>/claim       {"reviewer_id"} -> claim for review
  POST /api/items/<id>/decision    {"verdict", "reviewer_id", "edits"?}
  GET  /api/documents/<doc_id>     full document text
  POST /api/rounds                 trigger the next round (409 while pending)
  GET  /api/rounds                 round summaries
  GET  /api/metrics?round=N&lam=L  metrics report for a finished round
  GET  /api/sweep?round=N          lambda tradeoff series for a finished round
  GET  /api/versions               dataset version lineage
  GET  /api/converged              convergence state of the loop
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .audit import (
    STATUS_PENDING,
    AuditSession,
    ReviewDecision,
    SpanEdit,
    VERDICT_CONFIRM,
    VERDICT_FIX,
)
from .errors import DeidError, StaleItem
from .storage import VersionStore

logger = logging.getLogger("deidkit.service")

WINDOW = 160  # context characters shown either side of an item


class AuditService:
    """Glue between the HTTP layer, the audit session, and the store."""

    def __init__(self, session: AuditSession, store: VersionStore | None = None,
                 token: str | None = None):
        self.session = session
        self.store = store
        self.token = token
        self._round_thread: threading.Thread | None = None
        if store is not None:
            store.save(session.current)

    # -- round lifecycle -------------------------------------------------

    def trigger_round(self) -> dict:
        if self._round_thread is not None and self._round_thread.is_alive():
            raise StaleItem("a round is already running")
        if not self.session.can_start_round():
            raise StaleItem("cannot start a round while items are pending")
        number = len(self.session.rounds) + 1

        def runner():
            try:
                self.session.start_round()
            except Exception:
                logger.exception("round failed")

        self._round_thread = threading.Thread(target=runner, daemon=True)
        self._round_thread.start()
        return {"round": number, "status": "running"}

    def round_summaries(self) -> list[dict]:
        out = []
        for rnd in self.session.rounds:
            counts: dict[str, int] = {}
            status_counts: dict[str, int] = {}
            for it in rnd.items.values():
                counts[it.kind] = counts.get(it.kind, 0) + 1
                status_counts[it.status] = status_counts.get(it.status, 0) + 1
            out.append({
                "round": rnd.number,
                "status": rnd.status,
                "error": rnd.error,
                "dataset_version": rnd.dataset_version,
                "item_count": len(rnd.items),
                "by_kind": counts,
                "by_status": status_counts,
            })
        return out

    # -- items -------------------------------------------------------------

    def list_items(self, status: str = "pending") -> list[dict]:
        rnd = self.session.current_round
        if rnd is None:
            return []
        items = sorted(rnd.items.values(), key=lambda it: it.item_id)
        if status == "pending":
            items = [it for it in items if it.status == STATUS_PENDING]
        elif status == "closed":
            items = [it for it in items if it.status != STATUS_PENDING]
        return [it.to_dict() for it in items]

    def item_detail(self, item_id: str) -> dict:
        rnd = self.session.current_round
        if rnd is None or item_id not in rnd.items:
            raise StaleItem(f"unknown item: {item_id}")
        item = rnd.items[item_id]
        ds = self.session.versions[-1]
        doc = ds.document(item.doc_id)
        w_start = max(0, item.start - WINDOW)
        w_end = min(len(doc.text), item.end + WINDOW)
        spans = [
            {"start": s.start, "end": s.end, "concept_id": s.concept_id, "origin": "gold"}
            for s in ds.spans_for(item.doc_id)
            if s.start < w_end and w_start < s.end
        ]
        out = item.to_dict()
        out["window"] = {"start": w_start, "end": w_end, "text": doc.text[w_start:w_end]}
        out["spans"] = spans
        out["queue"] = {
            "pending": sum(1 for it in rnd.items.values() if it.status == STATUS_PENDING),
            "total": len(rnd.items),
        }
        return out

    def claim(self, item_id: str, reviewer_id: str) -> dict:
        item = self.session.claim(item_id, reviewer_id)
        return item.to_dict()

    def decide(self, item_id: str, body: dict) -> dict:
        verdict = body.get("verdict")
        if verdict not in (VERDICT_FIX, VERDICT_CONFIRM):
            raise StaleItem(f"unknown verdict: {verdict}")
        edits = tuple(
            SpanEdit(e["doc_id"], int(e["start"]), int(e["end"]), e.get("concept_id"))
            for e in body.get("edits", ())
        )
        decision = ReviewDecision(
            item_id=item_id,
            verdict=verdict,
            edits=edits,
            reviewer_id=body.get("reviewer_id", "anonymous"),
            timestamp=body.get("timestamp", ""),
        )
        version_id = self.session.submit(decision)
        if self.store is not None:
            self.store.save(self.session.current)
        logger.info("decision %s on %s -> dataset v%d", verdict, item_id, version_id)
        return {"item_id": item_id, "verdict": verdict, "dataset_version": version_id}

    # -- reports -----------------------------------------------------------

    def metrics(self, round_number: int | None, lam: float = 0.0) -> dict:
        rnd = self._finished_round(round_number)
        return rnd.result.metrics(lam).to_dict()

    def sweep(self, round_number: int | None) -> list[dict]:
        rnd = self._finished_round(round_number)
        return rnd.result.sweep_series()

    def _finished_round(self, round_number: int | None):
        rounds = self.session.rounds
        if round_number is None:
            finished = [r for r in rounds if r.result is not None]
            if not finished:
                raise StaleItem("no finished round")
            return finished[-1]
        for r in rounds:
            if r.number == round_number and r.result is not None:
                return r
        raise StaleItem(f"no finished round {round_number}")

    def versions(self) -> list[dict]:
        return [
            {
                "version_id": v.version_id,
                "parent_version": v.parent_version,
                "documents": len(v.documents),
                "spans": len(v.gold_spans),
                "changelog_entries": len(v.changelog),
            }
            for v in self.session.versions
        ]

    def health(self) -> dict:
        rnd = self.session.current_round
        return {
            "ok": True,
            "round": rnd.number if rnd else 0,
            "round_status": rnd.status if rnd else "idle",
            "dataset_version": self.session.current.version_id,
            "pending_items": len(self.session.pending_items()),
            "converged": self.session.converged(),
        }


def make_handler(service: AuditService, static_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # PHI-safe: path + status only
            logger.debug("%s %s", self.address_string(), fmt % args)

        def _reply(self, code: int, payload):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _authorized(self) -> bool:
            if service.token is None:
                return True
            header = self.headers.get("Authorization", "")
            return header == f"Bearer {service.token}"

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if length == 0:
                return {}
            try:
                return json.loads(self.rfile.read(length))
            except json.JSONDecodeError:
                raise StaleItem("request body is not valid JSON")

        def do_GET(self):
            self._route("GET")

        def do_POST(self):
            self._route("POST")

        def _route(self, method: str):
            url = urlparse(self.path)
            parts = [p for p in url.path.split("/") if p]
            try:
                if parts and parts[0] == "api":
                    if not self._authorized():
                        self._reply(401, {"error": "unauthorized"})
                        return
                    self._api(method, parts[1:], parse_qs(url.query))
                elif method == "GET":
                    self._static(url.path)
                else:
                    self._reply(404, {"error": "not-found"})
            except DeidError as e:
                self._reply(409, e.payload())
            except Exception as e:
                logger.exception("internal error on %s", url.path)
                self._reply(500, {"error": "internal", "message": str(e)})

        def _api(self, method: str, parts: list[str], query: dict):
            if method == "GET" and parts == ["health"]:
                self._reply(200, service.health())
            elif method == "GET" and parts == ["items"]:
                status = query.get("status", ["pending"])[0]
                self._reply(200, {"items": service.list_items(status)})
            elif method == "GET" and len(parts) == 2 and parts[0] == "items":
                self._reply(200, service.item_detail(parts[1]))
            elif method == "POST" and len(parts) == 3 and parts[0] == "items" \
                    and parts[2] == "claim":
                body = self._body()
                self._reply(200, service.claim(parts[1], body.get("reviewer_id", "anonymous")))
            elif method == "POST" and len(parts) == 3 and parts[0] == "items" \
                    and parts[2] == "decision":
                self._reply(200, service.decide(parts[1], self._body()))
            elif method == "GET" and len(parts) == 2 and parts[0] == "documents":
                ds = service.session.current
                doc = ds.document(parts[1])
                self._reply(200, {"doc_id": doc.doc_id, "text": doc.text})
            elif method == "POST" and parts == ["rounds"]:
                self._reply(202, service.trigger_round())
            elif method == "GET" and parts == ["rounds"]:
                self._reply(200, {"rounds": service.round_summaries()})
            elif method == "GET" and parts == ["metrics"]:
                rn = query.get("round", [None])[0]
                lam = float(query.get("lam", ["0"])[0])
                self._reply(200, service.metrics(int(rn) if rn else None, lam))
            elif method == "GET" and parts == ["sweep"]:
                rn = query.get("round", [None])[0]
                self._reply(200, {"series": service.sweep(int(rn) if rn else None)})
            elif method == "GET" and parts == ["versions"]:
                self._reply(200, {"versions": service.versions()})
            elif method == "GET" and parts == ["converged"]:
                self._reply(200, {"converged": service.session.converged()})
            else:
                self._reply(404, {"error": "not-found"})

        def _static(self, path: str):
            if static_dir is None:
                self._reply(404, {"error": "no-ui", "message": "UI assets not built"})
                return
            rel = path.lstrip("/") or "index.html"
            target = (static_dir / rel).resolve()
            if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
                self._reply(404, {"error": "not-found"})
                return
            body = target.read_bytes()
            ctype = {
                ".html": "text/html", ".js": "text/javascript",
                ".css": "text/css", ".map": "application/json",
                ".svg": "image/svg+xml",
            }.get(target.suffix, "application/octet-stream")
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def serve(service: AuditService, host: str = "127.0.0.1", port: int = 8311,
          static_dir: Path | None = None) -> ThreadingHTTPServer:
    """Create (but do not start) the HTTP server; caller runs serve_forever."""
    handler = make_handler(service, static_dir)
    return ThreadingHTTPServer((host, port), handler)
