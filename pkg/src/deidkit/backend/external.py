"""Adapter for external transformer scorers over a line-delimited protocol.

The engine owns word-level tokens; the external side owns its subword
tokenization and must pool back to exactly one probability row per word
token. Messages are single-line JSON over the scorer process's stdin and
stdout (or a connected socket file pair). A malformed response fails that
document with ScorerProtocolError and is logged; it is never skipped
silently.

Transformer training hyperparameters belong to the external side; the
shipped config template records documented defaults only.
"""

from __future__ import annotations

import json
import logging
import subprocess
from typing import Sequence

import numpy as np

from ..errors import ScorerProtocolError
from ..tokenizer import Token

BACKEND_EXTERNAL = "external"
PROTOCOL_VERSION = 1

logger = logging.getLogger("deidkit.external")

#: Documented defaults for a transformer scorer implementation; never used
#: by the toolkit itself, which does not train transformers.
EXTERNAL_TRAINING_TEMPLATE = {
    "base_model": "roberta-large",
    "learning_rate": 4.46e-5,
    "warmup_ratio": 0.01,
    "weight_decay": 0.14,
    "epochs": 10,
    "early_stopping": True,
    "per_device_batch_size": 4,
}


class ExternalScorer:
    """Spawns a scorer process and speaks the handshake/score protocol."""

    backend_kind = BACKEND_EXTERNAL

    def __init__(self, command: Sequence[str], class_order: Sequence[str]):
        self.command = tuple(command)
        self.class_order = tuple(class_order)
        self.model_name: str | None = None
        self.provenance = {"command": list(command)}
        self._proc: subprocess.Popen | None = None

    @property
    def model_id(self) -> str:
        return f"external:{self.model_name or 'unconnected'}"

    # -- lifecycle -----------------------------------------------------------

    def connect(self) -> None:
        if self._proc is not None:
            return
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._send({
            "type": "handshake",
            "protocol_version": PROTOCOL_VERSION,
            "class_order": list(self.class_order),
        })
        reply = self._recv(doc_id=None)
        if reply.get("type") != "handshake_ack" or reply.get("ok") is not True:
            raise ScorerProtocolError(f"bad handshake reply: {reply}")
        self.model_name = reply.get("model_name", "unknown")

    def close(self) -> None:
        if self._proc is None:
            return
        try:
            self._send({"type": "shutdown"})
        except Exception:
            pass
        self._proc.stdin.close()
        self._proc.wait(timeout=10)
        self._proc = None

    def __enter__(self) -> "ExternalScorer":
        self.connect()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- protocol ------------------------------------------------------------

    def _send(self, message: dict) -> None:
        assert self._proc is not None
        self._proc.stdin.write(json.dumps(message) + "\n")
        self._proc.stdin.flush()

    def _recv(self, doc_id: str | None) -> dict:
        assert self._proc is not None
        line = self._proc.stdout.readline()
        if not line:
            raise ScorerProtocolError("scorer closed the stream", doc_id=doc_id)
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ScorerProtocolError(f"response is not valid JSON: {e}", doc_id=doc_id)
        if not isinstance(obj, dict):
            raise ScorerProtocolError("response is not an object", doc_id=doc_id)
        return obj

    def score_doc(self, doc_id: str, tokens: Sequence[Token]) -> np.ndarray:
        self.connect()
        self._send({
            "type": "score",
            "doc_id": doc_id,
            "tokens": [
                {"surface": t.surface, "start": t.start, "end": t.end} for t in tokens
            ],
        })
        try:
            reply = self._recv(doc_id)
            return self._validate(reply, doc_id, len(tokens))
        except ScorerProtocolError as e:
            logger.error("external scorer failed doc %s: %s", doc_id, e)
            raise

    def score_tokens(self, tokens: Sequence[Token]) -> np.ndarray:
        return self.score_doc("", tokens)

    def _validate(self, reply: dict, doc_id: str, n_tokens: int) -> np.ndarray:
        if reply.get("type") != "scores" or reply.get("doc_id") != doc_id:
            raise ScorerProtocolError(f"unexpected reply: {reply}", doc_id=doc_id)
        probs = reply.get("probs")
        if not isinstance(probs, list) or len(probs) != n_tokens:
            raise ScorerProtocolError(
                f"expected {n_tokens} probability rows, got "
                f"{len(probs) if isinstance(probs, list) else type(probs).__name__}",
                doc_id=doc_id,
            )
        try:
            arr = np.asarray(probs, dtype=np.float64)
        except ValueError:
            raise ScorerProtocolError("ragged probability rows", doc_id=doc_id)
        if arr.ndim != 2 or arr.shape[1] != len(self.class_order):
            raise ScorerProtocolError(
                f"expected {len(self.class_order)} columns, got shape {arr.shape}",
                doc_id=doc_id,
            )
        if arr.size and (arr.min() < 0 or arr.max() > 1
                         or np.abs(arr.sum(axis=1) - 1.0).max() > 1e-6):
            raise ScorerProtocolError("rows are not probability vectors", doc_id=doc_id)
        return arr
