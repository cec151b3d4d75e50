"""Exception types shared across the toolkit.

Every domain error carries enough context (doc ids, offsets, concept ids)
to be actionable without re-reading the input files.
"""


class DeidError(Exception):
    """Base class for all toolkit domain errors."""

    code = "error"

    def payload(self) -> dict:
        """Structured form used by the CLI and the audit service."""
        return {"error": self.code, "message": str(self)}


# --- ontology ---------------------------------------------------------------

class AmbiguousTarget(DeidError):
    code = "ambiguous-target"


class UncoveredLeaf(DeidError):
    code = "uncovered-leaf"


# --- corpus -----------------------------------------------------------------

class MalformedRecord(DeidError):
    code = "malformed-record"


class OverlappingSpans(DeidError):
    code = "overlapping-spans"


class UnknownConcept(DeidError):
    code = "unknown-concept"


class EmptyCorpus(DeidError):
    code = "empty-corpus"


# --- tokenizer --------------------------------------------------------------

class SpanOutOfBounds(DeidError):
    code = "span-out-of-bounds"


# --- backend ----------------------------------------------------------------

class EmptyTrainingSet(DeidError):
    code = "empty-training-set"


class ClassOrderMismatch(DeidError):
    code = "class-order-mismatch"


class UnsupportedBackend(DeidError):
    code = "unsupported-backend"


class ScorerProtocolError(DeidError):
    code = "scorer-protocol-error"

    def __init__(self, message: str, doc_id: str | None = None):
        super().__init__(message)
        self.doc_id = doc_id

    def payload(self) -> dict:
        out = super().payload()
        if self.doc_id is not None:
            out["doc_id"] = self.doc_id
        return out


# --- bias -------------------------------------------------------------------

class LambdaOutOfRange(DeidError):
    code = "lambda-out-of-range"


# --- redactor ---------------------------------------------------------------

class MissingKey(DeidError):
    code = "missing-key"


# --- evaluation -------------------------------------------------------------

class ShapeMismatch(DeidError):
    code = "shape-mismatch"


# --- audit ------------------------------------------------------------------

class TooFewDocuments(DeidError):
    code = "too-few-documents"


class StaleItem(DeidError):
    code = "stale-item"


class ConflictingEdits(DeidError):
    code = "conflicting-edits"
