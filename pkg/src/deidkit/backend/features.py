"""Hashed sparse features for the reference token scorer.

Features are position-window-local: token surface, shape, affixes, digit-run
length, and the surfaces/shapes of neighbors within +-2 tokens, hashed with
CRC-32 into a fixed-size space. Collisions are accepted. CRC-32 is stable
across runs and platforms, which keeps training fully deterministic.
"""

from __future__ import annotations

import zlib
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import sparse

from ..tokenizer import Token, tokenize

DEFAULT_HASH_DIM = 2 ** 18

_EDGE = "<edge>"


def _digit_run(surface: str) -> int:
    best = run = 0
    for ch in surface:
        run = run + 1 if ch.isdigit() else 0
        best = max(best, run)
    return best


def token_features(tokens: Sequence[Token], i: int) -> list[str]:
    tok = tokens[i]
    s = tok.surface
    low = s.lower()
    feats = [f"w={low}", f"sh={tok.shape_class}", f"len={min(len(s), 8)}"]
    for n in (1, 2, 3, 4):
        if len(low) > n:
            feats.append(f"p{n}={low[:n]}")
            feats.append(f"s{n}={low[-n:]}")
    run = _digit_run(s)
    if run:
        feats.append(f"dr={min(run, 10)}")
    if "@" in s:
        feats.append("has@")
    if s[0].isupper():
        feats.append("cap")
    if len(s) > 1 and s.isupper():
        feats.append("allcap")
    for off in (-2, -1, 1, 2):
        j = i + off
        if 0 <= j < len(tokens):
            feats.append(f"w{off}={tokens[j].surface.lower()}")
            feats.append(f"sh{off}={tokens[j].shape_class}")
        else:
            feats.append(f"w{off}={_EDGE}")
    return feats


def _hash(feature: str, dim: int) -> int:
    return zlib.crc32(feature.encode("utf-8")) % dim


def feature_matrix(tokens: Sequence[Token], dim: int = DEFAULT_HASH_DIM) -> sparse.csr_matrix:
    """One row of hashed indicator features per token."""
    indices: list[int] = []
    indptr = [0]
    for i in range(len(tokens)):
        indices.extend(_hash(f, dim) for f in token_features(tokens, i))
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.float64)
    return sparse.csr_matrix(
        (data, np.asarray(indices, dtype=np.int32), np.asarray(indptr, dtype=np.int32)),
        shape=(len(tokens), dim),
    )


@lru_cache(maxsize=4096)
def doc_features(text: str, dim: int = DEFAULT_HASH_DIM) -> tuple[tuple[Token, ...], sparse.csr_matrix]:
    """Tokenize and featurize one document, memoized on the text itself."""
    tokens = tokenize(text)
    return tokens, feature_matrix(tokens, dim)
