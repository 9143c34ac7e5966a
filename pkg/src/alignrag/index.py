"""Evidence store with exact cosine retrieval.

The index is a brute-force scan: every query scores every entry, so
results are exact and directly comparable to an exhaustive oracle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoder import EncoderParams, SemanticVector, encode
from .errors import (
    DimMismatch,
    DuplicateId,
    EmptyCorpus,
    EmptyIndex,
    EmptyInput,
)
from .serialization import read_container, write_container
from .vocab import Vocabulary

INDEX_FORMAT_VERSION = 1
ZERO_NORM_EPS = 1e-12
DEFAULT_TOP_K = 5
DEFAULT_TAU = -1.0


@dataclass
class EvidenceChunk:
    """One piece of evidence text with its cached encoding."""

    id: int
    text: str
    vector: SemanticVector


@dataclass
class RetrievalResult:
    chunk_id: int
    score: float
    rank: int


class EvidenceIndex:
    def __init__(self, entries: list[EvidenceChunk], encoder_fingerprint: str):
        if not entries:
            raise EmptyCorpus("index needs at least one entry")
        self.entries = sorted(entries, key=lambda c: c.id)
        self.encoder_fingerprint = encoder_fingerprint
        self.dim = self.entries[0].vector.dim
        self._ids = np.array([c.id for c in self.entries], dtype=np.int64)
        self._matrix = np.stack([c.vector.values for c in self.entries])
        self._by_id = {c.id: c for c in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def chunk(self, chunk_id: int) -> EvidenceChunk:
        return self._by_id[chunk_id]

    def __contains__(self, chunk_id: int) -> bool:
        return chunk_id in self._by_id


def build_index(corpus, vocab: Vocabulary, params: EncoderParams) -> EvidenceIndex:
    """Encode (id, text) pairs into an immutable index."""
    corpus = list(corpus)
    if not corpus:
        raise EmptyCorpus("corpus is empty")
    seen = set()
    entries = []
    for chunk_id, text in corpus:
        if chunk_id in seen:
            raise DuplicateId(f"duplicate chunk id {chunk_id}")
        seen.add(chunk_id)
        try:
            vec = encode(text, vocab, params)
        except EmptyInput as err:
            raise EmptyInput(f"chunk {chunk_id}: {err}") from err
        entries.append(EvidenceChunk(id=chunk_id, text=text, vector=vec))
    return EvidenceIndex(entries, encoder_fingerprint=params.fingerprint())


def alignment_score(q, d) -> float:
    """Cosine similarity; degenerate (near-zero) vectors score 0."""
    qv = q.values if isinstance(q, SemanticVector) else np.asarray(q, dtype=np.float64)
    dv = d.values if isinstance(d, SemanticVector) else np.asarray(d, dtype=np.float64)
    if qv.shape != dv.shape:
        raise DimMismatch(f"dims differ: {qv.shape} vs {dv.shape}")
    qn = np.linalg.norm(qv)
    dn = np.linalg.norm(dv)
    if qn < ZERO_NORM_EPS or dn < ZERO_NORM_EPS:
        return 0.0
    return float(qv @ dv / (qn * dn))


def top_k(q, index: EvidenceIndex, k: int) -> list[RetrievalResult]:
    """Exact top-k by score, ties broken by ascending chunk id."""
    if len(index) == 0:
        raise EmptyIndex("index has no entries")
    if k < 1:
        raise ValueError("k must be >= 1")
    qv = q.values if isinstance(q, SemanticVector) else np.asarray(q, dtype=np.float64)
    if qv.shape[0] != index.dim:
        raise DimMismatch(f"query dim {qv.shape[0]} != index dim {index.dim}")
    qn = np.linalg.norm(qv)
    if qn < ZERO_NORM_EPS:
        scores = np.zeros(len(index))
    else:
        # Entry vectors are unit norm by construction, so the dot product
        # with the normalized query is the cosine.
        scores = index._matrix @ (qv / qn)
    order = np.lexsort((index._ids, -scores))[: min(k, len(index))]
    return [
        RetrievalResult(chunk_id=int(index._ids[i]), score=float(scores[i]), rank=r + 1)
        for r, i in enumerate(order)
    ]


def filter_by_threshold(results: list[RetrievalResult], tau: float) -> list[RetrievalResult]:
    """Keep results with score >= tau; order is preserved."""
    return [r for r in results if r.score >= tau]


def save_index(path, index: EvidenceIndex, vocab: Vocabulary, params: EncoderParams) -> None:
    """Self-contained index file: entries, vocabulary, and embedding table."""
    header = {
        "format_version": INDEX_FORMAT_VERSION,
        "dim": index.dim,
        "entry_count": len(index),
        "encoder_fingerprint": index.encoder_fingerprint,
        "entries": [{"id": c.id, "text": c.text} for c in index.entries],
        "vocab": {"tokens": vocab.tokens, "hash_buckets": vocab.hash_buckets},
    }
    arrays = {"vectors": index._matrix, "embedding": params.embedding}
    write_container(path, "index", header, arrays)


def load_index(path) -> tuple[EvidenceIndex, Vocabulary, EncoderParams]:
    header, arrays = read_container(path, "index")
    vocab = Vocabulary(header["vocab"]["tokens"], header["vocab"]["hash_buckets"])
    params = EncoderParams(embedding=arrays["embedding"])
    entries = [
        EvidenceChunk(
            id=meta["id"],
            text=meta["text"],
            vector=SemanticVector(arrays["vectors"][i], normalized=True),
        )
        for i, meta in enumerate(header["entries"])
    ]
    index = EvidenceIndex(entries, encoder_fingerprint=header["encoder_fingerprint"])
    return index, vocab, params
