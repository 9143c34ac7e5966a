import numpy as np
import pytest

from alignrag.encoder import SemanticVector, encode
from alignrag.errors import (
    CheckpointError,
    DimMismatch,
    DuplicateId,
    EmptyCorpus,
    EmptyInput,
)
from alignrag.index import (
    EvidenceChunk,
    EvidenceIndex,
    RetrievalResult,
    alignment_score,
    build_index,
    filter_by_threshold,
    load_index,
    save_index,
    top_k,
)

CORPUS = [
    (0, "alpha bravo"),
    (1, "charlie delta"),
    (2, "alpha charlie echo"),
    (3, "bravo bravo delta"),
    (4, "echo alpha"),
]


@pytest.fixture
def index(tiny_vocab, tiny_encoder):
    return build_index(CORPUS, tiny_vocab, tiny_encoder)


def random_index(rng, n, dim):
    vecs = rng.normal(size=(n, dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    entries = [
        EvidenceChunk(id=i, text=f"chunk {i}", vector=SemanticVector(vecs[i], normalized=True))
        for i in range(n)
    ]
    return EvidenceIndex(entries, encoder_fingerprint="test"), vecs


class TestBuild:
    def test_entries_sorted_by_id(self, tiny_vocab, tiny_encoder):
        idx = build_index(list(reversed(CORPUS)), tiny_vocab, tiny_encoder)
        assert [c.id for c in idx.entries] == [0, 1, 2, 3, 4]

    def test_duplicate_id_rejected(self, tiny_vocab, tiny_encoder):
        with pytest.raises(DuplicateId):
            build_index([(1, "alpha"), (1, "bravo")], tiny_vocab, tiny_encoder)

    def test_empty_corpus_rejected(self, tiny_vocab, tiny_encoder):
        with pytest.raises(EmptyCorpus):
            build_index([], tiny_vocab, tiny_encoder)

    def test_empty_chunk_text_names_offender(self, tiny_vocab, tiny_encoder):
        with pytest.raises(EmptyInput, match="chunk 7"):
            build_index([(7, "...")], tiny_vocab, tiny_encoder)

    def test_contains_and_chunk_lookup(self, index):
        assert 3 in index
        assert 99 not in index
        assert index.chunk(3).text == "bravo bravo delta"


class TestAlignmentScore:
    def test_matches_cosine(self, rng):
        a, b = rng.normal(size=4), rng.normal(size=4)
        expected = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
        assert abs(alignment_score(a, b) - expected) < 1e-12

    def test_zero_vector_scores_zero(self):
        assert alignment_score(np.zeros(3), np.ones(3)) == 0.0

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            alignment_score(np.ones(3), np.ones(4))


class TestTopK:
    def test_matches_brute_force_oracle(self, rng):
        idx, vecs = random_index(rng, 50, 8)
        for _ in range(20):
            q = rng.normal(size=8)
            q /= np.linalg.norm(q)
            scores = vecs @ q
            for k in (1, 3, 10):
                oracle = sorted(range(50), key=lambda i: (-scores[i], i))[:k]
                got = top_k(q, idx, k)
                assert [r.chunk_id for r in got] == oracle
                np.testing.assert_allclose(
                    [r.score for r in got], scores[oracle], atol=1e-12
                )
                assert [r.rank for r in got] == list(range(1, k + 1))

    def test_ties_broken_by_ascending_id(self):
        v = np.array([1.0, 0.0])
        entries = [
            EvidenceChunk(id=i, text=f"c{i}", vector=SemanticVector(v, normalized=True))
            for i in (5, 2, 9)
        ]
        idx = EvidenceIndex(entries, encoder_fingerprint="test")
        assert [r.chunk_id for r in top_k(v, idx, 3)] == [2, 5, 9]

    def test_k_larger_than_corpus_truncates(self, rng):
        idx, _ = random_index(rng, 4, 3)
        assert len(top_k(np.ones(3), idx, 100)) == 4

    def test_k_must_be_positive(self, rng):
        idx, _ = random_index(rng, 4, 3)
        with pytest.raises(ValueError):
            top_k(np.ones(3), idx, 0)

    def test_query_dim_checked(self, rng):
        idx, _ = random_index(rng, 4, 3)
        with pytest.raises(DimMismatch):
            top_k(np.ones(5), idx, 1)

    def test_semantic_vector_query(self, index, tiny_vocab, tiny_encoder):
        q = encode("alpha bravo", tiny_vocab, tiny_encoder)
        results = top_k(q, index, 1)
        assert results[0].chunk_id == 0
        assert results[0].score == pytest.approx(1.0)


class TestThreshold:
    def test_keeps_scores_at_or_above_tau(self, rng):
        idx, _ = random_index(rng, 20, 4)
        q = rng.normal(size=4)
        results = top_k(q, idx, 20)
        kept = filter_by_threshold(results, 0.1)
        assert all(r.score >= 0.1 for r in kept)
        assert kept == [r for r in results if r.score >= 0.1]

    def test_boundary_inclusive(self):
        r = [RetrievalResult(chunk_id=0, score=0.5, rank=1)]
        assert filter_by_threshold(r, 0.5) == r

    def test_can_empty_out(self, rng):
        idx, _ = random_index(rng, 5, 4)
        assert filter_by_threshold(top_k(np.ones(4), idx, 5), 2.0) == []


class TestPersistence:
    def test_round_trip(self, tmp_path, index, tiny_vocab, tiny_encoder):
        path = tmp_path / "idx.bin"
        save_index(path, index, tiny_vocab, tiny_encoder)
        loaded, vocab2, params2 = load_index(path)
        assert [c.id for c in loaded.entries] == [c.id for c in index.entries]
        assert [c.text for c in loaded.entries] == [c.text for c in index.entries]
        np.testing.assert_array_equal(loaded._matrix, index._matrix)
        np.testing.assert_array_equal(params2.embedding, tiny_encoder.embedding)
        assert vocab2.tokens == tiny_vocab.tokens
        assert loaded.encoder_fingerprint == index.encoder_fingerprint
        # Retrieval behaves identically after the round trip.
        q = encode("alpha charlie", tiny_vocab, tiny_encoder)
        assert [r.chunk_id for r in top_k(q, loaded, 3)] == [
            r.chunk_id for r in top_k(q, index, 3)
        ]

    def test_resave_is_byte_identical(self, tmp_path, index, tiny_vocab, tiny_encoder):
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        save_index(p1, index, tiny_vocab, tiny_encoder)
        loaded, vocab2, params2 = load_index(p1)
        save_index(p2, loaded, vocab2, params2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_wrong_kind_rejected(self, tmp_path, index, tiny_vocab, tiny_encoder):
        from alignrag.serialization import read_container

        path = tmp_path / "idx.bin"
        save_index(path, index, tiny_vocab, tiny_encoder)
        with pytest.raises(CheckpointError):
            read_container(path, "checkpoint")
