from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alignrag.errors import EmptyCorpus, LengthMismatch
from alignrag.metrics import (
    bleu,
    exact_match,
    lcs_length,
    normalize_answer,
    normalize_text,
    rouge_l,
    score_corpus,
    token_f1,
)


class TestNormalization:
    def test_normalize_text_keeps_articles(self):
        assert normalize_text("The  Cat, sat!") == "the cat sat"

    def test_normalize_answer_drops_articles(self):
        assert normalize_answer("The  Cat, sat!") == "cat sat"

    def test_underscore_and_hyphen_become_spaces(self):
        assert normalize_text("a_b c-d") == "a b c d"


class TestOracleTable:
    def test_exact_match_cases(self, metric_cases):
        cases = metric_cases["em"]
        assert len(cases) >= 10
        for case in cases:
            assert exact_match(case["pred"], case["gold"]) == case["expected"], case

    def test_f1_cases(self, metric_cases):
        cases = metric_cases["f1"]
        assert len(cases) >= 10
        for case in cases:
            got = token_f1(case["pred"], case["gold"])
            assert got == pytest.approx(case["expected"], abs=1e-5), case

    def test_rouge_l_cases(self, metric_cases):
        cases = metric_cases["rouge_l"]
        assert len(cases) >= 10
        for case in cases:
            got = rouge_l(case["pred"], case["gold"])
            assert got == pytest.approx(case["expected"], abs=1e-5), case

    def test_bleu_cases(self, metric_cases):
        cases = metric_cases["bleu"]
        assert len(cases) >= 10
        for case in cases:
            got = bleu(case["preds"], case["refs"])
            assert got == pytest.approx(case["expected"], abs=1e-5), case


def lcs_recursive(a, b):
    """Independent oracle: memoized recursive definition of LCS length."""

    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == 0 or j == 0:
            return 0
        if a[i - 1] == b[j - 1]:
            return rec(i - 1, j - 1) + 1
        return max(rec(i - 1, j), rec(i, j - 1))

    return rec(len(a), len(b))


class TestLcs:
    def test_against_recursive_oracle(self, rng):
        alphabet = list("abcde")
        for _ in range(500):
            la, lb = int(rng.integers(0, 21)), int(rng.integers(0, 21))
            a = tuple(rng.choice(alphabet, size=la))
            b = tuple(rng.choice(alphabet, size=lb))
            assert lcs_length(list(a), list(b)) == lcs_recursive(a, b)

    def test_known_values(self):
        assert lcs_length(list("abcbdab"), list("bdcaba")) == 4
        assert lcs_length([], list("ab")) == 0


words = st.lists(st.sampled_from(["cat", "dog", "sat", "ran", "big"]), max_size=6)


class TestProperties:
    @given(p=words, g=words)
    @settings(max_examples=200)
    def test_ranges_and_em_le_f1(self, p, g):
        pred, gold = " ".join(p), " ".join(g)
        em = exact_match(pred, gold)
        f1 = token_f1(pred, gold)
        rl = rouge_l(pred, gold)
        assert em in (0, 1)
        assert 0.0 <= f1 <= 1.0
        assert 0.0 <= rl <= 1.0
        assert em <= f1 + 1e-12
        assert f1 >= rl - 1e-12  # LCS overlap can't beat multiset overlap

    @given(p=words, g=words)
    @settings(max_examples=100)
    def test_em_and_f1_symmetry(self, p, g):
        pred, gold = " ".join(p), " ".join(g)
        assert exact_match(pred, gold) == exact_match(gold, pred)
        assert token_f1(pred, gold) == pytest.approx(token_f1(gold, pred))

    @given(p=st.lists(st.sampled_from(["cat", "dog", "sat", "ran"]), min_size=4, max_size=8))
    @settings(max_examples=100)
    def test_bleu_identity(self, p):
        text = " ".join(p)
        assert bleu([text], [text]) == pytest.approx(1.0)


class TestScoreCorpus:
    def test_means_on_0_100_scale(self):
        preds = ["cat", "dog"]
        golds = ["cat", "cat"]
        report = score_corpus(preds, golds)
        assert report.em == pytest.approx(50.0)
        assert report.f1 == pytest.approx(50.0)
        assert report.rouge_l == pytest.approx(50.0)
        expected_bleu = 100 * (bleu(["cat"], ["cat"]) + bleu(["dog"], ["cat"])) / 2
        assert report.bleu == pytest.approx(expected_bleu)
        assert report.n_samples == 2
        assert set(report.as_dict()) == {"em", "f1", "bleu", "rouge_l", "n_samples"}

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            score_corpus(["a"], ["a", "b"])
        with pytest.raises(LengthMismatch):
            bleu(["a"], ["a", "b"])

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            score_corpus([], [])
        with pytest.raises(EmptyCorpus):
            bleu([], [])
