import math

import numpy as np
import pytest

from adrank.errors import ConfigError
from adrank.lexical import fit_tfidf, lexical_distance, tfidf_vector


def dense_oracle_distance(corpus, a_tokens, b_tokens):
    """Brute-force tf-idf cosine over the full corpus vocabulary, dense vectors."""
    N = len(corpus)
    vocab = sorted({t for doc in corpus for t in doc} | set(a_tokens) | set(b_tokens))
    df = {t: sum(t in set(doc) for doc in corpus) for t in vocab}

    def vec(tokens):
        v = np.zeros(len(vocab))
        for i, t in enumerate(vocab):
            tf = tokens.count(t)
            v[i] = tf * (math.log((1 + N) / (1 + df[t])) + 1.0)
        return v

    va, vb = vec(a_tokens), vec(b_tokens)
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0 or nb == 0:
        return 1.0
    return 1.0 - float(va @ vb) / (na * nb)


DOCS = [["cat"], ["cat", "dog"], ["dog", "dog", "car"]]


class TestFit:
    def test_counts(self):
        m = fit_tfidf(DOCS)
        assert m.num_docs == 3
        assert m.doc_freq == {"cat": 2, "dog": 2, "car": 1}

    def test_singleton(self):
        m = fit_tfidf([["a"]])
        assert m.num_docs == 1 and m.doc_freq == {"a": 1}

    def test_empty_corpus(self):
        with pytest.raises(ConfigError):
            fit_tfidf([])

    def test_normalization(self):
        m = fit_tfidf([["Cat!", "cat"]])
        assert m.doc_freq == {"cat": 1}


class TestVector:
    def test_smoothed_idf(self):
        m = fit_tfidf(DOCS)
        v = tfidf_vector(m, ["cat"])
        assert v["cat"] == pytest.approx(math.log(4 / 3) + 1, abs=1e-12)
        assert v["cat"] == pytest.approx(1.2877, abs=1e-4)

    def test_tf_scales(self):
        m = fit_tfidf(DOCS)
        v = tfidf_vector(m, ["dog", "dog"])
        assert v["dog"] == pytest.approx(2 * (math.log(4 / 3) + 1), abs=1e-12)

    def test_empty(self):
        assert tfidf_vector(fit_tfidf(DOCS), []) == {}

    def test_unseen_term_finite(self):
        v = tfidf_vector(fit_tfidf(DOCS), ["mcchicken"])
        assert v["mcchicken"] == pytest.approx(math.log(4) + 1, abs=1e-12)


class TestDistance:
    def test_identical(self):
        m = fit_tfidf(DOCS)
        assert lexical_distance(m, ["cat"], ["cat"]) == pytest.approx(0.0, abs=1e-12)

    def test_disjoint(self):
        m = fit_tfidf(DOCS)
        assert lexical_distance(m, ["cat"], ["dog"]) == 1.0

    def test_hand_cosine(self):
        m = fit_tfidf(DOCS)
        d = lexical_distance(m, ["cat", "dog"], ["cat"])
        assert d == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-12)

    def test_empty_side_neutral(self):
        m = fit_tfidf(DOCS)
        assert lexical_distance(m, [], ["cat"]) == 1.0

    def test_symmetry_and_bounds(self):
        rng = np.random.default_rng(0)
        m = fit_tfidf(DOCS)
        vocab = ["cat", "dog", "car", "x", "y"]
        for _ in range(200):
            a = list(rng.choice(vocab, size=rng.integers(0, 8)))
            b = list(rng.choice(vocab, size=rng.integers(0, 8)))
            d1 = lexical_distance(m, a, b)
            assert d1 == lexical_distance(m, b, a)
            assert -1e-12 <= d1 <= 1 + 1e-12

    def test_scaling_free(self):
        m = fit_tfidf(DOCS)
        rng = np.random.default_rng(1)
        vocab = ["cat", "dog", "car"]
        for _ in range(200):
            a = list(rng.choice(vocab, size=rng.integers(1, 5)))
            b = list(rng.choice(vocab, size=rng.integers(1, 5)))
            assert lexical_distance(m, a * 3, b * 2) == pytest.approx(
                lexical_distance(m, a, b), abs=1e-12
            )

    def test_against_dense_oracle(self):
        rng = np.random.default_rng(99)
        for trial in range(50):
            vocab = [f"t{i}" for i in range(rng.integers(3, 30))]
            corpus = [
                list(rng.choice(vocab, size=rng.integers(1, 21)))
                for _ in range(rng.integers(1, 101))
            ]
            m = fit_tfidf(corpus)
            a = list(rng.choice(vocab, size=rng.integers(0, 20)))
            b = list(rng.choice(vocab, size=rng.integers(0, 20)))
            assert lexical_distance(m, a, b) == pytest.approx(
                dense_oracle_distance(corpus, a, b), abs=1e-9
            )
