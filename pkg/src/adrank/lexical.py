"""Tf-idf vectors and the lexical distance between raw scene text and statements.

Weighting: raw term frequency times smoothed idf = ln((1+N)/(1+df)) + 1, so
terms never seen in the corpus still get a finite weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .tokens import normalize_token


@dataclass
class TfIdfModel:
    """Document frequencies fitted on a corpus; immutable after fit."""

    num_docs: int
    doc_freq: dict[str, int] = field(default_factory=dict)

    @property
    def vocabulary(self) -> set[str]:
        return set(self.doc_freq)

    def idf(self, term: str) -> float:
        df = self.doc_freq.get(term, 0)
        return math.log((1 + self.num_docs) / (1 + df)) + 1.0


SparseVec = dict[str, float]


def _normalize(tokens) -> list[str]:
    out = []
    for tok in tokens:
        norm = normalize_token(tok)
        if norm:
            out.append(norm)
    return out


def fit_tfidf(documents: list[list[str]]) -> TfIdfModel:
    """Count document frequencies over normalized tokens."""
    if not documents:
        raise ConfigError("empty tf-idf corpus")
    df: dict[str, int] = {}
    for doc in documents:
        for term in set(_normalize(doc)):
            df[term] = df.get(term, 0) + 1
    return TfIdfModel(num_docs=len(documents), doc_freq=df)


def tfidf_vector(model: TfIdfModel, tokens: list[str]) -> SparseVec:
    """Sparse tf-idf vector of a token list; {} for an empty list."""
    tf: dict[str, int] = {}
    for term in _normalize(tokens):
        tf[term] = tf.get(term, 0) + 1
    return {term: count * model.idf(term) for term, count in tf.items()}


def _sparse_cosine_distance(a: SparseVec, b: SparseVec) -> float:
    na = math.sqrt(sum(w * w for w in a.values()))
    nb = math.sqrt(sum(w * w for w in b.values()))
    if na == 0.0 or nb == 0.0:
        return 1.0
    common = sorted(a.keys() & b.keys())  # fixed order keeps the distance symmetric
    dot = sum(a[t] * b[t] for t in common)
    return 1.0 - dot / (na * nb)


def lexical_distance(
    model: TfIdfModel, scene_tokens: list[str], statement_tokens: list[str]
) -> float:
    """Cosine distance between the two tf-idf vectors; 1.0 when either is empty."""
    return _sparse_cosine_distance(
        tfidf_vector(model, scene_tokens), tfidf_vector(model, statement_tokens)
    )
