"""Statement-guided attention over scene-text tokens and the attended text vector.

Each in-vocabulary scene token t_i gets weight
gamma_i = sum_j 1 / (1 + cosine_distance(e(t_i), e(s_j)))
over the in-vocabulary statement tokens s_j; the scene-text semantic vector
is the gamma-weighted average of the scene token embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingTable, SemVector, cosine_distance, lookup, mean_embed


@dataclass
class SceneText:
    """Ordered OCR tokens of one image; raw strings, may be empty."""

    tokens: list[str] = field(default_factory=list)


@dataclass
class AttentionWeights:
    """(token, gamma) per in-vocabulary scene token, in scene order."""

    weights: list[tuple[str, float]]


def _in_vocab(table: EmbeddingTable, tokens, stopwords=None):
    pairs = []
    for tok in tokens:
        if stopwords is not None and tok.lower() in stopwords:
            continue
        vec = lookup(table, tok)
        if vec is not None:
            pairs.append((tok, vec))
    return pairs


def attention_weights(
    scene: SceneText,
    statement_tokens: list[str],
    table: EmbeddingTable,
    stopwords=None,
) -> AttentionWeights:
    """Closed-form attention weights; OOV tokens on either side are skipped."""
    scene_pairs = _in_vocab(table, scene.tokens)
    if not scene_pairs:
        return AttentionWeights(weights=[])
    stmt_pairs = _in_vocab(table, statement_tokens, stopwords)
    if not stmt_pairs:
        return AttentionWeights(weights=[(tok, 0.0) for tok, _ in scene_pairs])

    T = np.stack([v for _, v in scene_pairs])
    S = np.stack([v for _, v in stmt_pairs])
    tn = np.linalg.norm(T, axis=1, keepdims=True)
    sn = np.linalg.norm(S, axis=1, keepdims=True)
    # zero-norm vectors get cosine 0 (distance 1), matching cosine_distance
    Tn = np.divide(T, tn, out=np.zeros_like(T), where=tn > 0)
    Sn = np.divide(S, sn, out=np.zeros_like(S), where=sn > 0)
    dist = 1.0 - Tn @ Sn.T
    gammas = (1.0 / (1.0 + dist)).sum(axis=1)
    return AttentionWeights(
        weights=[(tok, float(g)) for (tok, _), g in zip(scene_pairs, gammas)]
    )


def attended_text_embedding(
    scene: SceneText,
    statement_tokens: list[str],
    table: EmbeddingTable,
    stopwords=None,
    weights: AttentionWeights | None = None,
) -> SemVector | None:
    """Gamma-weighted average of in-vocab scene embeddings.

    Falls back to the unweighted mean when every gamma is zero (empty or
    all-OOV statement); None when no scene token is in vocabulary.
    """
    scene_pairs = _in_vocab(table, scene.tokens)
    if not scene_pairs:
        return None
    if weights is None:
        weights = attention_weights(scene, statement_tokens, table, stopwords)
    gammas = np.array([g for _, g in weights.weights], dtype=np.float64)
    V = np.stack([v for _, v in scene_pairs])
    if gammas.size != len(scene_pairs):
        raise ValueError("attention weights do not align with scene tokens")
    total = gammas.sum()
    if total <= 0.0:
        return V.mean(axis=0)
    return (gammas[:, None] * V).sum(axis=0) / total


def text_semantic_distance(
    scene: SceneText,
    statement_tokens: list[str],
    table: EmbeddingTable,
    stopwords=None,
) -> float:
    """Cosine distance between the attended scene vector and the statement mean.

    1.0 (neutral) when either side has no in-vocabulary token.
    """
    t = attended_text_embedding(scene, statement_tokens, table, stopwords)
    s = mean_embed(table, statement_tokens)
    if t is None or s is None:
        return 1.0
    return cosine_distance(t, s)
