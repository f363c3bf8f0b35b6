"""Final statement scoring: weighted combination of visual-semantic,
scene-text-semantic and lexical distances, plus ranking and alpha tuning."""

from __future__ import annotations

from dataclasses import dataclass

from .dataio import ImageRecord, Statement
from .embeddings import EmbeddingTable, cosine_distance, mean_embed, unit
from .errors import ConfigError
from .lexical import TfIdfModel, lexical_distance
from .textsem import attended_text_embedding, text_semantic_distance
from .tokens import normalize_token
from .vissem import PARTITIONED_MODES, ProjectionModel, aggregate_patches, embed_image

NEUTRAL = 1.0  # distance charged for an unavailable component


@dataclass
class RankingWeights:
    alpha1: float = 0.7
    alpha2: float = 0.3
    alpha3: float = 1.5
    alpha1a: float = 0.5
    alpha1r: float = 0.5


@dataclass
class RankedList:
    """(statement index, score) pairs in ascending score, ties by index."""

    entries: list[tuple[int, float]]

    @property
    def top(self) -> int:
        return self.entries[0][0]


def _statement_unit(table, tokens):
    m = mean_embed(table, tokens)
    return unit(m) if m is not None else None


def _visual_distance(z, s_hat):
    if s_hat is None:
        return NEUTRAL
    return cosine_distance(z, s_hat)


def _scene_norm_tokens(image: ImageRecord) -> list[str]:
    return [t for tok in image.scene.tokens if (t := normalize_token(tok))]


def score_statement(
    image: ImageRecord,
    statement: Statement,
    model: ProjectionModel,
    tfidf: TfIdfModel,
    table: EmbeddingTable,
    w: RankingWeights,
) -> float:
    """alpha1 * d(z, s) + alpha2 * d(t, s) + alpha3 * d_lexical."""
    if model.mode in PARTITIONED_MODES:
        raise ConfigError("score_statement requires a non-partitioned model")
    v = aggregate_patches(image.features)
    t = None
    if model.mode == "fused":
        t = attended_text_embedding(image.scene, statement.tokens, table)
    z = embed_image(model, v, t)
    d_vis = _visual_distance(z, _statement_unit(table, statement.tokens))
    d_txt = text_semantic_distance(image.scene, statement.tokens, table)
    d_lex = lexical_distance(tfidf, _scene_norm_tokens(image), statement.tokens)
    return w.alpha1 * d_vis + w.alpha2 * d_txt + w.alpha3 * d_lex


def score_statement_partitioned(
    image: ImageRecord,
    statement: Statement,
    model: ProjectionModel,
    tfidf: TfIdfModel,
    table: EmbeddingTable,
    w: RankingWeights,
    whole_statement: bool = False,
) -> float:
    """Partitioned heads scored against action/reason parts (Eq. with two
    visual terms); whole_statement=True compares both heads to the full text."""
    if model.mode not in PARTITIONED_MODES:
        raise ConfigError("score_statement_partitioned requires a partitioned model")
    v = aggregate_patches(image.features)
    t = None
    if model.mode == "partitioned_fused":
        t = attended_text_embedding(image.scene, statement.tokens, table)
    z_a, z_r = embed_image(model, v, t)
    if whole_statement:
        s_a = s_r = _statement_unit(table, statement.tokens)
    else:
        s_a = _statement_unit(table, statement.action_tokens)
        s_r = _statement_unit(table, statement.reason_tokens)
        whole = _statement_unit(table, statement.tokens)
        s_a = s_a if s_a is not None else whole
        s_r = s_r if s_r is not None else whole
    d_txt = text_semantic_distance(image.scene, statement.tokens, table)
    d_lex = lexical_distance(tfidf, _scene_norm_tokens(image), statement.tokens)
    return (
        w.alpha1a * _visual_distance(z_a, s_a)
        + w.alpha1r * _visual_distance(z_r, s_r)
        + w.alpha2 * d_txt
        + w.alpha3 * d_lex
    )


def rank(
    image: ImageRecord,
    statements: list[Statement],
    model: ProjectionModel,
    tfidf: TfIdfModel,
    table: EmbeddingTable,
    w: RankingWeights | None = None,
    whole_statement: bool = False,
) -> RankedList:
    """Score every candidate and sort ascending (stable in input order)."""
    if not statements:
        raise ConfigError("no candidate statements to rank")
    if w is None:
        w = RankingWeights()
    if model.mode in PARTITIONED_MODES:
        scores = [
            score_statement_partitioned(image, s, model, tfidf, table, w, whole_statement)
            for s in statements
        ]
    else:
        scores = [score_statement(image, s, model, tfidf, table, w) for s in statements]
    order = sorted(range(len(scores)), key=lambda j: scores[j])
    return RankedList(entries=[(j, scores[j]) for j in order])


def rank_image(image, model, tfidf, table, w=None, whole_statement=False) -> RankedList:
    """Rank an image's own candidate statements."""
    return rank(image, image.statements, model, tfidf, table, w, whole_statement)


def tune_alphas(
    validation: list[ImageRecord],
    grid: list[RankingWeights],
    model: ProjectionModel,
    tfidf: TfIdfModel,
    table: EmbeddingTable,
    whole_statement: bool = False,
) -> RankingWeights:
    """Grid point maximizing top-1 accuracy; ties keep the earliest index."""
    if not grid:
        raise ConfigError("empty alpha grid")
    if not validation:
        raise ConfigError("empty validation set")
    best_w = None
    best_acc = -1.0
    for w in grid:
        correct = 0
        total = 0
        for image in validation:
            positives = image.positive_indices()
            if not positives:
                continue
            top = rank_image(image, model, tfidf, table, w, whole_statement).top
            total += 1
            correct += top in positives
        if total == 0:
            raise ConfigError("validation set has no image with positive statements")
        acc = correct / total
        if acc > best_acc:
            best_acc = acc
            best_w = w
    return best_w


def default_grid(step: float = 0.1, max_alpha: float = 1.5, limit: int = 4096):
    """Coarse alpha grid, thinned to at most `limit` points."""
    import itertools

    values = [round(i * step, 10) for i in range(int(max_alpha / step) + 1)]
    points = [
        RankingWeights(alpha1=a1, alpha2=a2, alpha3=a3)
        for a1, a2, a3 in itertools.product(values, repeat=3)
    ]
    if len(points) > limit:
        stride = -(-len(points) // limit)
        points = points[::stride]
    return points
