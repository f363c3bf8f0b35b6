"""Deterministic synthetic dataset generator with known ground truth.

Topic construction: each topic k has a unit direction u_k in embedding
space (orthonormal when num_topics <= D_w). Topic vocabulary words embed as
u_k plus Gaussian noise; visual patches are fixed random linear images of
u_k plus the same noise level; statements are templated
"i should <verb> ... because ..." from topic vocabulary. The function words
(i/should/because) are deliberately out of vocabulary so that, at zero
noise, positive statements embed exactly onto their topic direction.

With independent_parts=True each image carries an (action topic, reason
topic) pair: the object channel and the action part encode the first, the
symbol channel and the reason part the second.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .dataio import ImageRecord, Statement, save_dataset
from .embeddings import EmbeddingTable, save_embeddings
from .errors import ConfigError
from .textsem import SceneText
from .vissem import VisualFeatures

FUNCTION_WORDS = ("i", "should", "because")


@dataclass
class SynthConfig:
    num_images: int = 200
    num_topics: int = 5
    d_w: int = 16
    d_obj: int = 12
    d_sym: int = 8
    statements_per_image: int = 15
    positives_per_image: int = 3
    noise_sigma: float = 0.0
    ocr_dropout: float = 0.0
    seed: int = 0
    words_per_topic: int = 8
    verbs_per_topic: int = 3
    scene_tokens_per_image: int = 4
    patches_per_channel: int = 2
    independent_parts: bool = False


@dataclass
class GroundTruth:
    topic_vectors: np.ndarray  # (num_topics, d_w)
    B_obj: np.ndarray  # (d_obj, d_w)
    B_sym: np.ndarray  # (d_sym, d_w)
    image_topics: dict[str, tuple[int, int]]  # id -> (action topic, reason topic)
    statement_topics: dict[str, list[tuple[int, int]]]  # id -> per-statement topics
    permutations: dict[str, list[int]]  # id -> statement shuffle applied


@dataclass
class SynthResult:
    records: list[ImageRecord]
    table: EmbeddingTable
    gold: dict[str, set[int]]
    ground_truth: GroundTruth


def _topic_vectors(rng, num_topics, d_w):
    if num_topics <= d_w:
        m = rng.normal(size=(d_w, num_topics))
        q, _ = np.linalg.qr(m)
        return q.T[:num_topics].copy()
    vs = rng.normal(size=(num_topics, d_w))
    return vs / np.linalg.norm(vs, axis=1, keepdims=True)


def generate(config: SynthConfig) -> SynthResult:
    """Build the dataset, embedding table, gold labels and generator latents."""
    if config.positives_per_image >= config.statements_per_image:
        raise ConfigError("positives_per_image must be < statements_per_image")
    if config.d_w < 2 or config.d_obj < 2 or config.d_sym < 2:
        raise ConfigError("dims must be >= 2")
    if config.num_topics < 1:
        raise ConfigError("need at least one topic")
    if config.num_topics < 2 and config.positives_per_image < config.statements_per_image:
        pass  # single-topic sets are allowed: negatives reuse the topic

    rng = np.random.default_rng(config.seed)
    K = config.num_topics
    U = _topic_vectors(rng, K, config.d_w)

    words = {k: [f"w{k}x{i}" for i in range(config.words_per_topic)] for k in range(K)}
    verbs = {k: [f"v{k}x{i}" for i in range(config.verbs_per_topic)] for k in range(K)}

    entries: dict[str, np.ndarray] = {}
    for k in range(K):
        for tok in words[k] + verbs[k]:
            entries[tok] = U[k] + config.noise_sigma * rng.normal(size=config.d_w)
    table = EmbeddingTable(dim=config.d_w, entries=entries)

    B_obj = rng.normal(size=(config.d_obj, config.d_w)) / np.sqrt(config.d_w)
    B_sym = rng.normal(size=(config.d_sym, config.d_w)) / np.sqrt(config.d_w)

    def pick(seq):
        return seq[rng.integers(len(seq))]

    def statement_text(k_act, k_rea):
        verb = pick(verbs[k_act])
        obj_word = pick(words[k_act])
        r1, r2 = pick(words[k_rea]), pick(words[k_rea])
        return f"i should {verb} {obj_word} because {r1} {r2}"

    def other_pair(k_act, k_rea):
        while True:
            if config.independent_parts:
                ka, kr = rng.integers(K), rng.integers(K)
            else:
                ka = kr = rng.integers(K)
            if (ka, kr) != (k_act, k_rea):
                return int(ka), int(kr)

    records = []
    gold: dict[str, set[int]] = {}
    image_topics = {}
    statement_topics = {}
    permutations = {}

    for n in range(config.num_images):
        k_act = int(rng.integers(K))
        k_rea = int(rng.integers(K)) if config.independent_parts else k_act
        image_id = f"img{n:04d}"
        image_topics[image_id] = (k_act, k_rea)

        stmts: list[tuple[Statement, tuple[int, int], bool]] = []
        for _ in range(config.positives_per_image):
            stmts.append(
                (
                    Statement.from_text(statement_text(k_act, k_rea), "positive"),
                    (k_act, k_rea),
                    True,
                )
            )
        if K > 1:
            for _ in range(config.statements_per_image - config.positives_per_image):
                ka, kr = other_pair(k_act, k_rea)
                stmts.append(
                    (Statement.from_text(statement_text(ka, kr), "negative"), (ka, kr), False)
                )
        else:
            # degenerate single-topic setup: negatives share the topic
            for _ in range(config.statements_per_image - config.positives_per_image):
                stmts.append(
                    (Statement.from_text(statement_text(0, 0), "negative"), (0, 0), False)
                )

        perm = list(rng.permutation(len(stmts)))
        shuffled = [stmts[i] for i in perm]
        permutations[image_id] = [int(i) for i in perm]
        statement_topics[image_id] = [topics for _, topics, _ in shuffled]
        gold[image_id] = {i for i, (_, _, pos) in enumerate(shuffled) if pos}

        scene_pool = words[k_act] + verbs[k_act]
        if config.independent_parts:
            scene_pool = scene_pool + words[k_rea]
        scene_tokens = []
        for _ in range(config.scene_tokens_per_image):
            tok = pick(scene_pool)
            if rng.random() >= config.ocr_dropout:
                scene_tokens.append(tok)

        obj_patches = [
            B_obj @ U[k_act] + config.noise_sigma * rng.normal(size=config.d_obj)
            for _ in range(config.patches_per_channel)
        ]
        sym_patches = [
            B_sym @ U[k_rea] + config.noise_sigma * rng.normal(size=config.d_sym)
            for _ in range(config.patches_per_channel)
        ]

        records.append(
            ImageRecord(
                id=image_id,
                features=VisualFeatures(object_patches=obj_patches, symbol_patches=sym_patches),
                scene=SceneText(tokens=scene_tokens),
                statements=[s for s, _, _ in shuffled],
            )
        )

    truth = GroundTruth(
        topic_vectors=U,
        B_obj=B_obj,
        B_sym=B_sym,
        image_topics=image_topics,
        statement_topics=statement_topics,
        permutations=permutations,
    )
    return SynthResult(records=records, table=table, gold=gold, ground_truth=truth)


def oracle_best_match(result: SynthResult, image_id: str) -> set[int]:
    """Indices of statements sharing the image's generating topic pair."""
    truth = result.ground_truth
    if image_id not in truth.image_topics:
        raise ConfigError(f"unknown image id {image_id!r}")
    target = truth.image_topics[image_id]
    return {
        i for i, topics in enumerate(truth.statement_topics[image_id]) if topics == target
    }


def write_outputs(result: SynthResult, outdir) -> None:
    """Write dataset.jsonl, embeddings.txt and gold.json into outdir."""
    os.makedirs(outdir, exist_ok=True)
    save_dataset(result.records, os.path.join(outdir, "dataset.jsonl"))
    save_embeddings(result.table, os.path.join(outdir, "embeddings.txt"))
    gold = {k: sorted(v) for k, v in result.gold.items()}
    with open(os.path.join(outdir, "gold.json"), "w", encoding="utf-8") as fh:
        json.dump(gold, fh, indent=0, sort_keys=True)
        fh.write("\n")
