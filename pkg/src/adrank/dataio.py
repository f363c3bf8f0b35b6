"""Dataset ingestion (JSONL), statement parsing, OCR-export adapter and
checkpoint persistence."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, FormatError, ParseError
from .lexical import TfIdfModel
from .textsem import SceneText
from .tokens import tokenize
from .vissem import Dims, ProjectionModel, TrainConfig, VisualFeatures

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1

LABELS = {1: "positive", 0: "negative", None: "unlabeled"}


def parse_action_reason(text: str) -> tuple[list[str], list[str]]:
    """Split normalized tokens at the first standalone "because".

    No "because", or an empty side after the split, yields the full token
    list for both parts.
    """
    tokens = tokenize(text)
    try:
        i = tokens.index("because")
    except ValueError:
        return tokens, tokens
    if i == 0 or i == len(tokens) - 1:
        return tokens, tokens
    return tokens[:i], tokens[i + 1 :]


@dataclass
class Statement:
    text: str
    tokens: list[str]
    action_tokens: list[str]
    reason_tokens: list[str]
    label: str = "unlabeled"

    @classmethod
    def from_text(cls, text: str, label: str = "unlabeled") -> "Statement":
        action, reason = parse_action_reason(text)
        return cls(
            text=text,
            tokens=tokenize(text),
            action_tokens=action,
            reason_tokens=reason,
            label=label,
        )


@dataclass
class ImageRecord:
    id: str
    features: VisualFeatures
    scene: SceneText
    statements: list[Statement] = field(default_factory=list)

    def positive_indices(self) -> set[int]:
        return {i for i, s in enumerate(self.statements) if s.label == "positive"}


def _require(obj, key, lineno):
    if key not in obj:
        raise ParseError(f"line {lineno}: missing field {key}")
    return obj[key]


def load_dataset(path) -> list[ImageRecord]:
    """Read JSONL image records, validating schema and feature dimensions."""
    records: list[ImageRecord] = []
    seen_ids: set[str] = set()
    d_obj = d_sym = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {lineno}: invalid JSON: {exc}") from exc
            rec_id = _require(obj, "id", lineno)
            if not isinstance(rec_id, str) or not rec_id:
                raise ParseError(f"line {lineno}: field id must be a non-empty string")
            if rec_id in seen_ids:
                raise ParseError(f"line {lineno}: duplicate id {rec_id!r}")
            seen_ids.add(rec_id)

            obj_feats = _require(obj, "object_features", lineno)
            sym_feats = _require(obj, "symbol_features", lineno)
            ocr = _require(obj, "ocr_tokens", lineno)
            stmts_raw = _require(obj, "statements", lineno)

            try:
                features = VisualFeatures(
                    object_patches=[np.asarray(p, dtype=np.float64) for p in obj_feats],
                    symbol_patches=[np.asarray(p, dtype=np.float64) for p in sym_feats],
                    object_dim=d_obj,
                    symbol_dim=d_sym,
                )
            except (DimensionError, ValueError) as exc:
                raise DimensionError(f"line {lineno}: {exc}") from exc
            if features.object_patches:
                d_obj = features.object_dim
            if features.symbol_patches:
                d_sym = features.symbol_dim

            statements = []
            for si, s in enumerate(stmts_raw):
                if "text" not in s:
                    raise ParseError(f"line {lineno}: missing field statements[{si}].text")
                label = LABELS.get(s.get("label"))
                if label is None:
                    raise ParseError(
                        f"line {lineno}: statements[{si}].label must be 0 or 1"
                    )
                statements.append(Statement.from_text(s["text"], label))

            records.append(
                ImageRecord(
                    id=rec_id,
                    features=features,
                    scene=SceneText(tokens=[str(t) for t in ocr]),
                    statements=statements,
                )
            )
    # records ingested before the channel dim was known get it backfilled
    for rec in records:
        if not rec.features.object_patches and d_obj is not None:
            rec.features.object_dim = d_obj
        if not rec.features.symbol_patches and d_sym is not None:
            rec.features.symbol_dim = d_sym
    return records


def save_dataset(records: list[ImageRecord], path) -> None:
    """Write records in the JSONL schema consumed by load_dataset."""
    label_codes = {"positive": 1, "negative": 0}
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "id": rec.id,
                "object_features": [[float(x) for x in p] for p in rec.features.object_patches],
                "symbol_features": [[float(x) for x in p] for p in rec.features.symbol_patches],
                "ocr_tokens": list(rec.scene.tokens),
                "statements": [
                    {"text": s.text, "label": label_codes.get(s.label)}
                    for s in rec.statements
                ],
            }
            fh.write(json.dumps(obj) + "\n")


def parse_ocr_export(path) -> SceneText:
    """Adapt a word-level OCR export (Vision-API style JSON) to SceneText.

    The first annotation (full text) is skipped; each remaining element
    contributes its description as one raw token. A missing annotation
    array yields an empty SceneText with a logged warning.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    ann = None
    if isinstance(doc, dict):
        ann = doc.get("textAnnotations")
        if ann is None and isinstance(doc.get("responses"), list) and doc["responses"]:
            ann = doc["responses"][0].get("textAnnotations")
    elif isinstance(doc, list):
        ann = doc
    if not ann:
        log.warning("%s: no text annotations found; empty scene text", path)
        return SceneText(tokens=[])
    tokens = [str(el["description"]) for el in ann[1:] if "description" in el]
    return SceneText(tokens=tokens)


def _matrix_to_lists(m):
    return None if m is None else [[float(x) for x in row] for row in m]


def save_model(model: ProjectionModel, tfidf: TfIdfModel, path) -> None:
    """Persist model + tf-idf statistics as a versioned JSON checkpoint.

    json round-trips Python floats exactly, so matrices reload bit-identical.
    """
    doc = {
        "version": CHECKPOINT_VERSION,
        "mode": model.mode,
        "dims": {
            "d_obj": model.dims.d_obj,
            "d_sym": model.dims.d_sym,
            "d_w": model.dims.d_w,
            "d_emb": model.dims.d_emb,
        },
        "beta": model.beta,
        "config": {
            "mode": model.config.mode,
            "d_emb": model.config.d_emb,
            "beta": model.config.beta,
            "lr": model.config.lr,
            "epochs": model.config.epochs,
            "batch_size": model.config.batch_size,
            "seed": model.config.seed,
        },
        "matrices": {
            name: _matrix_to_lists(getattr(model, name))
            for name in ("W_v", "W_c", "W_a", "W_r")
        },
        "tfidf": {"num_docs": tfidf.num_docs, "doc_freq": tfidf.doc_freq},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path) -> tuple[ProjectionModel, TfIdfModel]:
    """Load a checkpoint written by save_model."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: corrupted checkpoint: {exc}") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise FormatError(f"{path}: not a checkpoint file")
    if doc["version"] != CHECKPOINT_VERSION:
        raise FormatError(
            f"{path}: unsupported checkpoint version {doc['version']!r} "
            f"(expected {CHECKPOINT_VERSION})"
        )
    try:
        dims = Dims(**doc["dims"])
        config = TrainConfig(**doc["config"])
        model = ProjectionModel(
            mode=doc["mode"], dims=dims, beta=doc["beta"], config=config
        )
        for name in ("W_v", "W_c", "W_a", "W_r"):
            m = doc["matrices"].get(name)
            if m is not None:
                setattr(model, name, np.array(m, dtype=np.float64))
        tfidf = TfIdfModel(
            num_docs=doc["tfidf"]["num_docs"],
            doc_freq={k: int(v) for k, v in doc["tfidf"]["doc_freq"].items()},
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: malformed checkpoint: {exc}") from exc
    return model, tfidf
