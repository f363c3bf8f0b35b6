"""Command-line interface: train / rank / eval / attn / synth."""

from __future__ import annotations

import argparse
import json
import sys

from . import dataio, evaluator, ranker, synth
from .embeddings import load_embeddings
from .errors import AdrankError
from .lexical import fit_tfidf
from .textsem import attention_weights
from .tokens import tokenize
from .vissem import TrainConfig, train

MODE_FLAGS = {
    "plain": "plain",
    "fused": "fused",
    "partitioned": "partitioned",
    "partitioned-fused": "partitioned_fused",
}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adrank", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train projection model and write a checkpoint")
    t.add_argument("--data", required=True, help="dataset JSONL")
    t.add_argument("--embeddings", required=True, help="word embedding text file")
    t.add_argument("--out", required=True, help="checkpoint output path")
    t.add_argument("--mode", choices=sorted(MODE_FLAGS), default="plain")
    t.add_argument("--d-emb", type=int, default=None,
                   help="projection output dim; defaults to the word-embedding dim")
    t.add_argument("--margin", type=float, default=0.2, help="triplet margin beta")
    t.add_argument("--lr", type=float, default=0.01)
    t.add_argument("--epochs", type=int, default=50)
    t.add_argument("--batch", type=int, default=16)
    t.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("rank", help="rank candidate statements per image")
    r.add_argument("--data", required=True)
    r.add_argument("--model", required=True, help="checkpoint from `train`")
    r.add_argument("--embeddings", required=True)
    r.add_argument("--out", help="output JSONL (default: stdout)")
    r.add_argument("--alpha1", type=float)
    r.add_argument("--alpha2", type=float)
    r.add_argument("--alpha3", type=float)
    r.add_argument("--alpha1a", type=float)
    r.add_argument("--alpha1r", type=float)
    r.add_argument(
        "--whole-statement",
        action="store_true",
        help="compare partitioned heads against the whole statement",
    )

    e = sub.add_parser("eval", help="top-1 accuracy (and agreement with --compare)")
    e.add_argument("--data", required=True, help="dataset JSONL carrying gold labels")
    e.add_argument("--rankings", help="rankings JSONL from `rank`")
    e.add_argument("--model", help="checkpoint; rank end-to-end instead of --rankings")
    e.add_argument("--embeddings", help="needed with --model")
    e.add_argument("--compare", help="second rankings JSONL for agreement")
    e.add_argument("--per-image", action="store_true", help="print per-image lines")

    a = sub.add_parser("attn", help="print attention weights for one image")
    a.add_argument("--data", required=True)
    a.add_argument("--embeddings", required=True)
    a.add_argument("--image-id", required=True)
    a.add_argument("--statement", required=True)

    s = sub.add_parser("synth", help="generate a synthetic dataset directory")
    s.add_argument("--out", required=True)
    s.add_argument("--num-images", type=int, default=200)
    s.add_argument("--num-topics", type=int, default=5)
    s.add_argument("--d-w", type=int, default=16)
    s.add_argument("--d-obj", type=int, default=12)
    s.add_argument("--d-sym", type=int, default=8)
    s.add_argument("--statements-per-image", type=int, default=15)
    s.add_argument("--positives-per-image", type=int, default=3)
    s.add_argument("--noise-sigma", type=float, default=0.0)
    s.add_argument("--ocr-dropout", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--independent-parts", action="store_true")
    return p


def _fit_corpus_tfidf(records):
    """Corpus: every candidate statement plus one scene-text doc per image."""
    docs = [s.tokens for rec in records for s in rec.statements]
    docs += [list(rec.scene.tokens) for rec in records]
    return fit_tfidf(docs)


def _weights_from_flags(args, checkpoint_defaults=None):
    w = checkpoint_defaults or ranker.RankingWeights()
    for name in ("alpha1", "alpha2", "alpha3", "alpha1a", "alpha1r"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(w, name, val)
    return w


def cmd_train(args) -> int:
    records = dataio.load_dataset(args.data)
    table = load_embeddings(args.embeddings)
    config = TrainConfig(
        mode=MODE_FLAGS[args.mode],
        d_emb=args.d_emb,
        beta=args.margin,
        lr=args.lr,
        epochs=args.epochs,
        batch_size=args.batch,
        seed=args.seed,
    )
    model, trace = train(records, table, config)
    for epoch, loss in enumerate(trace, start=1):
        print(f"epoch {epoch} loss {loss:.6f}")
    tfidf = _fit_corpus_tfidf(records)
    dataio.save_model(model, tfidf, args.out)
    return 0


def _rank_records(records, model, tfidf, table, w, whole_statement):
    lines = []
    for rec in records:
        ranked = ranker.rank_image(rec, model, tfidf, table, w, whole_statement)
        lines.append(
            {
                "id": rec.id,
                "ranking": [j for j, _ in ranked.entries],
                "scores": [s for _, s in ranked.entries],
            }
        )
    return lines


def cmd_rank(args) -> int:
    records = dataio.load_dataset(args.data)
    model, tfidf = dataio.load_model(args.model)
    table = load_embeddings(args.embeddings)
    w = _weights_from_flags(args)
    lines = _rank_records(records, model, tfidf, table, w, args.whole_statement)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for line in lines:
            out.write(json.dumps(line) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def _read_rankings(path):
    tops = {}
    order = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            tops[obj["id"]] = obj["ranking"][0]
            order.append(obj["id"])
    return order, tops


def cmd_eval(args) -> int:
    records = dataio.load_dataset(args.data)
    gold = {rec.id: rec.positive_indices() for rec in records}

    if args.rankings:
        order, tops = _read_rankings(args.rankings)
        predictions = [(image_id, tops[image_id]) for image_id in order]
    elif args.model and args.embeddings:
        model, tfidf = dataio.load_model(args.model)
        table = load_embeddings(args.embeddings)
        w = _weights_from_flags(args)
        lines = _rank_records(records, model, tfidf, table, w, False)
        predictions = [(line["id"], line["ranking"][0]) for line in lines]
    else:
        raise AdrankError("eval needs either --rankings or --model with --embeddings")

    report = evaluator.accuracy(predictions, gold)
    print(report.summary())
    if args.per_image:
        for image_id, top, ok in report.per_image:
            print(f"{image_id}\t{top}\t{'correct' if ok else 'wrong'}")
        for image_id in report.excluded:
            print(f"{image_id}\t-\texcluded (no positive statements)")

    if args.compare:
        _, other_tops = _read_rankings(args.compare)
        ids = [image_id for image_id, _ in predictions]
        missing = [i for i in ids if i not in other_tops]
        if missing:
            raise AdrankError(f"--compare file missing image id {missing[0]!r}")
        a_tops = [top for _, top in predictions]
        b_tops = [other_tops[i] for i in ids]
        print(f"agreement {evaluator.agreement(a_tops, b_tops):.4f}")
    return 0


def cmd_attn(args) -> int:
    records = dataio.load_dataset(args.data)
    table = load_embeddings(args.embeddings)
    by_id = {rec.id: rec for rec in records}
    if args.image_id not in by_id:
        raise AdrankError(f"unknown image id {args.image_id!r}")
    record = by_id[args.image_id]
    weights = attention_weights(record.scene, tokenize(args.statement), table)
    for token, gamma in weights.weights:
        print(f"{token}\t{gamma:.4f}")
    return 0


def cmd_synth(args) -> int:
    config = synth.SynthConfig(
        num_images=args.num_images,
        num_topics=args.num_topics,
        d_w=args.d_w,
        d_obj=args.d_obj,
        d_sym=args.d_sym,
        statements_per_image=args.statements_per_image,
        positives_per_image=args.positives_per_image,
        noise_sigma=args.noise_sigma,
        ocr_dropout=args.ocr_dropout,
        seed=args.seed,
        independent_parts=args.independent_parts,
    )
    result = synth.generate(config)
    synth.write_outputs(result, args.out)
    return 0


_COMMANDS = {
    "train": cmd_train,
    "rank": cmd_rank,
    "eval": cmd_eval,
    "attn": cmd_attn,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (AdrankError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
