"""Command-line interface.

Subcommands: ingest, train, eval, analyze, split, gridsearch, serve, degrade.
Service settings resolve flags > TALKMOVES_* env vars > config file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .analytics import AnalyticsConfig, compute_feedback, load_stopwords
from .classifier import TrainConfig, grid_search, save_model_file, train
from .corpus import (
    Dataset,
    corpus_stats,
    load_dataset,
    save_dataset,
    stats_to_json,
    stratified_split,
)
from .ingest import (
    NoiseConfig,
    build_pairs,
    degrade,
    parse_transcript,
    segment_transcript,
    serialize_transcript,
)
from .metrics import confusion, error_analysis, report_to_json
from .pipeline.config import load_config
from .pipeline.service import serve
from .pipeline.store import JobStore
from .pipeline.worker import build_classifier, predictions_csv
from .report_html import render_report


def _add_format(parser):
    parser.add_argument(
        "--format", choices=["json", "turns_text", "csv"], default="json",
        help="transcript file format",
    )


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def cmd_ingest(args) -> int:
    store = JobStore(args.store)
    data = _read(args.transcript)
    lesson_id = args.lesson_id or Path(args.transcript).stem
    job = store.enqueue(data, args.format, lesson_id=lesson_id, teacher=args.teacher)
    transcript = store.load_transcript(job.id)
    stats = corpus_stats(segment_transcript(transcript))
    print(json.dumps({"job_id": job.id, "stats": stats_to_json(stats)}, indent=2))
    return 0


def cmd_train(args) -> int:
    dataset = load_dataset(_read(args.dataset))
    val = load_dataset(_read(args.val)) if args.val else Dataset()
    cfg = TrainConfig(
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        hash_dimension=args.dim,
        use_class_weights=not args.no_class_weights,
        l2=args.l2,
    )
    model, history = train(dataset, val, cfg)
    save_model_file(model, args.out)
    for entry in history:
        f1 = entry["val_macro_f1"]
        f1_text = f"{f1:.4f}" if f1 is not None else "-"
        print(f"epoch {entry['epoch']}: loss {entry['train_loss']:.6f} val_macro_f1 {f1_text}")
    print(f"saved model to {args.out}")
    return 0


def _classifier_from_args(args):
    overrides = {
        "classifier": args.classifier,
        "model": getattr(args, "model", None),
        "adapter": getattr(args, "adapter", None),
    }
    cfg = load_config(None, overrides)
    return build_classifier(cfg)


def cmd_eval(args) -> int:
    dataset = load_dataset(_read(args.dataset))
    classify = _classifier_from_args(args)
    pairs = [item.pair for item in dataset.items]
    golds = [item.label for item in dataset.items]
    preds = classify(pairs)
    m = confusion(golds, [p.label for p in preds])
    report = report_to_json(m)
    if args.errors:
        report["error_analysis"] = error_analysis(golds, preds, pairs, max_examples=args.errors)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_analyze(args) -> int:
    data = _read(args.transcript)
    lesson_id = args.lesson_id or Path(args.transcript).stem
    transcript = parse_transcript(data, args.format, lesson_id=lesson_id)
    sentences = segment_transcript(transcript)
    pairs = build_pairs(sentences)
    classify = _classifier_from_args(args)
    predictions = classify(pairs)
    analytics_cfg = AnalyticsConfig(
        stopwords=load_stopwords(args.stopwords), top_words_n=args.top_words
    )
    feedback = compute_feedback(transcript, predictions, analytics_cfg)
    feedback_json, report_html = render_report(feedback)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "predictions.csv").write_bytes(predictions_csv(pairs, predictions))
    (out_dir / "feedback.json").write_bytes(feedback_json)
    (out_dir / "report.html").write_bytes(report_html)
    print(f"wrote feedback.json, report.html, predictions.csv to {out_dir}")
    return 0


def cmd_split(args) -> int:
    dataset = load_dataset(_read(args.dataset))
    ratios = tuple(float(r) for r in args.ratios.split(","))
    if len(ratios) != 3:
        print("--ratios needs three comma-separated fractions", file=sys.stderr)
        return 2
    parts = stratified_split(dataset, ratios, seed=args.seed, by_lesson=args.by_lesson)
    for name, part in zip(("train", "val", "test"), parts):
        path = f"{args.out_prefix}.{name}.csv"
        Path(path).write_bytes(save_dataset(part))
        print(f"{path}: {len(part)} rows")
    return 0


def cmd_gridsearch(args) -> int:
    dataset = load_dataset(_read(args.dataset))
    if args.val:
        train_set, val_set = dataset, load_dataset(_read(args.val))
    else:
        train_set, val_set, _ = stratified_split(dataset, (0.8, 0.1, 0.1), seed=args.seed)
    grid = json.loads(_read(args.grid))
    best, leaderboard = grid_search(train_set, val_set, grid)
    import csv as _csv

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        field_names = ["rank", "index", "status", "macro_f1", "mcc", "error", "config"]
        writer = _csv.DictWriter(fh, field_names, lineterminator="\n")
        writer.writeheader()
        for rank, row in enumerate(leaderboard):
            writer.writerow(
                {
                    "rank": rank,
                    "index": row["index"],
                    "status": row["status"],
                    "macro_f1": row["macro_f1"],
                    "mcc": row["mcc"],
                    "error": row["error"],
                    "config": json.dumps(row["config"], sort_keys=True),
                }
            )
    print(f"best config: {json.dumps(best.__dict__, default=str, sort_keys=True)}")
    print(f"wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    overrides = {
        "listen": args.listen,
        "store": args.store,
        "classifier": args.classifier,
        "model": args.model,
        "adapter": args.adapter,
        "parallelism": args.parallelism,
        "stopwords": args.stopwords,
    }
    cfg = load_config(args.config, overrides)
    serve(cfg)
    return 0


def cmd_degrade(args) -> int:
    transcript = parse_transcript(_read(args.transcript), args.format, lesson_id=args.lesson_id)
    noise = NoiseConfig(
        word_drop_rate=args.drop,
        word_substitute_rate=args.substitute,
        student_rate_multiplier=args.student_mult,
        seed=args.seed,
    )
    noisy = degrade(transcript, noise)
    data = serialize_transcript(noisy)
    if args.out:
        Path(args.out).write_bytes(data)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(data.decode("utf-8") + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="talkmoves", description=__doc__)
    parser.add_argument("--version", action="version", version=f"talkmoves {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a transcript file and queue it in a store")
    p.add_argument("transcript")
    _add_format(p)
    p.add_argument("--store", required=True)
    p.add_argument("--lesson-id")
    p.add_argument("--teacher", default="default")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train the softmax classifier on a labeled dataset")
    p.add_argument("dataset")
    p.add_argument("--val", help="labeled validation csv for per-epoch macro-F1")
    p.add_argument("--out", required=True)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=1 << 15)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--no-class-weights", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a classifier on a labeled dataset")
    p.add_argument("dataset")
    p.add_argument("--classifier", choices=["rule", "trained", "adapter"], default="rule")
    p.add_argument("--model")
    p.add_argument("--adapter")
    p.add_argument("--out")
    p.add_argument("--errors", type=int, default=0, help="include N misclassified examples per label")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", help="classify a transcript and write feedback + report")
    p.add_argument("transcript")
    _add_format(p)
    p.add_argument("--lesson-id")
    p.add_argument("--classifier", choices=["rule", "trained", "adapter"], default="rule")
    p.add_argument("--model")
    p.add_argument("--adapter")
    p.add_argument("--stopwords")
    p.add_argument("--top-words", type=int, default=50)
    p.add_argument("--out-dir", default="analysis")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("split", help="stratified train/val/test split of a dataset")
    p.add_argument("dataset")
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--by-lesson", action="store_true")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("gridsearch", help="exhaustive hyperparameter sweep with a leaderboard")
    p.add_argument("dataset")
    p.add_argument("--val", help="validation csv; default splits the dataset 80/10/10")
    p.add_argument("--grid", required=True, help="json file mapping config fields to value lists")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("serve", help="run the lesson-processing service")
    p.add_argument("--config")
    p.add_argument("--listen")
    p.add_argument("--store")
    p.add_argument("--classifier", choices=["rule", "trained", "adapter"])
    p.add_argument("--model")
    p.add_argument("--adapter")
    p.add_argument("--parallelism", type=int)
    p.add_argument("--stopwords")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("degrade", help="inject ASR-like noise into a transcript")
    p.add_argument("transcript")
    _add_format(p)
    p.add_argument("--lesson-id")
    p.add_argument("--drop", type=float, default=0.0)
    p.add_argument("--substitute", type=float, default=0.0)
    p.add_argument("--student-mult", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_degrade)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
