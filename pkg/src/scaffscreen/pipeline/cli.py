"""Command-line front end.

``run`` drives the whole experiment; the other subcommands expose the
individual stages so partial pipelines can be scripted and artifacts can
be regenerated without retraining. Every command accepts ``--config`` for
an INI file; explicit flags win over file values.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from ..chem import ParseError, parse_smiles
from ..metrics import RankedList, write_metric_report
from ..rerank import EmptyCandidates, build_candidates, candidate_fingerprint, lambda_sweep, write_sweep_csv
from ..selftrain import (
    LabeledSet,
    SelfTrainConfig,
    load_checkpoint,
    predict,
    save_checkpoint,
    self_train,
    write_history_csv,
)
from .config import ConfigError, RunConfig, load_config, resolve_overrides
from .ingest import HeaderError, ingest
from .runner import (
    _cell_metrics,
    _read_scores_csv,
    _write_generated_csv,
    _write_generation_report,
    _write_scores_csv,
    augment_split,
    derive_seed,
    rebuild_report,
    run_experiment,
)
from .splits import SplitPlan, TooFewScaffolds, make_splits
from ..sampling import write_library_csv

_KNOWN_ERRORS = (
    ConfigError,
    HeaderError,
    ParseError,
    TooFewScaffolds,
    FileNotFoundError,
    ValueError,
)


def _parse_lambda_grid(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _resolve(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {
        "assay": getattr(args, "assay", None),
        "seed": getattr(args, "seed", None),
        "scheme": getattr(args, "scheme", None),
        "denoiser": getattr(args, "denoiser", None),
        "output_dir": getattr(args, "out", None),
    }
    if getattr(args, "no_augment", False):
        overrides["augment_enabled"] = False
    sweep = getattr(args, "lambda_sweep", None)
    if sweep:
        overrides["lambda_grid"] = _parse_lambda_grid(sweep)
    return resolve_overrides(config, **overrides)


def cmd_ingest(args: argparse.Namespace) -> int:
    assay = ingest(args.assay, quarantine_path=args.quarantine)
    summary = {
        "records": assay.size,
        "actives": assay.n_actives,
        "active_fraction": round(assay.active_fraction, 6),
        "quarantined": len(assay.quarantined),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    config = _resolve(args)
    assay = ingest(config.assay)
    plan = make_splits(assay, scheme=config.scheme, seed=config.seed)
    plan.to_json(args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_augment(args: argparse.Namespace) -> int:
    config = _resolve(args)
    assay = ingest(config.assay)
    by_id = {r.record_id: r for r in assay.records}
    plan = SplitPlan.from_json(args.splits)
    split = plan.splits[args.split_index]
    train_records = [by_id[i] for i in split.train_ids]
    seed = derive_seed(config.seed, "augment", args.split_index)
    products = augment_split(train_records, config, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if products.library is not None:
        write_library_csv(out / "library.csv", products.library)
    _write_generated_csv(out / "generated.csv", products.entries)
    _write_generation_report(out / "generation_report.json", products)
    total = products.report.total if products.report else 0
    n_valid = products.report.n_valid if products.report else 0
    print(f"generated {total} molecules, {n_valid} valid; artifacts in {out}")
    return 0


def _read_pool(path: str | None) -> tuple[list[str], list]:
    if not path:
        return [], []
    ids: list[str] = []
    mols = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            if int(row[3]):
                ids.append(row[0])
                mols.append(parse_smiles(row[1]))
    return ids, mols


def cmd_train(args: argparse.Namespace) -> int:
    config = _resolve(args)
    assay = ingest(config.assay)
    by_id = {r.record_id: r for r in assay.records}
    plan = SplitPlan.from_json(args.splits)
    split = plan.splits[args.split_index]
    train_records = [by_id[i] for i in split.train_ids]
    valid_records = [by_id[i] for i in split.valid_ids]
    pool_ids, pool = _read_pool(None if args.no_augment else args.generated)
    seed = derive_seed(config.seed, "train", args.split_index, args.eval_index)
    labeled = LabeledSet(
        ids=tuple(r.record_id for r in train_records),
        molecules=tuple(r.mol for r in train_records),
        labels=np.array([r.label for r in train_records], dtype=np.int64),
        origin="original",
    )
    validation = LabeledSet(
        ids=tuple(r.record_id for r in valid_records),
        molecules=tuple(r.mol for r in valid_records),
        labels=np.array([r.label for r in valid_records], dtype=np.int64),
        origin="original",
    )
    train_config = SelfTrainConfig(
        epochs=config.epochs,
        warmup_epochs=config.warmup_epochs,
        refresh_period=config.refresh_period,
        confidence_threshold=config.confidence_threshold,
        learning_rate=config.learning_rate,
        l2_penalty=config.l2_penalty,
        batch_size=config.batch_size,
        lr_decay_power=config.lr_decay_power,
        radius=config.radius,
        nbits=config.nbits,
        seed=seed,
    )
    model, history = self_train(labeled, pool_ids, pool, validation, train_config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out / "model.json", model)
    write_history_csv(out / "history.csv", history)
    best = max(history, key=lambda h: h.val_bedroc)
    print(f"trained {len(history)} epochs, best validation bedroc {best.val_bedroc:.4f}")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    config = _resolve(args)
    model = load_checkpoint(args.model)
    assay = ingest(config.assay)
    records = list(assay.records)
    if args.splits:
        by_id = {r.record_id: r for r in assay.records}
        plan = SplitPlan.from_json(args.splits)
        split = plan.splits[args.split_index]
        fold_ids = {
            "train": split.train_ids,
            "valid": split.valid_ids,
            "test": split.test_ids,
        }[args.fold]
        records = [by_id[i] for i in fold_ids]
    scores = predict(model, [r.mol for r in records])
    _write_scores_csv(
        args.out,
        [(r.record_id, r.smiles, float(s), r.label) for r, s in zip(records, scores)],
    )
    print(f"scored {len(records)} records into {args.out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _resolve(args)
    rows = _read_scores_csv(Path(args.scores))
    ranked = RankedList.from_records((r, s, y) for r, _, s, y in rows)
    mols_by_id = {r: parse_smiles(smi) for r, smi, _, _ in rows}
    notes: list[str] = []
    values = _cell_metrics(ranked, mols_by_id, config, notes, args.scores)
    write_metric_report(args.out, values)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    print(json.dumps({k: round(v, 6) for k, v in sorted(values.items())}, indent=2))
    return 0


def cmd_rerank(args: argparse.Namespace) -> int:
    config = _resolve(args)
    rows = _read_scores_csv(Path(args.scores))
    ranked = RankedList.from_records((r, s, y) for r, _, s, y in rows)
    smiles_by_id = {r: smi for r, smi, _, _ in rows}
    fps = [
        candidate_fingerprint(
            parse_smiles(smiles_by_id[i]), radius=config.radius, nbits=config.nbits
        )
        for i in ranked.ids
    ]
    try:
        candidates = build_candidates(
            ranked.ids,
            [float(s) for s in ranked.scores],
            fps,
            cap=config.candidate_cap,
        )
    except EmptyCandidates:
        write_sweep_csv(args.out, [])
        print("no positive scores; wrote an empty sweep", file=sys.stderr)
        return 0
    if candidates.size < config.top_k:
        write_sweep_csv(args.out, [])
        print(
            f"only {candidates.size} candidates for k={config.top_k}; wrote an empty sweep",
            file=sys.stderr,
        )
        return 0
    sweep = lambda_sweep(ranked, candidates, config.lambda_grid, k=config.top_k)
    write_sweep_csv(args.out, sweep)
    print(f"wrote {args.out}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = _resolve(args)
    run_dir = run_experiment(config)
    print(f"run complete: {run_dir}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = rebuild_report(args.run)
    print(f"report rebuilt under {run_dir / 'report'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scaffscreen",
        description="Scaffold-aware virtual screening pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, assay: bool = False) -> None:
        p.add_argument("--config", help="INI configuration file")
        p.add_argument("--seed", type=int, help="override the root seed")
        if assay:
            p.add_argument("--assay", help="assay CSV (id,smiles,label)")

    p = sub.add_parser("ingest", help="validate an assay CSV")
    p.add_argument("--assay", required=True)
    p.add_argument("--quarantine", help="write rejected rows here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="build the split plan")
    common(p, assay=True)
    p.add_argument("--scheme", choices=["random", "scaffold"])
    p.add_argument("--out", required=True, help="output splits.json")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("augment", help="cluster scaffolds and generate extensions")
    common(p, assay=True)
    p.add_argument("--splits", required=True)
    p.add_argument("--split-index", type=int, default=0)
    p.add_argument("--denoiser", help="marginal, echo, or external:<command>")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="self-train a classifier on one split")
    common(p, assay=True)
    p.add_argument("--splits", required=True)
    p.add_argument("--split-index", type=int, default=0)
    p.add_argument("--eval-index", type=int, default=0, help="evaluation seed index")
    p.add_argument("--generated", help="generated.csv pool from the augment stage")
    p.add_argument("--no-augment", action="store_true", help="ignore any pool")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score records with a trained model")
    common(p, assay=True)
    p.add_argument("--model", required=True)
    p.add_argument("--splits")
    p.add_argument("--split-index", type=int, default=0)
    p.add_argument("--fold", choices=["train", "valid", "test"], default="test")
    p.add_argument("--out", required=True, help="output scores.csv")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="early-recognition metrics for a scores file")
    common(p)
    p.add_argument("--scores", required=True)
    p.add_argument("--out", required=True, help="output metrics.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rerank", help="diversity rerank sweep for a scores file")
    common(p)
    p.add_argument("--scores", required=True)
    p.add_argument("--lambda-sweep", help="comma-separated lambda grid")
    p.add_argument("--out", required=True, help="output rerank.csv")
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("run", help="full experiment into a run directory")
    common(p, assay=True)
    p.add_argument("--scheme", choices=["random", "scaffold"])
    p.add_argument("--no-augment", action="store_true")
    p.add_argument("--denoiser", help="marginal, echo, or external:<command>")
    p.add_argument("--lambda-sweep", help="comma-separated lambda grid")
    p.add_argument("--out", help="run directory (overrides output_dir)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="rebuild the report tables of a run")
    p.add_argument("--run", required=True, help="existing run directory")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "no_augment", False) and getattr(args, "generated", None):
        parser.error("--no-augment and --generated are mutually exclusive")
    try:
        return args.func(args)
    except _KNOWN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
