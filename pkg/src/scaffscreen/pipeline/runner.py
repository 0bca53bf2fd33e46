"""End-to-end experiment runner.

One call produces a self-describing run directory: resolved config,
quarantine sidecar, split plan, per-split augmentation products, per-seed
training and evaluation artifacts, pooled reports, and a manifest hashing
every file. Nothing in the tree depends on wall-clock time, so rerunning
the same configuration reproduces the directory byte for byte.

Layout::

    <run_dir>/
      config.ini
      quarantine.csv
      splits.json
      splits/split<i>/library.csv, generated.csv, generation_report.json
      splits/split<i>/seed<j>/model.json, history.csv, scores.csv,
                              metrics.json, rerank.csv
      report/aggregate.csv, pooled_metrics.json, lambda_sweep.csv,
             umap_input.csv, notes.json
      manifest.json
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import platform
import shlex
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..chem import MolGraph, murcko_scaffold, parse_smiles, to_smiles
from ..diffusion import (
    CosineSchedule,
    ExternalDenoiser,
    GeneratedEntry,
    GenerationReport,
    MarginalDenoiser,
    OneHotEchoDenoiser,
    compute_marginals,
    generate_scaffold_extensions,
)
from ..fingerprints import ecfp, fingerprint_matrix
from ..metrics import (
    DegenerateLabels,
    RankedList,
    bedroc,
    dcg_k,
    ef_k,
    log_auc,
    sd_k,
    write_metric_report,
)
from ..rerank import (
    EmptyCandidates,
    LambdaReport,
    build_candidates,
    candidate_fingerprint,
    lambda_sweep,
    write_sweep_csv,
)
from ..sampling import (
    ClusterModel,
    SamplingWeights,
    ScaffoldLibrary,
    cluster_scaffolds,
    sample_library,
    sampling_weights,
    write_library_csv,
)
from ..selftrain import (
    LabeledSet,
    SelfTrainConfig,
    predict,
    save_checkpoint,
    self_train,
    write_history_csv,
)
from .config import RunConfig, dump_config, load_config
from .ingest import Assay, AssayRecord, ingest
from .splits import make_splits

__all__ = ["AugmentProducts", "run_experiment", "rebuild_report", "derive_seed"]

logger = logging.getLogger(__name__)


def derive_seed(root: int, *parts: int | str) -> int:
    """A stable integer seed for a named stage of the run.

    String parts are folded through sha256 so stage names stay readable at
    call sites without leaking Python's randomized hash into the result.
    """
    key = []
    for part in parts:
        if isinstance(part, str):
            digest = hashlib.sha256(part.encode("utf-8")).digest()
            key.append(int.from_bytes(digest[:4], "little"))
        else:
            key.append(int(part))
    seq = np.random.SeedSequence(root, spawn_key=tuple(key))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass
class AugmentProducts:
    """Everything one split's augmentation stage hands to training."""

    pool_ids: list[str]
    pool: list[MolGraph]
    entries: list[GeneratedEntry]
    report: GenerationReport | None
    model: ClusterModel | None
    library: ScaffoldLibrary | None
    library_counts: list[int]
    valid_counts: list[int]
    excluded_acyclic: int
    note: str | None = None


def _make_denoiser(spec: str, marginals):
    if spec == "marginal":
        return MarginalDenoiser(marginals)
    if spec == "echo":
        return OneHotEchoDenoiser(len(marginals.atom_types))
    if spec.startswith("external:"):
        command = shlex.split(spec[len("external:"):])
        return ExternalDenoiser(command, len(marginals.atom_types))
    raise ValueError(f"unknown denoiser {spec!r}")


def _uniform_instance_weights(model: ClusterModel) -> SamplingWeights:
    """Ablation weights: clusters in proportion to size, members uniform.

    Combined with the uniform member draw this makes every library entry
    equally likely, removing the balancing effect entirely.
    """
    counts = model.cluster_sizes
    weights = counts.astype(np.float64)
    return SamplingWeights(
        counts=counts, weights=weights, probabilities=weights / weights.sum()
    )


def augment_split(
    train_records: Sequence[AssayRecord],
    config: RunConfig,
    seed: int,
) -> AugmentProducts:
    """Cluster the training actives' scaffolds and generate extensions."""
    actives = [r for r in train_records if r.label == 1]
    scaffolds: list[MolGraph] = []
    for record in actives:
        scaffold = murcko_scaffold(record.mol)
        if scaffold is not None:
            scaffolds.append(scaffold)
    excluded = len(actives) - len(scaffolds)

    if not scaffolds:
        return AugmentProducts(
            pool_ids=[],
            pool=[],
            entries=[],
            report=None,
            model=None,
            library=None,
            library_counts=[],
            valid_counts=[],
            excluded_acyclic=excluded,
            note="no ring-bearing actives in the training fold",
        )

    fps = [ecfp(s, radius=config.radius, nbits=config.nbits) for s in scaffolds]
    if len(scaffolds) >= 3:
        k_hi = min(config.k_max, len(scaffolds) - 1)
        k_range = range(config.k_min, k_hi + 1) if k_hi >= config.k_min else None
        if k_range is None:
            model = _single_cluster(fps)
        else:
            model = cluster_scaffolds(fps, k_range=k_range, seed=derive_seed(seed, "kmeans"))
    else:
        model = _single_cluster(fps)

    if config.sampling == "balanced":
        weights = sampling_weights(model)
    else:
        weights = _uniform_instance_weights(model)

    n_draws = max(1, round(config.library_fraction * len(train_records)))
    library = sample_library(
        scaffolds, model, weights, n_draws, seed=derive_seed(seed, "library")
    )

    train_mols = [r.mol for r in train_records]
    marginals = compute_marginals(train_mols)
    denoiser = _make_denoiser(config.denoiser, marginals)
    schedule = CosineSchedule(config.timesteps)
    try:
        entries, report = generate_scaffold_extensions(
            [e.scaffold for e in library.entries],
            [e.cluster_id for e in library.entries],
            denoiser,
            marginals,
            schedule=schedule,
            seed=derive_seed(seed, "extend"),
        )
    finally:
        close = getattr(denoiser, "close", None)
        if close is not None:
            close()

    pool_ids = [f"gen{idx:04d}" for idx, e in enumerate(entries) if e.valid]
    pool = [e.molecule for e in entries if e.valid]
    valid_counts = [0] * model.k
    for entry in entries:
        if entry.valid:
            valid_counts[entry.cluster_id] += 1
    return AugmentProducts(
        pool_ids=pool_ids,
        pool=pool,
        entries=entries,
        report=report,
        model=model,
        library=library,
        library_counts=[int(c) for c in library.cluster_counts(model.k)],
        valid_counts=valid_counts,
        excluded_acyclic=excluded,
    )


def _single_cluster(fps) -> ClusterModel:
    points = fingerprint_matrix(fps)
    return ClusterModel(
        k=1,
        centroids=points[:1].copy(),
        assignments=np.zeros(len(fps), dtype=np.int64),
        silhouette_score=float("nan"),
        degenerate=True,
    )


def _write_generated_csv(path: Path, entries: Sequence[GeneratedEntry]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "smiles", "cluster_id", "valid"])
        for idx, entry in enumerate(entries):
            writer.writerow(
                [
                    f"gen{idx:04d}",
                    to_smiles(entry.molecule),
                    entry.cluster_id,
                    int(entry.valid),
                ]
            )


def _write_generation_report(path: Path, products: AugmentProducts) -> None:
    report = products.report
    payload = {
        "total": report.total if report else 0,
        "n_valid": report.n_valid if report else 0,
        "validity_rate": round(report.validity_rate, 6) if report else 0.0,
        "k": products.model.k if products.model else 0,
        "silhouette": (
            None
            if products.model is None or np.isnan(products.model.silhouette_score)
            else round(float(products.model.silhouette_score), 6)
        ),
        "library_per_cluster": products.library_counts,
        "valid_per_cluster": products.valid_counts,
        "excluded_acyclic_actives": products.excluded_acyclic,
        "note": products.note,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_scores_csv(path: Path, rows: Sequence[tuple[str, str, float, int]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "smiles", "score", "label"])
        for record_id, smiles, score, label in rows:
            writer.writerow([record_id, smiles, repr(float(score)), label])


def _cell_metrics(
    ranked: RankedList,
    mols_by_id: dict[str, MolGraph],
    config: RunConfig,
    notes: list[str],
    where: str,
) -> dict[str, float]:
    k = config.top_k
    values: dict[str, float] = {}
    try:
        values["logauc"] = log_auc(ranked, config.fpr_lo, config.fpr_hi)
        values["bedroc"] = bedroc(ranked, config.bedroc_alpha)
        values[f"ef{k}"] = ef_k(ranked, k)
    except DegenerateLabels as exc:
        notes.append(f"{where}: {exc}")
    if ranked.n_records >= k:
        values[f"dcg{k}"] = dcg_k(ranked, k)
        values[f"sd{k}"] = sd_k(
            [mols_by_id[i] for i in ranked.ids[:k]],
            k,
            radius=config.radius,
            nbits=config.nbits,
        )
    else:
        notes.append(f"{where}: fewer than {k} records, depth metrics skipped")
    return values


def _rerank_cell(
    cell_dir: Path,
    ranked: RankedList,
    mols_by_id: dict[str, MolGraph],
    config: RunConfig,
    notes: list[str],
    where: str,
):
    """Write rerank.csv for one cell; returns the sweep or None."""
    fps = [
        candidate_fingerprint(mols_by_id[i], radius=config.radius, nbits=config.nbits)
        for i in ranked.ids
    ]
    path = cell_dir / "rerank.csv"
    try:
        candidates = build_candidates(
            ranked.ids, [float(s) for s in ranked.scores], fps, cap=config.candidate_cap
        )
    except EmptyCandidates:
        write_sweep_csv(path, [])
        notes.append(f"{where}: no positive scores, rerank skipped")
        return None
    if candidates.size < config.top_k:
        write_sweep_csv(path, [])
        notes.append(
            f"{where}: only {candidates.size} candidates for k={config.top_k}, rerank skipped"
        )
        return None
    try:
        sweep = lambda_sweep(ranked, candidates, config.lambda_grid, k=config.top_k)
    except DegenerateLabels as exc:
        write_sweep_csv(path, [])
        notes.append(f"{where}: {exc}, rerank skipped")
        return None
    write_sweep_csv(path, sweep)
    return sweep


def _fold_records(assay_by_id: dict[str, AssayRecord], ids: Sequence[str]) -> list[AssayRecord]:
    return [assay_by_id[i] for i in ids]


def run_experiment(config: RunConfig, run_dir: str | Path | None = None) -> Path:
    """Execute the full pipeline under ``config``; returns the run directory."""
    run_dir = Path(run_dir if run_dir is not None else config.output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "report").mkdir(exist_ok=True)

    config_text = dump_config(config)
    (run_dir / "config.ini").write_text(config_text, encoding="utf-8")

    assay = ingest(config.assay, quarantine_path=run_dir / "quarantine.csv")
    by_id = {r.record_id: r for r in assay.records}
    plan = make_splits(assay, scheme=config.scheme, seed=config.seed)
    plan.to_json(run_dir / "splits.json")

    notes: list[str] = []
    seeds_used: dict[str, object] = {"root": config.seed}
    augment_seeds: dict[str, int] = {}
    train_seeds: dict[str, list[int]] = {}

    k = config.top_k
    metric_names = ["logauc", "bedroc", f"ef{k}", f"dcg{k}", f"sd{k}"]
    cell_rows: list[tuple[int, int, dict[str, float]]] = []
    sweeps: list = []
    pooled_rows: dict[int, list[tuple[str, float, int]]] = {
        j: [] for j in range(config.eval_seeds)
    }
    generated_for_umap: list[tuple[str, MolGraph]] = []

    for i, split in enumerate(plan.splits):
        split_dir = run_dir / "splits" / f"split{i}"
        split_dir.mkdir(parents=True, exist_ok=True)
        train_records = _fold_records(by_id, split.train_ids)
        valid_records = _fold_records(by_id, split.valid_ids)
        test_records = _fold_records(by_id, split.test_ids)

        pool_ids: list[str] = []
        pool: list[MolGraph] = []
        if config.augment_enabled:
            aug_seed = derive_seed(config.seed, "augment", i)
            augment_seeds[str(i)] = aug_seed
            products = augment_split(train_records, config, aug_seed)
            if products.library is not None:
                write_library_csv(split_dir / "library.csv", products.library)
            _write_generated_csv(split_dir / "generated.csv", products.entries)
            _write_generation_report(split_dir / "generation_report.json", products)
            if products.note:
                notes.append(f"split{i}: {products.note}")
            pool_ids = products.pool_ids
            pool = products.pool
            generated_for_umap.extend(
                (f"s{i}_{pid}", mol) for pid, mol in zip(pool_ids, pool)
            )

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

        train_seeds[str(i)] = []
        for j in range(config.eval_seeds):
            cell_dir = split_dir / f"seed{j}"
            cell_dir.mkdir(exist_ok=True)
            cell_seed = derive_seed(config.seed, "train", i, j)
            train_seeds[str(i)].append(cell_seed)
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
                seed=cell_seed,
            )
            model, history = self_train(labeled, pool_ids, pool, validation, train_config)
            save_checkpoint(cell_dir / "model.json", model)
            write_history_csv(cell_dir / "history.csv", history)

            test_scores = predict(model, [r.mol for r in test_records])
            _write_scores_csv(
                cell_dir / "scores.csv",
                [
                    (r.record_id, r.smiles, float(s), r.label)
                    for r, s in zip(test_records, test_scores)
                ],
            )
            ranked = RankedList.from_records(
                (r.record_id, float(s), r.label)
                for r, s in zip(test_records, test_scores)
            )
            mols_by_id = {r.record_id: r.mol for r in test_records}
            where = f"split{i}/seed{j}"
            values = _cell_metrics(ranked, mols_by_id, config, notes, where)
            write_metric_report(cell_dir / "metrics.json", values)
            cell_rows.append((i, j, values))

            sweep = _rerank_cell(cell_dir, ranked, mols_by_id, config, notes, where)
            if sweep is not None:
                sweeps.append(sweep)

            pooled_rows[j].extend(
                (r.record_id, float(s), r.label)
                for r, s in zip(test_records, test_scores)
            )

    _write_report(
        run_dir,
        config,
        assay,
        metric_names,
        cell_rows,
        sweeps,
        pooled_rows,
        generated_for_umap,
        notes,
    )

    seeds_used["augment"] = augment_seeds
    seeds_used["train"] = train_seeds
    assay_hash = hashlib.sha256(Path(config.assay).read_bytes()).hexdigest()
    _write_manifest(run_dir, config_text, assay, seeds_used, assay_hash)
    return run_dir


def _write_report(
    run_dir: Path,
    config: RunConfig,
    assay: Assay,
    metric_names: list[str],
    cell_rows,
    sweeps,
    pooled_rows,
    generated_for_umap,
    notes: list[str],
) -> None:
    report_dir = run_dir / "report"
    by_id = {r.record_id: r for r in assay.records}

    with open(report_dir / "aggregate.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["split", "seed"] + metric_names)
        for i, j, values in cell_rows:
            writer.writerow(
                [i, j] + [f"{values[name]:.6f}" if name in values else "" for name in metric_names]
            )
        for stat, func in (("mean", np.mean), ("std", np.std)):
            row = [stat, ""]
            for name in metric_names:
                present = [v[name] for _, _, v in cell_rows if name in v]
                row.append(f"{func(present):.6f}" if present else "")
            writer.writerow(row)

    pooled_payload: dict[str, object] = {"per_seed": []}
    pooled_values: dict[str, list[float]] = {name: [] for name in metric_names}
    pool_notes: list[str] = []
    for j in sorted(pooled_rows):
        rows = pooled_rows[j]
        ranked = RankedList.from_records(rows)
        mols = {rid: by_id[rid].mol for rid, _, _ in rows}
        values = _cell_metrics(ranked, mols, config, pool_notes, f"pooled/seed{j}")
        pooled_payload["per_seed"].append(
            {"seed": j, **{name: round(values[name], 6) for name in values}}
        )
        for name, value in values.items():
            pooled_values[name].append(value)
    pooled_payload["mean"] = {
        name: round(float(np.mean(vals)), 6)
        for name, vals in pooled_values.items()
        if vals
    }
    pooled_payload["std"] = {
        name: round(float(np.std(vals)), 6)
        for name, vals in pooled_values.items()
        if vals
    }
    notes.extend(pool_notes)
    with open(report_dir / "pooled_metrics.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(pooled_payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(report_dir / "lambda_sweep.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["lambda", "ef100_before", "ef100_after", "sd100_before", "sd100_after"]
        )
        if sweeps:
            for idx, lam in enumerate(config.lambda_grid):
                reports = [sweep[idx] for sweep in sweeps]
                writer.writerow(
                    [
                        f"{lam:g}",
                        f"{np.mean([r.ef_before for r in reports]):.6f}",
                        f"{np.mean([r.ef_after for r in reports]):.6f}",
                        f"{np.mean([r.sd_before for r in reports]):.6f}",
                        f"{np.mean([r.sd_after for r in reports]):.6f}",
                    ]
                )

    with open(report_dir / "umap_input.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "origin", "label", "fp_hex"])
        for record in assay.records:
            fp = ecfp(record.mol, radius=config.radius, nbits=config.nbits)
            writer.writerow([record.record_id, "assay", record.label, fp.to_hex()])
        for gen_id, mol in generated_for_umap:
            fp = ecfp(mol, radius=config.radius, nbits=config.nbits)
            writer.writerow([gen_id, "generated", "", fp.to_hex()])

    unique_notes = list(dict.fromkeys(notes))
    with open(report_dir / "notes.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"notes": unique_notes}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_scores_csv(path: Path) -> list[tuple[str, str, float, int]]:
    rows: list[tuple[str, str, float, int]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["id", "smiles", "score", "label"]:
            raise ValueError(f"{path}: unexpected scores header {header!r}")
        for row in reader:
            rows.append((row[0], row[1], float(row[2]), int(row[3])))
    return rows


def rebuild_report(run_dir: str | Path) -> Path:
    """Regenerate the report tables of an existing run from its artifacts.

    Re-reads per-cell scores and rerank files; no model is retrained. The
    manifest is rewritten afterwards so the hashes stay in step (seeds are
    carried over from the previous manifest when present).
    """
    run_dir = Path(run_dir)
    config = load_config(run_dir / "config.ini")
    config_text = (run_dir / "config.ini").read_text(encoding="utf-8")
    assay = ingest(config.assay)
    by_id = {r.record_id: r for r in assay.records}

    k = config.top_k
    metric_names = ["logauc", "bedroc", f"ef{k}", f"dcg{k}", f"sd{k}"]
    # Keep run-time notes (for example rerank-skip reasons) that cannot be
    # reconstructed from the surviving artifacts.
    notes: list[str] = []
    notes_path = run_dir / "report" / "notes.json"
    if notes_path.exists():
        notes = list(json.loads(notes_path.read_text(encoding="utf-8")).get("notes", []))
    cell_rows: list[tuple[int, int, dict[str, float]]] = []
    sweeps: list = []
    pooled_rows: dict[int, list[tuple[str, float, int]]] = {}
    generated_for_umap: list[tuple[str, MolGraph]] = []

    for split_dir in sorted((run_dir / "splits").glob("split*")):
        i = int(split_dir.name[len("split"):])
        generated = split_dir / "generated.csv"
        if generated.exists():
            with open(generated, "r", encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                next(reader)
                for row in reader:
                    if int(row[3]):
                        generated_for_umap.append(
                            (f"s{i}_{row[0]}", parse_smiles(row[1]))
                        )
        for cell_dir in sorted(split_dir.glob("seed*")):
            j = int(cell_dir.name[len("seed"):])
            rows = _read_scores_csv(cell_dir / "scores.csv")
            ranked = RankedList.from_records((r, s, y) for r, _, s, y in rows)
            mols_by_id = {r: by_id[r].mol for r, _, _, _ in rows}
            where = f"split{i}/seed{j}"
            values = _cell_metrics(ranked, mols_by_id, config, notes, where)
            write_metric_report(cell_dir / "metrics.json", values)
            cell_rows.append((i, j, values))
            sweep = _read_sweep_csv(cell_dir / "rerank.csv")
            if sweep is not None:
                sweeps.append(sweep)
            pooled_rows.setdefault(j, []).extend((r, s, y) for r, _, s, y in rows)

    _write_report(
        run_dir,
        config,
        assay,
        metric_names,
        cell_rows,
        sweeps,
        pooled_rows,
        generated_for_umap,
        notes,
    )

    seeds_used: dict[str, object] = {"root": config.seed}
    manifest_path = run_dir / "manifest.json"
    if manifest_path.exists():
        previous = json.loads(manifest_path.read_text(encoding="utf-8"))
        seeds_used = previous.get("seeds", seeds_used)
    assay_hash = hashlib.sha256(Path(config.assay).read_bytes()).hexdigest()
    _write_manifest(run_dir, config_text, assay, seeds_used, assay_hash)
    return run_dir


def _read_sweep_csv(path: Path):
    """Parse a per-cell rerank csv back into row tuples; None when empty."""
    if not path.exists():
        return None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = [
            LambdaReport(
                lam=float(row[0]),
                ef_before=float(row[1]),
                ef_after=float(row[2]),
                sd_before=float(row[3]),
                sd_after=float(row[4]),
            )
            for row in reader
        ]
    return rows or None


def _write_manifest(
    run_dir: Path,
    config_text: str,
    assay: Assay,
    seeds_used: dict[str, object],
    assay_sha256: str,
) -> None:
    from .. import __version__

    files: dict[str, str] = {}
    for path in sorted(run_dir.rglob("*")):
        if not path.is_file() or path.name == "manifest.json":
            continue
        files[path.relative_to(run_dir).as_posix()] = hashlib.sha256(
            path.read_bytes()
        ).hexdigest()
    manifest = {
        "config_sha256": hashlib.sha256(config_text.encode("utf-8")).hexdigest(),
        "assay_sha256": assay_sha256,
        "deck": {
            "n_records": assay.size,
            "n_actives": assay.n_actives,
            "n_quarantined": len(assay.quarantined),
        },
        "files": files,
        "package": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seeds": seeds_used,
    }
    with open(run_dir / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
