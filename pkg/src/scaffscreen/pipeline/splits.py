"""Train/valid/test splitting: rotating random folds and scaffold bins.

Random scheme ("nested cross-validation lite"): records are shuffled once
by seed and dealt into five folds. Split i tests on fold i, validates on
fold (i - 1) mod 5 and trains on the rest, so each record is tested
exactly once across the five splits.

Scaffold scheme: records are binned by the serialized scaffold string
(acyclic molecules share one empty-scaffold bin). Bins holding more than
ten percent of the data go to train outright; the rest are shuffled by
seed, stably sorted by descending size, and dealt greedily to whichever
fold is furthest under its 3:1:1 quota. One scaffold bin never straddles
folds, which is verified after assignment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..chem.scaffold import murcko_scaffold
from ..chem.smiles import to_smiles
from .ingest import Assay, AssayRecord

__all__ = [
    "Split",
    "SplitPlan",
    "TooFewScaffolds",
    "assert_no_scaffold_leakage",
    "make_splits",
    "scaffold_key",
]

N_SPLITS = 5
DOMINANT_BIN_FRACTION = 0.10
FOLD_QUOTAS = {"train": 3.0 / 5.0, "valid": 1.0 / 5.0, "test": 1.0 / 5.0}


class TooFewScaffolds(ValueError):
    """Not enough scaffold bins to populate validation and test folds."""


@dataclass(frozen=True)
class Split:
    train_ids: tuple[str, ...]
    valid_ids: tuple[str, ...]
    test_ids: tuple[str, ...]

    def fold_of(self, record_id: str) -> str:
        if record_id in set(self.train_ids):
            return "train"
        if record_id in set(self.valid_ids):
            return "valid"
        if record_id in set(self.test_ids):
            return "test"
        raise KeyError(record_id)


@dataclass(frozen=True)
class SplitPlan:
    scheme: str
    seed: int
    splits: tuple[Split, ...]

    def to_json(self, path) -> None:
        payload = {
            "scheme": self.scheme,
            "seed": self.seed,
            "splits": [
                {
                    "train": list(s.train_ids),
                    "valid": list(s.valid_ids),
                    "test": list(s.test_ids),
                }
                for s in self.splits
            ],
        }
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "SplitPlan":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return cls(
            scheme=payload["scheme"],
            seed=payload["seed"],
            splits=tuple(
                Split(
                    train_ids=tuple(s["train"]),
                    valid_ids=tuple(s["valid"]),
                    test_ids=tuple(s["test"]),
                )
                for s in payload["splits"]
            ),
        )


def scaffold_key(record: AssayRecord) -> str:
    """Scaffold identity string; empty for acyclic molecules.

    Identity is string-level over this package's deterministic serializer;
    no graph canonicalization is attempted.
    """
    scaffold = murcko_scaffold(record.mol)
    return "" if scaffold is None else to_smiles(scaffold)


def _random_splits(assay: Assay, seed: int) -> tuple[Split, ...]:
    rng = np.random.default_rng(seed)
    ids = [r.record_id for r in assay.records]
    order = rng.permutation(len(ids))
    folds: list[list[str]] = [[] for _ in range(N_SPLITS)]
    for position, idx in enumerate(order):
        folds[position % N_SPLITS].append(ids[idx])
    splits = []
    for i in range(N_SPLITS):
        test = folds[i]
        valid = folds[(i - 1) % N_SPLITS]
        train = [
            rid
            for j in range(N_SPLITS)
            if j not in (i, (i - 1) % N_SPLITS)
            for rid in folds[j]
        ]
        splits.append(
            Split(train_ids=tuple(train), valid_ids=tuple(valid), test_ids=tuple(test))
        )
    return tuple(splits)


def _scaffold_split(assay: Assay, seed: int) -> Split:
    bins: dict[str, list[str]] = {}
    for record in assay.records:
        bins.setdefault(scaffold_key(record), []).append(record.record_id)

    total = assay.size
    train: list[str] = []
    assignable: list[tuple[str, list[str]]] = []
    for key, members in bins.items():
        if len(members) > DOMINANT_BIN_FRACTION * total:
            train.extend(members)
        else:
            assignable.append((key, members))
    if len(assignable) < 2:
        raise TooFewScaffolds(
            f"only {len(assignable)} assignable scaffold bins; cannot fill valid and test"
        )

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(assignable))
    shuffled = [assignable[int(i)] for i in order]
    shuffled.sort(key=lambda item: -len(item[1]))  # stable, keeps shuffle among ties

    folds: dict[str, list[str]] = {"train": train, "valid": [], "test": []}
    for _, members in shuffled:
        deficits = {
            name: FOLD_QUOTAS[name] * total - len(folds[name]) for name in folds
        }
        # Largest deficit wins; ties resolve train > valid > test.
        target = max(folds, key=lambda name: (deficits[name], name == "train", name == "valid"))
        folds[target].extend(members)

    if not folds["valid"] or not folds["test"]:
        raise TooFewScaffolds("scaffold bins too coarse to fill valid and test folds")
    return Split(
        train_ids=tuple(folds["train"]),
        valid_ids=tuple(folds["valid"]),
        test_ids=tuple(folds["test"]),
    )


def make_splits(assay: Assay, scheme: str = "random", n_splits: int = N_SPLITS, seed: int = 0) -> SplitPlan:
    """Build the split plan for an assay under the requested scheme."""
    if n_splits != N_SPLITS:
        raise ValueError(f"the protocol is defined for exactly {N_SPLITS} splits")
    if assay.size < 2 * N_SPLITS:
        raise ValueError("assay too small to split")
    if scheme == "random":
        splits = _random_splits(assay, seed)
    elif scheme == "scaffold":
        splits = tuple(_scaffold_split(assay, seed + i) for i in range(n_splits))
        for i, split in enumerate(splits):
            assert_no_scaffold_leakage(assay, split)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    for split in splits:
        _assert_partition(assay, split)
    return SplitPlan(scheme=scheme, seed=seed, splits=splits)


def _assert_partition(assay: Assay, split: Split) -> None:
    all_ids = {r.record_id for r in assay.records}
    train, valid, test = set(split.train_ids), set(split.valid_ids), set(split.test_ids)
    if train | valid | test != all_ids:
        raise AssertionError("split does not cover the assay")
    if train & valid or train & test or valid & test:
        raise AssertionError("split folds overlap")


def assert_no_scaffold_leakage(assay: Assay, split: Split) -> None:
    """Verify no scaffold string occurs in more than one fold."""
    by_id = {r.record_id: r for r in assay.records}
    fold_scaffolds: dict[str, set[str]] = {"train": set(), "valid": set(), "test": set()}
    for name, ids in (
        ("train", split.train_ids),
        ("valid", split.valid_ids),
        ("test", split.test_ids),
    ):
        for rid in ids:
            fold_scaffolds[name].add(scaffold_key(by_id[rid]))
    overlap = (
        (fold_scaffolds["train"] & fold_scaffolds["valid"])
        | (fold_scaffolds["train"] & fold_scaffolds["test"])
        | (fold_scaffolds["valid"] & fold_scaffolds["test"])
    )
    if overlap:
        sample = sorted(overlap)[:3]
        raise AssertionError(f"scaffold leakage across folds: {sample}")
