"""Diversity-aware reranking of screening hits by maximal marginal relevance.

Candidates are the positively scored records (logit > 0), kept in
descending score order (ties by input position) and capped. Selection is
greedy: the top-scoring candidate seeds the list, then each step adds the
candidate maximizing

    lambda * sigmoid(score) - (1 - lambda) * max_similarity_to_selected

where similarity is Tanimoto over scaffold fingerprints, so the tradeoff
is between predicted activity and scaffold novelty. Ties go to the higher
raw score, then to the earlier input position. With lambda = 1 the
original score order is reproduced exactly; the first pick never depends
on lambda.

Whole-molecule fingerprints can be substituted for scaffold fingerprints
via ``build_candidates(..., use_scaffold=False)`` for comparison runs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chem.graph import MolGraph
from .chem.scaffold import murcko_scaffold
from .fingerprints import DEFAULT_NBITS, DEFAULT_RADIUS, Fingerprint, ecfp, tanimoto
from .metrics import DegenerateLabels, RankedList, pairwise_mean_tanimoto

__all__ = [
    "CandidateSet",
    "DEFAULT_CANDIDATE_CAP",
    "EmptyCandidates",
    "LambdaReport",
    "RerankedSet",
    "build_candidates",
    "lambda_sweep",
    "mmr_rerank",
    "rerank_report",
    "write_sweep_csv",
]

DEFAULT_CANDIDATE_CAP = 500
DEFAULT_LAMBDA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


class EmptyCandidates(ValueError):
    """No record scored positive; reranking has nothing to work with."""


@dataclass(frozen=True)
class CandidateSet:
    """Positively scored records in descending score order, with fingerprints."""

    ids: tuple[str, ...]
    scores: np.ndarray
    fingerprints: tuple[Fingerprint, ...]

    @property
    def size(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class RerankedSet:
    """A permutation of the candidate ids with the greedy objective values."""

    ids: tuple[str, ...]
    objective: np.ndarray
    lam: float
    candidates: CandidateSet


def candidate_fingerprint(
    mol: MolGraph,
    use_scaffold: bool = True,
    radius: int = DEFAULT_RADIUS,
    nbits: int = DEFAULT_NBITS,
) -> Fingerprint:
    target = murcko_scaffold(mol) if use_scaffold else mol
    return ecfp(target, radius=radius, nbits=nbits)


def build_candidates(
    ids: Sequence[str],
    scores: Sequence[float],
    fingerprints: Sequence[Fingerprint],
    cap: int = DEFAULT_CANDIDATE_CAP,
) -> CandidateSet:
    """Filter to positive scores, sort descending (stable), truncate to ``cap``."""
    if not (len(ids) == len(scores) == len(fingerprints)):
        raise ValueError("ids, scores and fingerprints must align")
    if cap < 1:
        raise ValueError("cap must be positive")
    positive = [k for k, s in enumerate(scores) if s > 0.0]
    if not positive:
        raise EmptyCandidates("no record has a positive score")
    positive.sort(key=lambda k: -scores[k])
    positive = positive[:cap]
    return CandidateSet(
        ids=tuple(ids[k] for k in positive),
        scores=np.array([scores[k] for k in positive], dtype=np.float64),
        fingerprints=tuple(fingerprints[k] for k in positive),
    )


def mmr_rerank(candidates: CandidateSet, lam: float) -> RerankedSet:
    """Greedy maximal-marginal-relevance ordering of the candidate set."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    size = candidates.size
    relevance = np.array([1.0 / (1.0 + math.exp(-s)) for s in candidates.scores])
    remaining = list(range(size))
    max_sim = np.zeros(size)
    order: list[int] = []
    objective: list[float] = []

    # Seed with the highest raw score; candidates are already sorted with
    # deterministic tie-breaks, so that is position 0.
    def take(pos_in_remaining: int, value: float) -> None:
        chosen = remaining.pop(pos_in_remaining)
        order.append(chosen)
        objective.append(value)
        for k in remaining:
            sim = tanimoto(candidates.fingerprints[chosen], candidates.fingerprints[k])
            if sim > max_sim[k]:
                max_sim[k] = sim

    take(0, float(lam * relevance[0]))
    while remaining:
        best_pos = 0
        best_key: tuple[float, float, int] | None = None
        for pos, k in enumerate(remaining):
            value = lam * relevance[k] - (1.0 - lam) * max_sim[k]
            # Higher objective, then higher raw score, then earlier input position.
            key = (value, candidates.scores[k], -k)
            if best_key is None or key > best_key:
                best_key = key
                best_pos = pos
        assert best_key is not None
        take(best_pos, best_key[0])

    return RerankedSet(
        ids=tuple(candidates.ids[k] for k in order),
        objective=np.array(objective),
        lam=lam,
        candidates=candidates,
    )


@dataclass(frozen=True)
class LambdaReport:
    lam: float
    ef_before: float
    ef_after: float
    sd_before: float
    sd_after: float


def _diversity(fps: Sequence[Fingerprint]) -> float:
    return 1.0 - pairwise_mean_tanimoto(fps)


def rerank_report(
    original: RankedList, reranked: RerankedSet, k: int = 100
) -> LambdaReport:
    """Paired enrichment and scaffold diversity at depth k, before vs after.

    "Before" is the candidate (score) order; "after" is the reranked
    order. Enrichment uses the full original ranking as the baseline
    population.
    """
    candidates = reranked.candidates
    if k > candidates.size:
        raise ValueError(f"k={k} exceeds the candidate set size {candidates.size}")
    if original.n_actives == 0:
        raise DegenerateLabels("enrichment needs at least one active in the baseline")
    label_of = dict(zip(original.ids, (int(v) for v in original.labels)))
    base_rate = original.n_actives / original.n_records

    def ef_of(ids: Sequence[str]) -> float:
        hits = sum(label_of[i] for i in ids[:k])
        return (hits / k) / base_rate

    fp_of = dict(zip(candidates.ids, candidates.fingerprints))
    return LambdaReport(
        lam=reranked.lam,
        ef_before=ef_of(candidates.ids),
        ef_after=ef_of(reranked.ids),
        sd_before=_diversity([fp_of[i] for i in candidates.ids[:k]]),
        sd_after=_diversity([fp_of[i] for i in reranked.ids[:k]]),
    )


def lambda_sweep(
    original: RankedList,
    candidates: CandidateSet,
    lambdas: Sequence[float] = DEFAULT_LAMBDA_GRID,
    k: int = 100,
) -> list[LambdaReport]:
    return [
        rerank_report(original, mmr_rerank(candidates, lam), k=k) for lam in lambdas
    ]


def write_sweep_csv(path, reports: Sequence[LambdaReport]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["lambda", "ef100_before", "ef100_after", "sd100_before", "sd100_after"]
        )
        for report in reports:
            writer.writerow(
                [
                    f"{report.lam:g}",
                    f"{report.ef_before:.6f}",
                    f"{report.ef_after:.6f}",
                    f"{report.sd_before:.6f}",
                    f"{report.sd_after:.6f}",
                ]
            )
