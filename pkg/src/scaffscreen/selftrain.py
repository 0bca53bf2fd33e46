"""Confidence-gated self-training for a fingerprint logistic classifier.

The classifier is logistic regression over folded circular fingerprints,
fit by minibatch gradient descent on binary cross entropy with an L2
penalty on the weights. Loss and gradient share one code path
(:func:`loss_and_grad`) so the gradient can be audited against finite
differences.

Self-training proceeds in epochs. For the first ``warmup_epochs`` only the
labeled set is used. Afterwards, on every epoch divisible by
``refresh_period``, the generated pool is rescored and the entries whose
predicted probability exceeds ``confidence_threshold`` join the training
set as pseudo-actives (class 1; generation starts from active scaffolds,
so no pseudo-inactives are ever minted). The minority class is oversampled
with replacement to a 1:1 ratio each epoch. The learning rate follows a
polynomial decay, lr0 * (1 - epoch / epochs) ** 0.9, and the model kept is
the one with the best validation BEDROC (earliest epoch on ties).

Everything is driven by explicit seeds; identical configuration and data
reproduce the history and weights bit for bit.
"""

from __future__ import annotations

import copy
import csv
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chem.graph import MolGraph
from .fingerprints import DEFAULT_NBITS, DEFAULT_RADIUS, ecfp
from .metrics import RankedList, bedroc

__all__ = [
    "CHECKPOINT_VERSION",
    "DegenerateData",
    "EpochRecord",
    "FingerprintClassifier",
    "LabeledSet",
    "SelfTrainConfig",
    "load_checkpoint",
    "loss_and_grad",
    "predict",
    "pseudo_label",
    "save_checkpoint",
    "self_train",
    "train_epoch",
    "write_history_csv",
]

CHECKPOINT_VERSION = 1


class DegenerateData(ValueError):
    """Raised when training data lacks one of the two classes."""


@dataclass(frozen=True)
class LabeledSet:
    """Molecules with binary labels; origin tags original vs pseudo-labeled data."""

    ids: tuple[str, ...]
    molecules: tuple[MolGraph, ...]
    labels: np.ndarray
    origin: str = "original"

    def __post_init__(self) -> None:
        if not (len(self.ids) == len(self.molecules) == len(self.labels)):
            raise ValueError("ids, molecules and labels must align")
        if self.origin not in ("original", "pseudo"):
            raise ValueError(f"unknown origin {self.origin!r}")
        labels = np.asarray(self.labels, dtype=np.int64)
        if len(labels) and not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be binary")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return len(self.molecules)

    @property
    def active_fraction(self) -> float:
        return float(self.labels.mean()) if self.size else 0.0


@dataclass
class FingerprintClassifier:
    """Logistic regression over folded fingerprints."""

    radius: int = DEFAULT_RADIUS
    nbits: int = DEFAULT_NBITS
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]
    bias: float = 0.0

    def __post_init__(self) -> None:
        if self.weights is None:
            self.weights = np.zeros(self.nbits, dtype=np.float64)
        if self.weights.shape != (self.nbits,):
            raise ValueError("weight vector width must equal nbits")

    def featurize(self, mols: Sequence[MolGraph]) -> np.ndarray:
        return np.stack(
            [ecfp(m, radius=self.radius, nbits=self.nbits).to_array() for m in mols]
        )

    def logits(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights + self.bias


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_grad(
    weights: np.ndarray,
    bias: float,
    features: np.ndarray,
    labels: np.ndarray,
    l2_penalty: float,
) -> tuple[float, np.ndarray, float]:
    """Mean binary cross entropy plus L2 on the weights, with its gradient.

    Returns ``(loss, grad_weights, grad_bias)``. The penalty term is
    0.5 * l2 * ||w||^2; the bias is not penalized.
    """
    z = features @ weights + bias
    # log(1 + exp(z)) - y 'z, computed stably via softplus.
    softplus = np.logaddexp(0.0, z)
    data_loss = float((softplus - labels * z).mean())
    loss = data_loss + 0.5 * l2_penalty * float(weights @ weights)
    residual = _sigmoid(z) - labels
    grad_w = features.T @ residual / len(labels) + l2_penalty * weights
    grad_b = float(residual.mean())
    return loss, grad_w, grad_b


def _oversample_to_balance(
    labels: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Index array with the minority class duplicated (with replacement) to 1:1."""
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == 0)
    if len(pos) == 0 or len(neg) == 0:
        raise DegenerateData("training data must contain both classes")
    if len(pos) == len(neg):
        return np.arange(len(labels))
    minority, majority = (pos, neg) if len(pos) < len(neg) else (neg, pos)
    extra = rng.choice(minority, size=len(majority) - len(minority), replace=True)
    return np.concatenate([np.arange(len(labels)), extra])


def _run_epoch_on_features(
    model: FingerprintClassifier,
    features: np.ndarray,
    labels: np.ndarray,
    learning_rate: float,
    l2_penalty: float,
    batch_size: int,
    rng: np.random.Generator,
) -> float:
    indices = _oversample_to_balance(labels, rng)
    rng.shuffle(indices)
    losses = []
    for start in range(0, len(indices), batch_size):
        batch = indices[start : start + batch_size]
        loss, grad_w, grad_b = loss_and_grad(
            model.weights, model.bias, features[batch], labels[batch], l2_penalty
        )
        model.weights = model.weights - learning_rate * grad_w
        model.bias = model.bias - learning_rate * grad_b
        losses.append(loss)
    return float(np.mean(losses))


def train_epoch(
    model: FingerprintClassifier,
    data: LabeledSet,
    learning_rate: float,
    seed: int | np.random.Generator = 0,
    l2_penalty: float = 1e-4,
    batch_size: int = 128,
) -> float:
    """One in-place pass of balanced minibatch gradient descent; returns mean loss."""
    features = model.featurize(data.molecules)
    rng = np.random.default_rng(seed)
    return _run_epoch_on_features(
        model, features, data.labels, learning_rate, l2_penalty, batch_size, rng
    )


def predict(model: FingerprintClassifier, mols: Sequence[MolGraph]) -> np.ndarray:
    """Raw logits, one per molecule."""
    if not mols:
        return np.zeros(0, dtype=np.float64)
    return model.logits(model.featurize(mols))


def pseudo_label(
    model: FingerprintClassifier,
    pool_ids: Sequence[str],
    pool: Sequence[MolGraph],
    confidence_threshold: float,
) -> LabeledSet:
    """Entries of ``pool`` scored above the confidence threshold, as pseudo-actives."""
    if not 0.0 < confidence_threshold <= 1.0:
        raise ValueError("confidence threshold must lie in (0, 1]")
    if len(pool_ids) != len(pool):
        raise ValueError("pool ids and molecules must align")
    if not pool:
        return LabeledSet(ids=(), molecules=(), labels=np.zeros(0), origin="pseudo")
    confidence = _sigmoid(predict(model, pool))
    chosen = np.flatnonzero(confidence > confidence_threshold)
    return LabeledSet(
        ids=tuple(pool_ids[int(i)] for i in chosen),
        molecules=tuple(pool[int(i)] for i in chosen),
        labels=np.ones(len(chosen), dtype=np.int64),
        origin="pseudo",
    )


@dataclass(frozen=True)
class SelfTrainConfig:
    epochs: int = 100
    warmup_epochs: int = 20
    refresh_period: int = 5
    confidence_threshold: float = 0.9
    learning_rate: float = 0.1
    l2_penalty: float = 1e-4
    batch_size: int = 128
    lr_decay_power: float = 0.9
    radius: int = DEFAULT_RADIUS
    nbits: int = DEFAULT_NBITS
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if not 0 <= self.warmup_epochs <= self.epochs:
            raise ValueError("warmup_epochs must lie in [0, epochs]")
        if self.refresh_period < 1:
            raise ValueError("refresh_period must be positive")
        if not 0.0 < self.confidence_threshold <= 1.0:
            raise ValueError("confidence threshold must lie in (0, 1]")

    def learning_rate_at(self, epoch: int) -> float:
        return self.learning_rate * (1.0 - epoch / self.epochs) ** self.lr_decay_power


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    val_bedroc: float
    n_pseudo: int


def self_train(
    labeled: LabeledSet,
    pool_ids: Sequence[str],
    pool: Sequence[MolGraph],
    validation: LabeledSet,
    config: SelfTrainConfig,
) -> tuple[FingerprintClassifier, list[EpochRecord]]:
    """Train with periodic confidence-gated pseudo-labeling.

    ``pool`` holds the unlabeled generated molecules; an empty pool reduces
    the procedure to plain supervised training. The returned model is the
    validation-BEDROC argmax over epochs.
    """
    if validation.size == 0 or not 0 < validation.labels.sum() < validation.size:
        raise DegenerateData("validation set needs both an active and an inactive")
    model = FingerprintClassifier(radius=config.radius, nbits=config.nbits)
    features = model.featurize(labeled.molecules)
    pool_features = model.featurize(pool) if len(pool) else np.zeros((0, config.nbits))
    val_features = model.featurize(validation.molecules)

    root = np.random.SeedSequence(config.seed)
    epoch_seeds = root.spawn(config.epochs)

    pseudo_mask = np.zeros(0, dtype=np.int64)
    history: list[EpochRecord] = []
    best_score = -np.inf
    best_model: FingerprintClassifier | None = None

    for epoch in range(config.epochs):
        if epoch >= config.warmup_epochs and epoch % config.refresh_period == 0 and len(pool):
            confidence = _sigmoid(model.logits(pool_features))
            pseudo_mask = np.flatnonzero(confidence > config.confidence_threshold)

        if len(pseudo_mask):
            epoch_features = np.concatenate([features, pool_features[pseudo_mask]])
            epoch_labels = np.concatenate(
                [labeled.labels, np.ones(len(pseudo_mask), dtype=np.int64)]
            )
        else:
            epoch_features = features
            epoch_labels = labeled.labels

        rng = np.random.default_rng(epoch_seeds[epoch])
        loss = _run_epoch_on_features(
            model,
            epoch_features,
            epoch_labels,
            config.learning_rate_at(epoch),
            config.l2_penalty,
            config.batch_size,
            rng,
        )

        val_logits = model.logits(val_features)
        ranked = RankedList.from_records(
            (rid, float(logit), int(label))
            for rid, logit, label in zip(validation.ids, val_logits, validation.labels)
        )
        score = bedroc(ranked)
        history.append(
            EpochRecord(epoch=epoch, loss=loss, val_bedroc=score, n_pseudo=len(pseudo_mask))
        )
        if score > best_score:
            best_score = score
            best_model = copy.deepcopy(model)

    assert best_model is not None
    return best_model, history


def write_history_csv(path, history: Sequence[EpochRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "loss", "val_bedroc", "n_pseudo"])
        for record in history:
            writer.writerow(
                [record.epoch, repr(record.loss), repr(record.val_bedroc), record.n_pseudo]
            )


def save_checkpoint(path, model: FingerprintClassifier) -> None:
    """Versioned JSON checkpoint: feature configuration plus parameters."""
    payload = {
        "version": CHECKPOINT_VERSION,
        "radius": model.radius,
        "nbits": model.nbits,
        "bias": model.bias,
        "weights": model.weights.tolist(),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_checkpoint(path) -> FingerprintClassifier:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("version")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version!r}")
    return FingerprintClassifier(
        radius=payload["radius"],
        nbits=payload["nbits"],
        weights=np.asarray(payload["weights"], dtype=np.float64),
        bias=float(payload["bias"]),
    )
