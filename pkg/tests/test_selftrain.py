from __future__ import annotations

import math

import numpy as np
import pytest

from scaffscreen.chem import parse_smiles
from scaffscreen.metrics import RankedList, bedroc
from scaffscreen.selftrain import (
    CHECKPOINT_VERSION,
    DegenerateData,
    FingerprintClassifier,
    LabeledSet,
    SelfTrainConfig,
    load_checkpoint,
    loss_and_grad,
    predict,
    pseudo_label,
    save_checkpoint,
    self_train,
    train_epoch,
    write_history_csv,
)

ACTIVE_SMILES = [
    "c1ccccc1",
    "Cc1ccccc1",
    "CCc1ccccc1",
    "c1ccncc1",
    "Cc1ccncc1",
    "Oc1ccccc1",
]
INACTIVE_SMILES = ["CCO", "CCC", "CCCC", "CCN", "CCOC", "CC(C)C"]


def _labeled(actives, inactives, origin="original") -> LabeledSet:
    smiles = list(actives) + list(inactives)
    labels = np.array([1] * len(actives) + [0] * len(inactives), dtype=np.int64)
    return LabeledSet(
        ids=tuple(f"x{i}" for i in range(len(smiles))),
        molecules=tuple(parse_smiles(s) for s in smiles),
        labels=labels,
        origin=origin,
    )


TRAIN = _labeled(ACTIVE_SMILES, INACTIVE_SMILES)
VALIDATION = _labeled(["CCc1ccncc1", "Clc1ccccc1"], ["CCCO", "CCCN"])


# --- loss and gradient --------------------------------------------------


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(0)
    eps = 1e-6
    for _ in range(10):
        m, d = 12, 8
        features = (rng.random((m, d)) < 0.3).astype(np.float64)
        labels = rng.integers(2, size=m).astype(np.int64)
        weights = rng.normal(size=d)
        bias = float(rng.normal())
        _, grad_w, grad_b = loss_and_grad(weights, bias, features, labels, 0.05)
        for k in range(d):
            bump = np.zeros(d)
            bump[k] = eps
            up = loss_and_grad(weights + bump, bias, features, labels, 0.05)[0]
            down = loss_and_grad(weights - bump, bias, features, labels, 0.05)[0]
            assert (up - down) / (2 * eps) == pytest.approx(grad_w[k], rel=1e-5, abs=1e-8)
        up = loss_and_grad(weights, bias + eps, features, labels, 0.05)[0]
        down = loss_and_grad(weights, bias - eps, features, labels, 0.05)[0]
        assert (up - down) / (2 * eps) == pytest.approx(grad_b, rel=1e-5, abs=1e-8)


def test_loss_closed_form_on_a_tiny_case():
    features = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    labels = np.array([1, 0, 1])
    weights = np.array([0.4, -0.3])
    bias = 0.1
    l2 = 0.2
    z = [0.5, 0.2, -0.2]
    expected = (
        sum(math.log1p(math.exp(zi)) - yi * zi for zi, yi in zip(z, labels)) / 3
        + 0.5 * l2 * (0.4**2 + 0.3**2)
    )
    loss, _, _ = loss_and_grad(weights, bias, features, labels, l2)
    assert loss == pytest.approx(expected, rel=1e-12)


def test_zero_model_loss_is_log_two():
    features = np.array([[1.0, 0.0], [0.0, 1.0]])
    labels = np.array([1, 0])
    loss, _, _ = loss_and_grad(np.zeros(2), 0.0, features, labels, 0.0)
    assert loss == pytest.approx(math.log(2.0), rel=1e-12)


# --- basic training -----------------------------------------------------


def test_training_separates_an_easy_problem():
    config = SelfTrainConfig(
        epochs=30, warmup_epochs=30, nbits=256, learning_rate=0.5, seed=1
    )
    model, history = self_train(TRAIN, (), (), VALIDATION, config)
    logits = predict(model, TRAIN.molecules)
    actives = logits[TRAIN.labels == 1]
    inactives = logits[TRAIN.labels == 0]
    assert actives.min() > inactives.max()
    assert len(history) == 30
    assert history[-1].loss < history[0].loss


def test_train_epoch_reduces_loss_in_place():
    model = FingerprintClassifier(nbits=256)
    first = train_epoch(model, TRAIN, learning_rate=0.5, seed=0)
    second = train_epoch(model, TRAIN, learning_rate=0.5, seed=1)
    assert second < first
    assert model.weights.any()


def test_train_epoch_requires_both_classes():
    lopsided = _labeled(ACTIVE_SMILES, [])
    model = FingerprintClassifier(nbits=256)
    with pytest.raises(DegenerateData):
        train_epoch(model, lopsided, learning_rate=0.1)


def test_self_train_requires_mixed_validation():
    config = SelfTrainConfig(epochs=2, warmup_epochs=0, nbits=256)
    with pytest.raises(DegenerateData):
        self_train(TRAIN, (), (), _labeled(["c1ccccc1"], []), config)


def test_predict_on_empty_input():
    model = FingerprintClassifier(nbits=128)
    assert predict(model, []).shape == (0,)


def test_classifier_weight_width_is_checked():
    with pytest.raises(ValueError):
        FingerprintClassifier(nbits=128, weights=np.zeros(64))


# --- pseudo-labeling ----------------------------------------------------


def test_confidence_gate_is_strict():
    # Zero weights leave the logit equal to the bias, so the confidence is
    # exactly sigmoid(bias) for every molecule.
    model = FingerprintClassifier(nbits=128, bias=0.0)
    pool = tuple(parse_smiles(s) for s in ACTIVE_SMILES)
    ids = tuple(f"g{i}" for i in range(len(pool)))
    at_threshold = pseudo_label(model, ids, pool, confidence_threshold=0.5)
    assert at_threshold.size == 0
    below = pseudo_label(model, ids, pool, confidence_threshold=0.4999)
    assert below.size == len(pool)
    assert below.origin == "pseudo"
    assert (below.labels == 1).all()
    assert below.ids == ids


def test_threshold_one_admits_nothing():
    model = FingerprintClassifier(nbits=128, bias=30.0)
    pool = tuple(parse_smiles(s) for s in ACTIVE_SMILES)
    ids = tuple(f"g{i}" for i in range(len(pool)))
    assert pseudo_label(model, ids, pool, confidence_threshold=1.0).size == 0


def test_lower_thresholds_admit_supersets():
    rng = np.random.default_rng(5)
    model = FingerprintClassifier(nbits=128, weights=rng.normal(size=128), bias=0.0)
    pool = tuple(parse_smiles(s) for s in ACTIVE_SMILES + INACTIVE_SMILES)
    ids = tuple(f"g{i}" for i in range(len(pool)))
    loose = set(pseudo_label(model, ids, pool, confidence_threshold=0.3).ids)
    tight = set(pseudo_label(model, ids, pool, confidence_threshold=0.7).ids)
    assert tight <= loose


def test_pseudo_label_validation():
    model = FingerprintClassifier(nbits=128)
    pool = (parse_smiles("CCO"),)
    with pytest.raises(ValueError):
        pseudo_label(model, ("a",), pool, confidence_threshold=0.0)
    with pytest.raises(ValueError):
        pseudo_label(model, ("a",), pool, confidence_threshold=1.2)
    with pytest.raises(ValueError):
        pseudo_label(model, ("a", "b"), pool, confidence_threshold=0.5)
    empty = pseudo_label(model, (), (), confidence_threshold=0.5)
    assert empty.size == 0
    assert empty.origin == "pseudo"


# --- self-training schedule ---------------------------------------------


def test_pool_refresh_obeys_warmup_and_cadence():
    pool = tuple(parse_smiles(s) for s in ACTIVE_SMILES * 3)
    ids = tuple(f"g{i}" for i in range(len(pool)))
    config = SelfTrainConfig(
        epochs=12,
        warmup_epochs=4,
        refresh_period=5,
        confidence_threshold=0.2,
        nbits=256,
        learning_rate=0.5,
        seed=2,
    )
    _, history = self_train(TRAIN, ids, pool, VALIDATION, config)
    refresh_epochs = {5, 10}
    for record in history:
        if record.epoch < config.warmup_epochs:
            assert record.n_pseudo == 0
        if record.epoch not in refresh_epochs and record.epoch > 0:
            assert record.n_pseudo == history[record.epoch - 1].n_pseudo
    # The easy pool is admitted once the gate opens.
    assert history[5].n_pseudo > 0


def test_threshold_one_equals_empty_pool_exactly():
    pool = tuple(parse_smiles(s) for s in ACTIVE_SMILES * 2)
    ids = tuple(f"g{i}" for i in range(len(pool)))
    config = SelfTrainConfig(
        epochs=10, warmup_epochs=2, confidence_threshold=1.0, nbits=256, seed=3
    )
    gated, gated_history = self_train(TRAIN, ids, pool, VALIDATION, config)
    plain, plain_history = self_train(TRAIN, (), (), VALIDATION, config)
    assert (gated.weights == plain.weights).all()
    assert gated.bias == plain.bias
    assert gated_history == plain_history
    assert all(record.n_pseudo == 0 for record in gated_history)


def test_self_training_is_deterministic():
    # Small batches make the shuffled batch composition part of the result,
    # so the seed has an observable effect to pin down.
    pool = tuple(parse_smiles(s) for s in ACTIVE_SMILES)
    ids = tuple(f"g{i}" for i in range(len(pool)))
    config = SelfTrainConfig(
        epochs=8, warmup_epochs=2, confidence_threshold=0.3, nbits=256,
        batch_size=4, seed=4,
    )
    first, first_history = self_train(TRAIN, ids, pool, VALIDATION, config)
    second, second_history = self_train(TRAIN, ids, pool, VALIDATION, config)
    assert (first.weights == second.weights).all()
    assert first.bias == second.bias
    assert first_history == second_history
    other, _ = self_train(
        TRAIN, ids, pool, VALIDATION, SelfTrainConfig(
            epochs=8, warmup_epochs=2, confidence_threshold=0.3, nbits=256,
            batch_size=4, seed=5,
        )
    )
    assert not (first.weights == other.weights).all()


def test_returned_model_attains_the_best_validation_score():
    config = SelfTrainConfig(epochs=15, warmup_epochs=15, nbits=256, seed=6)
    model, history = self_train(TRAIN, (), (), VALIDATION, config)
    logits = predict(model, VALIDATION.molecules)
    ranked = RankedList.from_records(
        (rid, float(z), int(y))
        for rid, z, y in zip(VALIDATION.ids, logits, VALIDATION.labels)
    )
    assert bedroc(ranked) == max(record.val_bedroc for record in history)


def test_learning_rate_decay_endpoints():
    config = SelfTrainConfig(epochs=10, warmup_epochs=0, learning_rate=0.2)
    rates = [config.learning_rate_at(e) for e in range(10)]
    assert rates[0] == 0.2
    assert all(a > b for a, b in zip(rates, rates[1:]))
    assert config.learning_rate_at(10) == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        SelfTrainConfig(epochs=0)
    with pytest.raises(ValueError):
        SelfTrainConfig(epochs=5, warmup_epochs=6)
    with pytest.raises(ValueError):
        SelfTrainConfig(refresh_period=0)
    with pytest.raises(ValueError):
        SelfTrainConfig(confidence_threshold=0.0)
    with pytest.raises(ValueError):
        SelfTrainConfig(confidence_threshold=1.5)


# --- labeled sets -------------------------------------------------------


def test_labeled_set_validation():
    mols = (parse_smiles("CCO"),)
    with pytest.raises(ValueError):
        LabeledSet(ids=("a", "b"), molecules=mols, labels=np.array([0]))
    with pytest.raises(ValueError):
        LabeledSet(ids=("a",), molecules=mols, labels=np.array([2]))
    with pytest.raises(ValueError):
        LabeledSet(ids=("a",), molecules=mols, labels=np.array([1]), origin="guessed")
    half = _labeled(["c1ccccc1"], ["CCO"])
    assert half.active_fraction == 0.5
    assert LabeledSet(ids=(), molecules=(), labels=np.zeros(0)).active_fraction == 0.0


# --- persistence --------------------------------------------------------


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    model = FingerprintClassifier(
        radius=3, nbits=128, weights=rng.normal(size=128), bias=-0.75
    )
    path = tmp_path / "model.json"
    save_checkpoint(path, model)
    loaded = load_checkpoint(path)
    assert loaded.radius == 3
    assert loaded.nbits == 128
    assert loaded.bias == -0.75
    assert (loaded.weights == model.weights).all()


def test_checkpoint_version_gate(tmp_path):
    model = FingerprintClassifier(nbits=128)
    path = tmp_path / "model.json"
    save_checkpoint(path, model)
    text = path.read_text().replace(
        f'"version": {CHECKPOINT_VERSION}', f'"version": {CHECKPOINT_VERSION + 1}'
    )
    path.write_text(text)
    with pytest.raises(ValueError, match="version"):
        load_checkpoint(path)


def test_history_csv_preserves_floats_exactly(tmp_path):
    config = SelfTrainConfig(epochs=3, warmup_epochs=3, nbits=256, seed=9)
    _, history = self_train(TRAIN, (), (), VALIDATION, config)
    path = tmp_path / "history.csv"
    write_history_csv(path, history)
    lines = path.read_text().splitlines()
    assert lines[0] == "epoch,loss,val_bedroc,n_pseudo"
    assert len(lines) == 4
    for line, record in zip(lines[1:], history):
        epoch, loss, val_bedroc, n_pseudo = line.split(",")
        assert int(epoch) == record.epoch
        assert float(loss) == record.loss
        assert float(val_bedroc) == record.val_bedroc
        assert int(n_pseudo) == record.n_pseudo
