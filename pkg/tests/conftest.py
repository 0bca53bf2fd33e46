from __future__ import annotations

from pathlib import Path

import pytest

from scaffscreen.pipeline.synthetic import (
    SyntheticDeck,
    make_benchmark_deck,
    make_split_corpus,
    write_deck_csv,
)

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def benchmark_deck() -> SyntheticDeck:
    return make_benchmark_deck()


@pytest.fixture(scope="session")
def benchmark_deck_csv(benchmark_deck, tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("deck") / "benchmark_deck.csv"
    write_deck_csv(benchmark_deck, path)
    return path


@pytest.fixture(scope="session")
def split_corpus() -> SyntheticDeck:
    return make_split_corpus()


@pytest.fixture(scope="session")
def split_corpus_csv() -> Path:
    """The committed 500-record corpus; regeneration equality is its own test."""
    return DATA_DIR / "split_corpus_500.csv"
