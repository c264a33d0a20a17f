from __future__ import annotations

import pytest

from labelaudit.corpus import Dataset, make_sentence
from labelaudit.synth import synthesize_corpus


@pytest.fixture(scope="session")
def tiny_corpus() -> Dataset:
    """Three hand-written sentences with two entity types."""
    return Dataset((
        make_sentence(["John", "lives", "in", "Paris"],
                      ["B-PER", "O", "O", "B-LOC"]),
        make_sentence(["Mary", "Smith", "visits", "London"],
                      ["B-PER", "I-PER", "O", "B-LOC"]),
        make_sentence(["nothing", "here"], ["O", "O"]),
    ), "tiny")


@pytest.fixture(scope="session")
def small_synthetic() -> Dataset:
    return synthesize_corpus(120, 40, ["A", "B"], seed=7,
                             phrases_per_type=25)
