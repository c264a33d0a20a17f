"""Feature templates and the emission feature dictionary for the tagger.

A template turns a token position into one string-valued feature. The
model scores (template, value, label) triples; the dictionary maps each
observed (template, value) pair to a row of the emission weight matrix,
whose columns are labels. Unseen pairs score zero.
"""
from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from .corpus import Dataset

DEFAULT_TEMPLATES = (
    "bias", "word", "lower", "shape",
    "prefix1", "prefix2", "prefix3",
    "suffix1", "suffix2", "suffix3",
    "prev", "next",
)

_BOS = "<s>"
_EOS = "</s>"


def word_shape(word: str) -> str:
    """Collapse a word to its character-class shape, squeezing runs.

    Uppercase -> X, lowercase -> x, digit -> d, anything else -> #.
    "Paris-2024" -> "Xx#d".
    """
    shape = []
    for ch in word:
        if ch.isupper():
            cls = "X"
        elif ch.islower():
            cls = "x"
        elif ch.isdigit():
            cls = "d"
        else:
            cls = "#"
        if not shape or shape[-1] != cls:
            shape.append(cls)
    return "".join(shape)


def _position_features(texts: Sequence[str], i: int,
                       templates: Sequence[str]) -> list[tuple[str, str]]:
    word = texts[i]
    feats = []
    for template in templates:
        if template == "bias":
            value = "1"
        elif template == "word":
            value = word
        elif template == "lower":
            value = word.lower()
        elif template == "shape":
            value = word_shape(word)
        elif template.startswith("prefix"):
            value = word[: int(template[6:])]
        elif template.startswith("suffix"):
            value = word[-int(template[6:]):]
        elif template == "prev":
            value = texts[i - 1] if i > 0 else _BOS
        elif template == "next":
            value = texts[i + 1] if i + 1 < len(texts) else _EOS
        else:
            raise ValueError(f"unknown feature template {template!r}")
        feats.append((template, value))
    return feats


def extract_features(texts: Sequence[str],
                     templates: Sequence[str] = DEFAULT_TEMPLATES,
                     ) -> list[list[tuple[str, str]]]:
    """Per-position (template, value) pairs for one token sequence."""
    return [_position_features(texts, i, templates)
            for i in range(len(texts))]


def bio_label_set(entity_types: Iterable[str]) -> tuple[str, ...]:
    """Ordered tagger label set: O first, then B-/I- tags sorted."""
    tags = sorted(f"{kind}-{t}" for t in set(entity_types) for kind in "BI")
    return ("O", *tags)


class FeatureIndex:
    """Emission feature dictionary: (template, value) pairs crossed with
    every label, with deterministic lexicographic row assignment."""

    __slots__ = ("labels", "templates", "pairs")

    def __init__(self, labels: Sequence[str], templates: Sequence[str],
                 pairs: Sequence[tuple[str, str]]):
        self.labels = tuple(labels)
        self.templates = tuple(templates)
        self.pairs: dict[tuple[str, str], int] = {
            pair: row for row, pair in enumerate(pairs)
        }

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    @property
    def size(self) -> int:
        """Number of (template, value, label) emission entries."""
        return len(self.pairs) * len(self.labels)

    def row(self, template: str, value: str) -> int | None:
        return self.pairs.get((template, value))

    def emission_index(self, template: str, value: str,
                       label: str) -> int | None:
        """Flat index of one (template, value, label) weight, or None."""
        row = self.pairs.get((template, value))
        if row is None:
            return None
        return row * len(self.labels) + self.labels.index(label)

    def rows_for(self, texts: Sequence[str],
                 raw: list[list[tuple[str, str]]] | None = None,
                 ) -> list[np.ndarray]:
        """Per-position arrays of known feature rows for a token sequence.

        `raw` may carry the extract_features() output for these texts to
        skip the string work (the caller guarantees it matches).
        """
        if raw is None:
            raw = extract_features(texts, self.templates)
        out = []
        get = self.pairs.get
        for feats in raw:
            rows = [r for r in (get(pair) for pair in feats) if r is not None]
            out.append(np.asarray(rows, dtype=np.intp))
        return out


def build_features(dataset: Dataset,
                   templates: Sequence[str] = DEFAULT_TEMPLATES,
                   min_count: int = 1,
                   raw_features: Sequence[list[list[tuple[str, str]]]] | None = None,
                   ) -> FeatureIndex:
    """Build the feature dictionary from a dataset.

    Keeps every (template, value) pair occurring at least min_count times,
    crossed with every label of the dataset's BIO2 label set; the bias
    template is structural and always kept. Rows are assigned in
    lexicographic (template, value) order, so identical inputs always
    produce identical indices. raw_features may carry precomputed
    extract_features() output aligned with dataset.sentences.
    """
    if len(dataset) == 0:
        raise ValueError("cannot build features from an empty dataset")
    counts: Counter[tuple[str, str]] = Counter()
    for k, sentence in enumerate(dataset.sentences):
        raw = (raw_features[k] if raw_features is not None
               else extract_features(sentence.texts, templates))
        for feats in raw:
            counts.update(feats)
    kept = sorted(p for p, c in counts.items()
                  if c >= min_count or p[0] == "bias")
    labels = bio_label_set(dataset.label_alphabet)
    return FeatureIndex(labels, templates, kept)
