"""Synthetic NER corpora with a consistent labeling codebook, plus seeded
label corruption that violates it.

The generator builds a pronounceable vocabulary and a fixed lexicon of
entity phrases. Every entity word belongs to exactly one phrase and every
phrase has one entity type, so token identity fully determines the gold
label: a consistent codebook exists by construction and is learnable.
Corruption then breaks the codebook in the three ways annotators do:
swapping entity types, shifting a span boundary, or dropping a span.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Dataset, Sentence, Span, make_sentence, render_spans
from .errors import DataError

CORRUPTION_MODES = ("type-permutation", "boundary-shift", "span-drop")


@dataclass(frozen=True)
class CorruptionSpec:
    """How much to corrupt, in which way, under which seed."""

    fraction: float
    mode: str
    seed: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"fraction must be in [0,1], got {self.fraction}")
        if self.mode not in CORRUPTION_MODES:
            raise ValueError(f"unknown mode {self.mode!r}; "
                             f"expected one of {CORRUPTION_MODES}")


_SYLLABLES = tuple(c + v for c in "bdfgklmnprstvz" for v in "aeiou")


def _word_from_index(index: int) -> str:
    """Deterministic distinct pseudo-word for a vocabulary index."""
    syllables = []
    index += len(_SYLLABLES)  # force at least two syllables
    while index:
        index, rem = divmod(index, len(_SYLLABLES))
        syllables.append(_SYLLABLES[rem])
    return "".join(reversed(syllables))


def synthesize_corpus(n_sentences: int, vocab_size: int,
                      entity_types: Sequence[str], seed: int,
                      *,
                      phrases_per_type: int | None = None,
                      zipf_offset: float | None = None,
                      name: str = "synthetic") -> Dataset:
    """Generate a corpus whose labels follow a deterministic codebook.

    Background words are lowercase and always ``O``. Entity mentions are
    capitalized phrases of 1-3 words drawn from a per-type phrase lexicon;
    each phrase word occurs in exactly one phrase, so the mapping
    word -> label is a function. The same seed always yields a
    byte-identical corpus.

    phrases_per_type defaults to ``max(4, vocab_size // 2)``. Larger
    lexicons slow the learning curve down (more novel phrases per extra
    training sentence), which is what the audit protocols want. Phrases
    are used uniformly by default; zipf_offset c instead weights phrase j
    by 1/(j+c) for a frequency-skewed corpus.
    """
    if n_sentences < 1:
        raise ValueError("n_sentences must be >= 1")
    if vocab_size < 10:
        raise ValueError("vocab_size must be >= 10")
    types = tuple(entity_types)
    if not types:
        raise ValueError("at least one entity type is required")
    if len(set(types)) != len(types):
        raise ValueError("entity types must be unique")
    for etype in types:
        if not etype or any(ch.isspace() for ch in etype):
            raise ValueError(f"bad entity type {etype!r}")
    if phrases_per_type is None:
        phrases_per_type = max(4, vocab_size // 2)

    rng = np.random.default_rng(seed)
    # Every 5th background word is capitalized: proper-noun-shaped noise
    # that is still always O, so capitalization alone cannot reveal a label.
    background = [_word_from_index(i).capitalize() if i % 5 == 0
                  else _word_from_index(i) for i in range(vocab_size)]

    # Phrase lexicon: phrase j of a type has 1-3 dedicated capitalized
    # words. The word pool is shuffled before being dealt to types so no
    # affix or shape correlates with the entity type; only word identity
    # carries it, which is what makes the codebook strictly lexical.
    lengths = rng.choice([1, 2, 3], size=phrases_per_type * len(types),
                         p=[0.35, 0.40, 0.25])
    pool = rng.permutation(int(lengths.sum())) + vocab_size
    phrases: dict[str, list[tuple[str, ...]]] = {t: [] for t in types}
    cursor = 0
    for j, length in enumerate(int(x) for x in lengths):
        words = tuple(_word_from_index(int(w)).capitalize()
                      for w in pool[cursor:cursor + length])
        cursor += length
        phrases[types[j % len(types)]].append(words)

    # Mention sampling: every mention is an independent draw from one
    # seed-fixed frequency vector over phrases. Realizing that vector
    # once (Poisson counts around uniform, Zipf-tilted when requested)
    # and sampling all sentences iid from it makes every subset of the
    # corpus an iid sample of the same distribution, so equally sized
    # clean subsets are equally predictive of each other no matter how
    # the corpus is later split. That is the null hypothesis the audit
    # protocols test against.
    n_phrases = phrases_per_type * len(types)
    expected = max(1.0, 1.5 * n_sentences / n_phrases)
    weights = rng.poisson(expected, size=n_phrases).astype(float)
    if zipf_offset is not None:
        weights /= np.arange(n_phrases) % phrases_per_type + zipf_offset
    if weights.sum() == 0:
        weights[:] = 1.0
    weights /= weights.sum()
    all_phrase_ids = [(t, j) for t in types for j in range(phrases_per_type)]

    def draw_phrase() -> tuple[str, tuple[str, ...]]:
        etype, j = all_phrase_ids[int(rng.choice(n_phrases, p=weights))]
        return etype, phrases[etype][j]

    sentences = []
    for _ in range(n_sentences):
        n_mentions = int(rng.integers(1, 3))
        texts: list[str] = []
        labels: list[str] = []

        def background_run(lo: int = 1, hi: int = 5) -> None:
            for _ in range(int(rng.integers(lo, hi))):
                texts.append(background[int(rng.integers(vocab_size))])
                labels.append("O")

        background_run(2, 6)
        for _ in range(n_mentions):
            etype, words = draw_phrase()
            texts.extend(words)
            labels.append(f"B-{etype}")
            labels.extend(f"I-{etype}" for _ in words[1:])
            background_run()
        sentences.append(make_sentence(texts, labels))
    return Dataset(tuple(sentences), name)


def corrupt_labels(dataset: Dataset,
                   spec: CorruptionSpec) -> tuple[Dataset, list[int]]:
    """Corrupt the labels of ``round(fraction * len(dataset))`` sentences.

    Sentences are visited in a seeded random order; a sentence the mode
    cannot apply to is skipped and the next eligible one is taken, so the
    altered count is exact. Modes:

    - type-permutation: apply a fixed derangement of the dataset's entity
      types (a rotation of the sorted alphabet) to every span.
    - boundary-shift: grow or shrink one span boundary by one token,
      whichever move is legal first.
    - span-drop: relabel one span to all ``O``.

    Returns the corrupted dataset and the sorted altered sentence indices.
    Sentences not selected are reused unchanged.
    """
    n_target = int(round(spec.fraction * len(dataset)))
    if n_target == 0:
        return dataset, []

    alphabet = sorted(dataset.label_alphabet)
    permutation: dict[str, str] = {}
    if spec.mode == "type-permutation":
        if len(alphabet) < 2:
            raise DataError(
                "type-permutation needs at least 2 entity types, "
                f"dataset has {len(alphabet)}")
        rotated = alphabet[1:] + alphabet[:1]
        permutation = dict(zip(alphabet, rotated))

    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(len(dataset))
    replacements: dict[int, Sentence] = {}
    for index in order:
        if len(replacements) == n_target:
            break
        sentence = dataset.sentences[index]
        mutated = _corrupt_sentence(sentence, spec.mode, permutation, rng)
        if mutated is not None:
            replacements[int(index)] = mutated
    if len(replacements) < n_target:
        raise DataError(
            f"only {len(replacements)} of {len(dataset)} sentences are "
            f"eligible for {spec.mode}, cannot corrupt {n_target}")

    new_sentences = tuple(replacements.get(i, s)
                          for i, s in enumerate(dataset.sentences))
    return Dataset(new_sentences, dataset.name), sorted(replacements)


def _corrupt_sentence(sentence: Sentence, mode: str,
                      permutation: dict[str, str],
                      rng: np.random.Generator) -> Sentence | None:
    """Apply one corruption to a sentence, or None if ineligible."""
    spans = list(sentence.spans)
    if not spans:
        return None

    if mode == "type-permutation":
        new_spans = [Span(s.start, s.end, permutation[s.entity_type])
                     for s in spans]
        return _relabel(sentence, new_spans)

    if mode == "span-drop":
        victim = int(rng.integers(len(spans)))
        del spans[victim]
        return _relabel(sentence, spans)

    # boundary-shift: try spans in seeded order, moves in fixed order
    length = len(sentence)
    labels = sentence.labels
    for si in rng.permutation(len(spans)):
        span = spans[int(si)]
        moved = _shift_boundary(span, labels, length)
        if moved is not None:
            spans[int(si)] = moved
            return _relabel(sentence, spans)
    return None


def _shift_boundary(span: Span, labels: Sequence[str],
                    length: int) -> Span | None:
    if span.end < length and labels[span.end] == "O":
        return Span(span.start, span.end + 1, span.entity_type)
    if span.end - span.start >= 2:
        return Span(span.start, span.end - 1, span.entity_type)
    if span.start > 0 and labels[span.start - 1] == "O":
        return Span(span.start - 1, span.end, span.entity_type)
    return None


def _relabel(sentence: Sentence, spans: Sequence[Span]) -> Sentence:
    labels = render_spans(spans, len(sentence))
    return make_sentence(sentence.texts, labels, sentence.doc_id)
