"""CoNLL-style corpus model: tokens, sentences, spans, datasets.

Everything is normalized to BIO2 internally: ``O`` for outside tokens,
``B-TYPE`` opens an entity, ``I-TYPE`` continues one. IOB1 input (where
``I-`` may open an entity) is converted on ingestion.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from .errors import ConllParseError

_TAG_RE = re.compile(r"^(O|[BI]-.+)$")

DOCSTART = "-DOCSTART-"


def is_valid_tag(tag: str) -> bool:
    """True for ``O`` or ``B-<type>`` / ``I-<type>`` with non-empty type."""
    return bool(_TAG_RE.match(tag))


def split_tag(tag: str) -> tuple[str, str | None]:
    """Split a tag into its kind (``O``/``B``/``I``) and entity type."""
    if tag == "O":
        return "O", None
    return tag[0], tag[2:]


def check_bio2(labels: Sequence[str]) -> None:
    """Raise ValueError at the first index where `labels` breaks BIO2.

    Violations: a malformed tag, or an ``I-T`` that is sentence-initial,
    follows ``O``, or follows a tag of a different type.
    """
    prev_type: str | None = None
    for i, tag in enumerate(labels):
        if not is_valid_tag(tag):
            raise ValueError(f"malformed tag {tag!r} at index {i}")
        kind, etype = split_tag(tag)
        if kind == "I" and etype != prev_type:
            raise ValueError(
                f"invalid BIO2 at index {i}: {tag!r} does not continue "
                f"an open {etype} entity"
            )
        prev_type = etype
    return None


def normalize_iob1(labels: Sequence[str]) -> list[str]:
    """Convert an IOB1 (or already-BIO2) tag sequence to BIO2.

    Any ``I-T`` that opens an entity (sentence-initial, after ``O``, or
    after a different type) becomes ``B-T``; everything else is unchanged.
    Idempotent, and the identity on valid BIO2 input.
    """
    out: list[str] = []
    prev_type: str | None = None
    for i, tag in enumerate(labels):
        if not is_valid_tag(tag):
            raise ValueError(f"malformed tag {tag!r} at index {i}")
        kind, etype = split_tag(tag)
        if kind == "I" and etype != prev_type:
            out.append(f"B-{etype}")
        else:
            out.append(tag)
        prev_type = etype
    return out


class Span(NamedTuple):
    """A typed entity span over token indices; `end` is exclusive."""

    start: int
    end: int
    entity_type: str


def extract_spans(labels: Sequence[str]) -> list[Span]:
    """Extract entity spans from a valid BIO2 sequence.

    One span per maximal ``B-T (I-T)*`` run; the result is disjoint and
    sorted by start. Invalid input raises ValueError naming the first
    violating index (see check_bio2).
    """
    check_bio2(labels)
    spans: list[Span] = []
    start = -1
    open_type: str | None = None
    for i, tag in enumerate(labels):
        kind, etype = split_tag(tag)
        if open_type is not None and kind != "I":
            spans.append(Span(start, i, open_type))
            open_type = None
        if kind == "B":
            start, open_type = i, etype
    if open_type is not None:
        spans.append(Span(start, len(labels), open_type))
    return spans


def render_spans(spans: Iterable[Span], length: int) -> list[str]:
    """Render spans back to a BIO2 sequence of the given length.

    Inverse of extract_spans: ``render_spans(extract_spans(seq), len(seq))``
    reproduces `seq` exactly.
    """
    labels = ["O"] * length
    last_end = 0
    for span in sorted(spans):
        if not (0 <= span.start < span.end <= length):
            raise ValueError(f"span {span} out of bounds for length {length}")
        if span.start < last_end:
            raise ValueError(f"span {span} overlaps a previous span")
        labels[span.start] = f"B-{span.entity_type}"
        for i in range(span.start + 1, span.end):
            labels[i] = f"I-{span.entity_type}"
        last_end = span.end
    return labels


@dataclass(frozen=True)
class Token:
    """A single token with its BIO2 label."""

    text: str
    label: str

    def __post_init__(self) -> None:
        if not self.text or any(ch.isspace() for ch in self.text):
            raise ValueError(f"token text must be non-empty and without "
                             f"whitespace, got {self.text!r}")
        if not is_valid_tag(self.label):
            raise ValueError(f"malformed tag {self.label!r}")


@dataclass(frozen=True)
class Sentence:
    """An ordered, non-empty token sequence with a valid BIO2 labeling."""

    tokens: tuple[Token, ...]
    doc_id: str | None = None

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("sentence must contain at least one token")
        check_bio2([t.label for t in self.tokens])

    def __len__(self) -> int:
        return len(self.tokens)

    @cached_property
    def texts(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.tokens)

    @cached_property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label for t in self.tokens)

    @cached_property
    def spans(self) -> tuple[Span, ...]:
        return tuple(extract_spans(self.labels))


def make_sentence(texts: Sequence[str], labels: Sequence[str],
                  doc_id: str | None = None) -> Sentence:
    """Build a Sentence from parallel text/label sequences."""
    if len(texts) != len(labels):
        raise ValueError(f"{len(texts)} tokens but {len(labels)} labels")
    return Sentence(tuple(Token(t, l) for t, l in zip(texts, labels)), doc_id)


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of sentences; the unit the protocols sample."""

    sentences: tuple[Sentence, ...]
    name: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    @cached_property
    def label_alphabet(self) -> frozenset[str]:
        """Entity types appearing anywhere in the dataset."""
        types: set[str] = set()
        for sent in self.sentences:
            for tag in sent.labels:
                kind, etype = split_tag(tag)
                if etype is not None:
                    types.add(etype)
        return frozenset(types)

    def subset(self, indices: Sequence[int], name: str | None = None) -> "Dataset":
        """New Dataset holding the sentences at `indices`, in that order."""
        picked = tuple(self.sentences[i] for i in indices)
        return Dataset(picked, name if name is not None else self.name)


def parse_conll(text: str, token_column: int = 0, tag_column: int = -1,
                name: str = "") -> Dataset:
    """Parse CoNLL column format into a Dataset.

    One token per line, whitespace-separated columns; a blank line ends a
    sentence; a line whose first column is ``-DOCSTART-`` is consumed as a
    document boundary, not a token. Negative column indices count from the
    end of each line (the default tag column is the last one). Labels are
    normalized from IOB1 to BIO2.
    """
    sentences: list[Sentence] = []
    texts: list[str] = []
    tags: list[str] = []
    doc_index = 0
    saw_docstart = False

    def flush() -> None:
        if not texts:
            return
        # tags were pattern-checked per line, so normalization cannot fail
        labels = normalize_iob1(tags)
        doc_id = f"d{doc_index}" if saw_docstart else None
        sentences.append(make_sentence(texts, labels, doc_id))
        texts.clear()
        tags.clear()

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        columns = line.split()
        if columns[0] == DOCSTART:
            flush()
            doc_index += 1
            saw_docstart = True
            continue
        needed = max(_resolve_column(token_column, len(columns), lineno),
                     _resolve_column(tag_column, len(columns), lineno))
        if needed >= len(columns):
            raise ConllParseError(
                f"expected at least {needed + 1} columns, got {len(columns)}",
                lineno)
        token = columns[_resolve_column(token_column, len(columns), lineno)]
        tag = columns[_resolve_column(tag_column, len(columns), lineno)]
        if not is_valid_tag(tag):
            raise ConllParseError(f"malformed tag {tag!r}", lineno)
        texts.append(token)
        tags.append(tag)
    flush()
    return Dataset(tuple(sentences), name)


def _resolve_column(index: int, width: int, lineno: int) -> int:
    resolved = index + width if index < 0 else index
    if resolved < 0:
        raise ConllParseError(f"column index {index} out of range", lineno)
    return resolved


def serialize_conll(dataset: Dataset) -> str:
    """Serialize a Dataset as two space-separated columns (token, tag).

    LF line endings, one blank line between sentences, trailing newline.
    ``parse_conll(serialize_conll(ds))`` reproduces tokens and tags exactly.
    """
    blocks = []
    for sent in dataset.sentences:
        blocks.append("\n".join(f"{t.text} {t.label}" for t in sent.tokens))
    return "\n\n".join(blocks) + "\n" if blocks else ""
