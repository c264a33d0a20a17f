"""Input validation helpers for the estimator-facing API."""
from __future__ import annotations

from typing import Sequence

from .corpus import Dataset, make_sentence, normalize_iob1


def check_token_sequences(X) -> list[list[str]]:
    """Validate X as a list of token-string sequences."""
    if isinstance(X, str):
        raise TypeError("X must be a sequence of token sequences, not a "
                        "single string")
    out = []
    for i, seq in enumerate(X):
        if isinstance(seq, str):
            raise TypeError(f"X[{i}] is a string; expected a sequence of "
                            "token strings (did you forget to tokenize?)")
        tokens = list(seq)
        if not tokens:
            raise ValueError(f"X[{i}] is empty; sentences must have at "
                             "least one token")
        for tok in tokens:
            if not isinstance(tok, str):
                raise TypeError(f"X[{i}] contains a non-string token: "
                                f"{tok!r}")
        out.append(tokens)
    return out


def check_X_y(X, y) -> tuple[list[list[str]], list[list[str]]]:
    """Validate aligned token and tag sequences; tags are normalized to
    BIO2 (IOB1 input is accepted)."""
    X = check_token_sequences(X)
    if y is None:
        raise ValueError("y (tag sequences) is required to fit")
    tags = []
    if len(X) != len(y):
        raise ValueError(f"X has {len(X)} sequences but y has {len(y)}")
    for i, (tokens, seq) in enumerate(zip(X, y)):
        labels = list(seq)
        if len(labels) != len(tokens):
            raise ValueError(f"sequence {i}: {len(tokens)} tokens but "
                             f"{len(labels)} tags")
        try:
            tags.append(normalize_iob1(labels))
        except ValueError as exc:
            raise ValueError(f"sequence {i}: {exc}") from None
    return X, tags


def to_dataset(X: Sequence[Sequence[str]], y: Sequence[Sequence[str]],
               name: str = "") -> Dataset:
    """Build a validated Dataset from parallel token/tag sequences."""
    X, y = check_X_y(X, y)
    return Dataset(tuple(make_sentence(t, l) for t, l in zip(X, y)), name)
