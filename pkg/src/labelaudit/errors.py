"""Exception types shared across the package."""
from __future__ import annotations


class LabelAuditError(Exception):
    """Base class for errors raised by this package."""


class ConllParseError(LabelAuditError):
    """Malformed CoNLL input. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataError(LabelAuditError):
    """Input data violates a size, alignment, or eligibility requirement."""


class NumericError(LabelAuditError):
    """Training produced a non-finite quantity."""

    def __init__(self, message: str, epoch: int | None = None,
                 sentence_index: int | None = None):
        self.epoch = epoch
        self.sentence_index = sentence_index
        super().__init__(message)
