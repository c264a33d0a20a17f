"""Span-level exact-match precision/recall/F1, micro-averaged and per-type.

A predicted span is correct only if a gold span with the same start, end,
and type exists in the same sentence (conlleval semantics). Zero
conventions: P = 0 when nothing is predicted, R = 0 when there is no gold,
F1 = 0 when P + R = 0; learning curves start from tiny training prefixes
where all three cases occur.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus import Dataset, extract_spans
from .crf import CrfModel, predict
from .errors import DataError


@dataclass(frozen=True)
class Scores:
    """Exact-match counts; the metrics are derived, so the P/R/F1
    identities hold by construction."""

    tp: int = 0
    n_predicted: int = 0
    n_gold: int = 0

    @property
    def precision(self) -> float:
        return self.tp / self.n_predicted if self.n_predicted else 0.0

    @property
    def recall(self) -> float:
        return self.tp / self.n_gold if self.n_gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass(frozen=True)
class EvalResult(Scores):
    """Micro scores plus a per-entity-type breakdown."""

    per_type: Mapping[str, Scores] = field(default_factory=dict)


def evaluate(gold: Sequence[Sequence[str]],
             predicted: Sequence[Sequence[str]]) -> EvalResult:
    """Score predicted label sequences against gold, both valid BIO2."""
    if len(gold) != len(predicted):
        raise DataError(f"got {len(gold)} gold sequences but "
                        f"{len(predicted)} predicted")
    tp: Counter[str] = Counter()
    n_pred: Counter[str] = Counter()
    n_gold: Counter[str] = Counter()
    for i, (g, p) in enumerate(zip(gold, predicted)):
        if len(g) != len(p):
            raise DataError(f"sentence {i}: gold has {len(g)} tokens, "
                            f"predicted has {len(p)}")
        gold_spans = set(extract_spans(g))
        pred_spans = set(extract_spans(p))
        for span in gold_spans:
            n_gold[span.entity_type] += 1
        for span in pred_spans:
            n_pred[span.entity_type] += 1
        for span in gold_spans & pred_spans:
            tp[span.entity_type] += 1
    types = sorted(set(tp) | set(n_pred) | set(n_gold))
    per_type = {t: Scores(tp[t], n_pred[t], n_gold[t]) for t in types}
    return EvalResult(sum(tp.values()), sum(n_pred.values()),
                      sum(n_gold.values()), per_type)


def evaluate_model(model: CrfModel, test: Dataset,
                   rows_cache=None) -> EvalResult:
    """Decode a dataset with the model and score it: exactly
    evaluate(gold, predict(model, sentences))."""
    predictions = predict(model, test.sentences, rows_cache)
    return evaluate([s.labels for s in test.sentences], predictions)


def format_report(result: EvalResult) -> str:
    """conlleval-style text table: micro row plus one row per type,
    percentages with two decimals."""
    lines = [f"{'':12s} {'P':>7s} {'R':>7s} {'F1':>7s} "
             f"{'TP':>6s} {'pred':>6s} {'gold':>6s}"]

    def row(name: str, s: Scores) -> str:
        return (f"{name:12s} {100 * s.precision:7.2f} {100 * s.recall:7.2f} "
                f"{100 * s.f1:7.2f} {s.tp:6d} {s.n_predicted:6d} "
                f"{s.n_gold:6d}")

    lines.append(row("micro", result))
    for etype, scores in result.per_type.items():
        lines.append(row(etype, scores))
    return "\n".join(lines)
