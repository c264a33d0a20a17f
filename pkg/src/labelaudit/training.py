"""Regularized stochastic training of the linear-chain CRF.

The production path is AdaGrad over per-sentence gradients of the
penalized log-likelihood ll(s) - l2/2 * ||w||^2, with the sentence order
reshuffled each epoch by a seeded generator. Identical inputs and seed
give bit-identical weights. A full-batch diagnostic mode (plain gradient
ascent on the mean objective) exists for monotonicity checks only.

The inner loop runs forward-backward in exponential space with per-step
rescaling (each step renormalizes by the forward mass and accumulates its
log), which is algebraically the log-sum-exp recursion with fewer array
operations. The log-space implementations in crf.py stay the reference;
the two are held together by an equivalence test.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .corpus import Dataset
from .crf import CrfModel, TrainConfig, blank_model, gold_indices
from .errors import NumericError
from .features import DEFAULT_TEMPLATES, build_features


class _Compiled:
    """One sentence precompiled for the inner loop: per-position feature
    rows, the aggregation map for repeated rows, and gold label indices."""

    __slots__ = ("flat_rows", "bounds", "has_empty", "unique_rows",
                 "position_slots", "gold")

    def __init__(self, rows: list[np.ndarray], gold: np.ndarray):
        self.gold = gold
        # Flattened rows plus segment bounds let one gather + reduceat
        # build the whole unary table; reduceat mishandles empty segments,
        # so positions with no known features force the slow path.
        counts = np.asarray([len(r) for r in rows], dtype=np.intp)
        self.has_empty = bool((counts == 0).any())
        self.flat_rows = (np.concatenate(rows) if rows
                          else np.empty(0, dtype=np.intp))
        self.bounds = np.concatenate([[0], np.cumsum(counts[:-1])])
        # A row can fire at several positions (bias does at all of them);
        # gradient contributions must be summed per row before the update.
        self.unique_rows, inverse = np.unique(self.flat_rows,
                                              return_inverse=True)
        slots = []
        offset = 0
        for r in rows:
            slots.append(inverse[offset:offset + len(r)])
            offset += len(r)
        self.position_slots = slots


def _compile_sentences(dataset: Dataset, model: CrfModel,
                       raw_features: Sequence[list] | None) -> list[_Compiled]:
    index = model.feature_index
    compiled = []
    for k, sentence in enumerate(dataset.sentences):
        raw = raw_features[k] if raw_features is not None else None
        rows = index.rows_for(sentence.texts, raw)
        compiled.append(_Compiled(rows, gold_indices(model, sentence)))
    return compiled


def _sentence_stats(w_em: np.ndarray, w_tr: np.ndarray, item: _Compiled,
                    ) -> tuple[float, np.ndarray, np.ndarray]:
    """Log-likelihood, per-unique-row emission gradient, transition gradient.

    Scaled forward-backward: alphas are renormalized each step and the log
    scales summed into log Z, so nothing overflows for any weights the
    trainer itself can produce.
    """
    gold = item.gold
    n = len(gold)
    n_labels = w_em.shape[1]
    if item.has_empty:
        unary = np.zeros((n, n_labels))
        for i, slots in enumerate(item.position_slots):
            if len(slots):
                unary[i] = w_em[item.unique_rows[slots]].sum(axis=0)
    else:
        unary = np.add.reduceat(w_em[item.flat_rows], item.bounds, axis=0)
    mu = unary.max(axis=1)
    scaled = np.exp(unary - mu[:, None])
    mt = w_tr.max()
    trans = np.exp(w_tr - mt)

    fwd = np.empty((n, n_labels))
    scale = np.empty(n)
    a = scaled[0]
    scale[0] = a.sum()
    fwd[0] = a / scale[0]
    for i in range(1, n):
        a = fwd[i - 1] @ trans
        a *= scaled[i]
        scale[i] = a.sum()
        fwd[i] = a / scale[i]
    log_z = float(np.log(scale).sum() + mu.sum() + (n - 1) * mt)

    bwd = np.empty((n, n_labels))
    bwd[n - 1] = 1.0
    for i in range(n - 2, -1, -1):
        t = scaled[i + 1] * bwd[i + 1]
        bwd[i] = trans @ t
        bwd[i] /= scale[i + 1]
    node = fwd * bwd

    positions = np.arange(n)
    gold_score = float(unary[positions, gold].sum())
    if n > 1:
        gold_score += float(w_tr[gold[:-1], gold[1:]].sum())
        ub = scaled[1:] * bwd[1:]
        ub /= scale[1:, None]
        edge_sum = trans * (fwd[:-1].T @ ub)
    else:
        edge_sum = np.zeros((n_labels, n_labels))
    ll = gold_score - log_z

    sigma = -node
    sigma[positions, gold] += 1.0
    grad_unique = np.zeros((len(item.unique_rows), n_labels))
    for i, slots in enumerate(item.position_slots):
        grad_unique[slots] += sigma[i]

    grad_tr = -edge_sum
    if n > 1:
        np.add.at(grad_tr, (gold[:-1], gold[1:]), 1.0)
    return ll, grad_unique, grad_tr


class _Adagrad:
    """Per-coordinate AdaGrad ascent: G += g^2; w += lr * g / (sqrt(G) + eps)."""

    def __init__(self, shape: tuple[int, ...], lr: float, eps: float):
        self.lr = lr
        self.eps = eps
        self.accum = np.zeros(shape)
        self._buf = np.empty(shape)

    def step(self, w: np.ndarray, grad: np.ndarray) -> None:
        buf = self._buf
        np.multiply(grad, grad, out=buf)
        self.accum += buf
        np.sqrt(self.accum, out=buf)
        buf += self.eps
        np.divide(grad, buf, out=buf)
        buf *= self.lr
        w += buf


def train(dataset: Dataset,
          templates: Sequence[str] = DEFAULT_TEMPLATES,
          config: TrainConfig | None = None,
          raw_features: Sequence[list] | None = None) -> CrfModel:
    """Train a CRF on a dataset; deterministic given (data, templates, seed).

    raw_features may carry precomputed extract_features() output aligned
    with dataset.sentences; callers training many prefixes of one corpus
    pass it to avoid re-extracting strings.

    Raises NumericError naming the epoch and sentence if the objective
    stops being finite.
    """
    if config is None:
        config = TrainConfig()
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    index = build_features(dataset, templates, config.min_count, raw_features)
    model = blank_model(index, config)
    compiled = _compile_sentences(dataset, model, raw_features)

    if config.full_batch:
        history = _train_full_batch(model, compiled, config)
        return CrfModel(model.labels, model.templates, model.feature_index,
                        model.w_emission, model.w_transition, config,
                        objective_history=tuple(history))

    w_em, w_tr = model.w_emission, model.w_transition
    opt_em = _Adagrad(w_em.shape, config.learning_rate, config.epsilon)
    opt_tr = _Adagrad(w_tr.shape, config.learning_rate, config.epsilon)
    g_em = np.empty_like(w_em)
    g_tr = np.empty_like(w_tr)
    rng = np.random.default_rng(config.seed)
    for epoch in range(config.epochs):
        if config.shuffle:
            order = rng.permutation(len(compiled))
        else:
            order = np.arange(len(compiled))
        for si in order:
            item = compiled[si]
            ll, grad_unique, grad_tr = _sentence_stats(w_em, w_tr, item)
            if not np.isfinite(ll):
                raise NumericError(
                    f"non-finite log-likelihood at epoch {epoch}, "
                    f"sentence {int(si)}", epoch=epoch, sentence_index=int(si))
            # full gradient of ll - l2/2 ||w||^2: sparse counts minus l2 * w
            np.multiply(w_em, -config.l2, out=g_em)
            g_em[item.unique_rows] += grad_unique
            opt_em.step(w_em, g_em)
            np.multiply(w_tr, -config.l2, out=g_tr)
            g_tr += grad_tr
            opt_tr.step(w_tr, g_tr)
    return model


def _train_full_batch(model: CrfModel, compiled: list[_Compiled],
                      config: TrainConfig) -> list[float]:
    """Plain gradient ascent on the mean penalized log-likelihood.

    Diagnostic mode: with a sane learning rate the recorded objective is
    non-decreasing because the objective is smooth and concave. Returns
    the objective before each epoch plus after the last one.
    """
    w_em, w_tr = model.w_emission, model.w_transition
    n = len(compiled)
    history = []
    for _ in range(config.epochs):
        total_ll = 0.0
        g_em = -config.l2 * w_em
        g_tr = -config.l2 * w_tr
        for item in compiled:
            ll, grad_unique, grad_tr = _sentence_stats(w_em, w_tr, item)
            total_ll += ll
            g_em[item.unique_rows] += grad_unique / n
            g_tr += grad_tr / n
        objective = total_ll / n - 0.5 * config.l2 * _sq_norm(w_em, w_tr)
        if not np.isfinite(objective):
            raise NumericError("non-finite full-batch objective",
                               epoch=len(history))
        history.append(objective)
        w_em += config.learning_rate * g_em
        w_tr += config.learning_rate * g_tr
    total_ll = sum(_sentence_stats(w_em, w_tr, item)[0] for item in compiled)
    history.append(total_ll / n - 0.5 * config.l2 * _sq_norm(w_em, w_tr))
    return history


def _sq_norm(w_em: np.ndarray, w_tr: np.ndarray) -> float:
    return (float(np.dot(w_em.ravel(), w_em.ravel()))
            + float(np.dot(w_tr.ravel(), w_tr.ravel())))
