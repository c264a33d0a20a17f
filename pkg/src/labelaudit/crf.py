"""Linear-chain CRF: model container, exact inference, and the
log-likelihood gradient.

The model scores a label path y for a token sequence of length n as

    score(y) = sum_i unary(i, y_i) + sum_i transition(y_{i-1}, y_i)

where unary(i, l) sums the emission weights of the features active at
position i for label l. Inference is exact dynamic programming in log
space: the forward recursion for log Z, forward-backward for marginals,
and Viterbi for the best path.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Sentence, normalize_iob1
from .features import FeatureIndex
from .util import atomic_write_text

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for AdaGrad training, snapshotted into the model."""

    epochs: int = 10
    learning_rate: float = 0.1
    l2: float = 1e-4
    epsilon: float = 1e-8
    seed: int = 0
    shuffle: bool = True
    min_count: int = 1
    full_batch: bool = False

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not (np.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise ValueError("learning_rate must be positive and finite")
        if not (np.isfinite(self.l2) and self.l2 >= 0):
            raise ValueError("l2 must be non-negative and finite")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError("epsilon must be positive and finite")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")


@dataclass(frozen=True)
class CrfModel:
    """A trained (or blank) linear-chain CRF.

    w_emission has one row per feature-dictionary pair and one column per
    label; w_transition is indexed (previous label, label). The weight
    arrays are owned by the model and must not be mutated after training.
    """

    labels: tuple[str, ...]
    templates: tuple[str, ...]
    feature_index: FeatureIndex
    w_emission: np.ndarray
    w_transition: np.ndarray
    config: TrainConfig = field(default_factory=TrainConfig)
    objective_history: tuple[float, ...] = ()

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    @property
    def n_weights(self) -> int:
        return self.w_emission.size + self.w_transition.size

    def weights_flat(self) -> np.ndarray:
        """Concatenated parameter vector: emissions then transitions."""
        return np.concatenate([self.w_emission.ravel(),
                               self.w_transition.ravel()])


def blank_model(feature_index: FeatureIndex,
                config: TrainConfig | None = None) -> CrfModel:
    """All-zero model over a built feature dictionary."""
    n_labels = len(feature_index.labels)
    return CrfModel(
        labels=feature_index.labels,
        templates=feature_index.templates,
        feature_index=feature_index,
        w_emission=np.zeros((feature_index.n_pairs, n_labels)),
        w_transition=np.zeros((n_labels, n_labels)),
        config=config if config is not None else TrainConfig(),
    )


@dataclass(frozen=True)
class PotentialTable:
    """Log-space scores of one sentence: unary is (n, L), transition (L, L)."""

    unary: np.ndarray
    transition: np.ndarray

    @property
    def n_positions(self) -> int:
        return self.unary.shape[0]

    @property
    def n_labels(self) -> int:
        return self.unary.shape[1]


def _texts_of(sentence: Sentence | Sequence[str]) -> Sequence[str]:
    return sentence.texts if isinstance(sentence, Sentence) else sentence


def sentence_potentials(model: CrfModel,
                        sentence: Sentence | Sequence[str],
                        rows: Sequence[np.ndarray] | None = None,
                        ) -> PotentialTable:
    """Unary scores per (position, label) plus the transition matrix.

    unary(i, l) is the sum of emission weights of features active at i for
    label l; features missing from the dictionary contribute 0. `rows` may
    carry precomputed feature rows (see FeatureIndex.rows_for).
    """
    if rows is None:
        rows = model.feature_index.rows_for(_texts_of(sentence))
    unary = np.empty((len(rows), model.n_labels))
    for i, r in enumerate(rows):
        if len(r):
            unary[i] = model.w_emission[r].sum(axis=0)
        else:
            unary[i] = 0.0
    return PotentialTable(unary, model.w_transition)


def _forward(pot: PotentialTable) -> tuple[np.ndarray, float]:
    """Forward recursion; returns all alphas and log Z."""
    unary, trans = pot.unary, pot.transition
    n = unary.shape[0]
    alphas = np.empty_like(unary)
    alphas[0] = unary[0]
    for i in range(1, n):
        scores = alphas[i - 1][:, None] + trans
        m = scores.max(axis=0)
        alphas[i] = unary[i] + m + np.log(np.exp(scores - m).sum(axis=0))
    last = alphas[-1]
    m = last.max()
    return alphas, float(m + np.log(np.exp(last - m).sum()))


def _backward(pot: PotentialTable) -> np.ndarray:
    unary, trans = pot.unary, pot.transition
    n = unary.shape[0]
    betas = np.empty_like(unary)
    betas[n - 1] = 0.0
    for i in range(n - 2, -1, -1):
        scores = trans + (unary[i + 1] + betas[i + 1])[None, :]
        m = scores.max(axis=1)
        betas[i] = m + np.log(np.exp(scores - m[:, None]).sum(axis=1))
    return betas


def forward_log_partition(pot: PotentialTable) -> float:
    """log Z: log of the sum over all label paths of exp(path score)."""
    return _forward(pot)[1]


def path_score(pot: PotentialTable, path: Sequence[int]) -> float:
    """Log-space score of one label path (indices into the label set)."""
    idx = np.asarray(path, dtype=np.intp)
    score = float(pot.unary[np.arange(len(idx)), idx].sum())
    if len(idx) > 1:
        score += float(pot.transition[idx[:-1], idx[1:]].sum())
    return score


def marginals(pot: PotentialTable) -> tuple[np.ndarray, np.ndarray]:
    """Forward-backward marginals.

    Returns (node, edge): node is (n, L) with node[i, l] = P(y_i = l);
    edge is (n-1, L, L) with edge[i, a, b] = P(y_i = a, y_{i+1} = b).
    Each node row sums to 1; edge[i] sums to 1 and its row/column sums
    reproduce the adjacent node marginals.
    """
    alphas, log_z = _forward(pot)
    betas = _backward(pot)
    node = np.exp(alphas + betas - log_z)
    n = pot.n_positions
    edge = np.empty((max(n - 1, 0), pot.n_labels, pot.n_labels))
    for i in range(n - 1):
        edge[i] = np.exp(alphas[i][:, None] + pot.transition
                         + (pot.unary[i + 1] + betas[i + 1])[None, :] - log_z)
    return node, edge


def viterbi(pot: PotentialTable) -> tuple[list[int], float]:
    """Best label path and its score.

    Ties break toward the lower label index at every step, so an all-zero
    model decodes everything as label 0.
    """
    unary, trans = pot.unary, pot.transition
    n = unary.shape[0]
    backptr = np.empty((n, unary.shape[1]), dtype=np.intp)
    delta = unary[0].copy()
    for i in range(1, n):
        scores = delta[:, None] + trans
        backptr[i] = scores.argmax(axis=0)  # argmax takes the lowest index
        delta = unary[i] + scores[backptr[i], np.arange(unary.shape[1])]
    best = int(delta.argmax())
    path = [best]
    for i in range(n - 1, 0, -1):
        best = int(backptr[i, best])
        path.append(best)
    path.reverse()
    return path, float(delta.max())


def gold_indices(model: CrfModel, sentence: Sentence) -> np.ndarray:
    """Label indices of a sentence's gold tags; unknown tags are an error."""
    try:
        return np.asarray([model.labels.index(tag) for tag in sentence.labels],
                          dtype=np.intp)
    except ValueError:
        unknown = sorted(set(sentence.labels) - set(model.labels))
        raise ValueError(f"sentence uses labels unknown to the model: "
                         f"{unknown}") from None


def log_likelihood_grad(model: CrfModel,
                        sentence: Sentence) -> tuple[float, np.ndarray]:
    """Log-likelihood of the gold path and its gradient.

    The gradient is empirical minus expected feature counts, laid out like
    weights_flat(): emission entries first (row-major over dictionary rows
    and labels), then the flattened transition matrix. L2 regularization is
    not included here; the trainer applies it.
    """
    rows = model.feature_index.rows_for(sentence.texts)
    gold = gold_indices(model, sentence)
    pot = sentence_potentials(model, sentence, rows)
    log_z = forward_log_partition(pot)
    ll = path_score(pot, gold) - log_z

    node, edge = marginals(pot)
    grad_em = np.zeros_like(model.w_emission)
    for i, r in enumerate(rows):
        if len(r) == 0:
            continue
        contrib = -node[i]
        contrib[gold[i]] += 1.0
        grad_em[r] += contrib
    grad_tr = -edge.sum(axis=0)
    for i in range(len(gold) - 1):
        grad_tr[gold[i], gold[i + 1]] += 1.0
    return ll, np.concatenate([grad_em.ravel(), grad_tr.ravel()])


def repair_bio(labels: Sequence[str]) -> list[str]:
    """Rewrite illegal I-T openings to B-T so output is valid BIO2."""
    return normalize_iob1(labels)


def predict(model: CrfModel,
            sentences: Sequence[Sentence | Sequence[str]],
            rows_cache: Sequence[Sequence[np.ndarray]] | None = None,
            ) -> list[list[str]]:
    """Viterbi-decode each sentence; output always passes BIO2 validity."""
    out = []
    for k, sentence in enumerate(sentences):
        rows = rows_cache[k] if rows_cache is not None else None
        pot = sentence_potentials(model, sentence, rows)
        path, _ = viterbi(pot)
        out.append(repair_bio([model.labels[i] for i in path]))
    return out


def model_to_dict(model: CrfModel) -> dict:
    """JSON-ready dict; floats round-trip exactly through json."""
    pairs = sorted(model.feature_index.pairs.items(), key=lambda kv: kv[1])
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "labels": list(model.labels),
        "templates": list(model.templates),
        "feature_pairs": [[t, v] for (t, v), _ in pairs],
        "w_emission": model.w_emission.ravel().tolist(),
        "w_transition": model.w_transition.ravel().tolist(),
        "config": {
            "epochs": model.config.epochs,
            "learning_rate": model.config.learning_rate,
            "l2": model.config.l2,
            "epsilon": model.config.epsilon,
            "seed": model.config.seed,
            "shuffle": model.config.shuffle,
            "min_count": model.config.min_count,
            "full_batch": model.config.full_batch,
        },
    }


def model_from_dict(payload: dict) -> CrfModel:
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version: {version!r}")
    labels = tuple(payload["labels"])
    templates = tuple(payload["templates"])
    pairs = [tuple(p) for p in payload["feature_pairs"]]
    index = FeatureIndex(labels, templates, pairs)
    n_labels = len(labels)
    w_emission = np.asarray(payload["w_emission"], dtype=float)
    w_emission = w_emission.reshape(len(pairs), n_labels)
    w_transition = np.asarray(payload["w_transition"], dtype=float)
    w_transition = w_transition.reshape(n_labels, n_labels)
    config = TrainConfig(**payload["config"])
    return CrfModel(labels, templates, index, w_emission, w_transition, config)


def save_model(model: CrfModel, path: str) -> None:
    """Write the model as a single self-describing JSON file."""
    atomic_write_text(path, json.dumps(model_to_dict(model)) + "\n")


def load_model(path: str) -> CrfModel:
    """Load a model saved by save_model; predictions reproduce exactly."""
    with open(path, encoding="utf-8") as handle:
        return model_from_dict(json.load(handle))
