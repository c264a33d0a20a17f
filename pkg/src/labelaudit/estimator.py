"""scikit-learn style estimator wrapping the CRF tagger.

X is a list of token-string sequences and y a list of aligned BIO tag
sequences (IOB1 accepted, normalized on the way in), the same convention
sequence taggers in the sklearn ecosystem use. The estimator is
cloneable, grid-searchable via get_params/set_params, and scores with
span-level micro F1.
"""
from __future__ import annotations

from typing import Sequence

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .crf import TrainConfig, load_model, predict, save_model
from .evaluation import evaluate
from .features import DEFAULT_TEMPLATES
from .training import train
from .validation import check_token_sequences, to_dataset


class CrfTagger(BaseEstimator):
    """Linear-chain CRF sequence tagger with exact inference.

    Parameters mirror TrainConfig; see labelaudit.crf. The fitted model is
    available as `model_` and can be saved with save() and restored with
    CrfTagger.load(), reproducing predictions exactly.
    """

    def __init__(self, templates: Sequence[str] = DEFAULT_TEMPLATES,
                 min_count: int = 1, epochs: int = 10,
                 learning_rate: float = 0.1, l2: float = 1e-4,
                 epsilon: float = 1e-8, seed: int = 0,
                 shuffle: bool = True):
        self.templates = templates
        self.min_count = min_count
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.l2 = l2
        self.epsilon = epsilon
        self.seed = seed
        self.shuffle = shuffle

    def _config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs,
                           learning_rate=self.learning_rate, l2=self.l2,
                           epsilon=self.epsilon, seed=self.seed,
                           shuffle=self.shuffle, min_count=self.min_count)

    def fit(self, X, y) -> "CrfTagger":
        dataset = to_dataset(X, y)
        self.model_ = train(dataset, tuple(self.templates), self._config())
        self.labels_ = self.model_.labels
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "model_"):
            raise NotFittedError(
                "This CrfTagger instance is not fitted yet; call fit first.")

    def predict(self, X) -> list[list[str]]:
        self._check_fitted()
        return predict(self.model_, check_token_sequences(X))

    def score(self, X, y) -> float:
        """Span-level micro F1 of predictions on (X, y)."""
        self._check_fitted()
        gold = to_dataset(X, y)
        predictions = predict(self.model_, [s.texts for s in gold.sentences])
        return evaluate([s.labels for s in gold.sentences], predictions).f1

    def save(self, path: str) -> None:
        self._check_fitted()
        save_model(self.model_, path)

    @classmethod
    def load(cls, path: str) -> "CrfTagger":
        model = cls()
        model.model_ = load_model(path)
        model.labels_ = model.model_.labels
        config = model.model_.config
        model.set_params(
            templates=model.model_.templates, min_count=config.min_count,
            epochs=config.epochs, learning_rate=config.learning_rate,
            l2=config.l2, epsilon=config.epsilon, seed=config.seed,
            shuffle=config.shuffle)
        return model
