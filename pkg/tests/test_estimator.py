from __future__ import annotations

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from labelaudit.estimator import CrfTagger

X = [["John", "lives", "in", "Paris"],
     ["Mary", "Smith", "visits", "London"],
     ["nothing", "here"]]
Y = [["B-PER", "O", "O", "B-LOC"],
     ["B-PER", "I-PER", "O", "B-LOC"],
     ["O", "O"]]


def test_fit_predict_shapes():
    tagger = CrfTagger(epochs=25, seed=3).fit(X, Y)
    out = tagger.predict(X)
    assert [len(seq) for seq in out] == [len(seq) for seq in X]
    assert out == Y  # trivially separable, overfits


def test_score_is_span_f1():
    tagger = CrfTagger(epochs=25, seed=3).fit(X, Y)
    assert tagger.score(X, Y) == 1.0


def test_not_fitted_error():
    with pytest.raises(NotFittedError):
        CrfTagger().predict(X)


def test_get_set_params_clone():
    tagger = CrfTagger(epochs=7, learning_rate=0.5, seed=11)
    params = tagger.get_params()
    assert params["epochs"] == 7
    assert params["learning_rate"] == 0.5
    cloned = clone(tagger)
    assert cloned.get_params() == params
    cloned.set_params(epochs=2)
    assert cloned.epochs == 2 and tagger.epochs == 7


def test_input_validation_messages():
    tagger = CrfTagger(epochs=1)
    with pytest.raises(TypeError, match="tokenize"):
        tagger.fit(["not tokenized"], [["O"]])
    with pytest.raises(ValueError, match="2 tokens but 1"):
        tagger.fit([["a", "b"]], [["O"]])
    with pytest.raises(ValueError, match="sequence 0"):
        tagger.fit([["a"]], [["BAD"]])


def test_iob1_labels_accepted():
    tagger = CrfTagger(epochs=20, seed=0)
    tagger.fit([["West", "Germany"]], [["I-LOC", "I-LOC"]])
    assert tagger.predict([["West", "Germany"]]) == [["B-LOC", "I-LOC"]]


def test_save_load_round_trip(tmp_path):
    tagger = CrfTagger(epochs=20, seed=3, min_count=1).fit(X, Y)
    path = str(tmp_path / "tagger.json")
    tagger.save(path)
    loaded = CrfTagger.load(path)
    assert loaded.predict(X) == tagger.predict(X)
    assert loaded.get_params()["epochs"] == 20


def test_predictions_always_valid_bio2(small_synthetic):
    from labelaudit.corpus import check_bio2
    sub = small_synthetic.sentences[:30]
    tagger = CrfTagger(epochs=2, seed=0).fit(
        [s.texts for s in sub], [s.labels for s in sub])
    for labels in tagger.predict([s.texts for s in
                                  small_synthetic.sentences[30:70]]):
        check_bio2(labels)
