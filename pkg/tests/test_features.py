from __future__ import annotations

import pytest

from labelaudit.corpus import Dataset, make_sentence
from labelaudit.features import (DEFAULT_TEMPLATES, bio_label_set,
                                 build_features, extract_features,
                                 word_shape)


def test_word_shape():
    assert word_shape("Paris") == "Xx"
    assert word_shape("PARIS") == "X"
    assert word_shape("Paris-2024") == "Xx#d"
    assert word_shape("x86") == "xd"


def test_extract_features_positions():
    feats = extract_features(["John", "runs"], ("word", "prev", "next"))
    assert feats[0] == [("word", "John"), ("prev", "<s>"), ("next", "runs")]
    assert feats[1] == [("word", "runs"), ("prev", "John"), ("next", "</s>")]


def test_extract_features_affixes():
    feats = extract_features(["Smith"], ("prefix2", "suffix3"))
    assert feats[0] == [("prefix2", "Sm"), ("suffix3", "ith")]


def test_extract_features_unknown_template():
    with pytest.raises(ValueError, match="unknown feature template"):
        extract_features(["x"], ("wword",))


def test_bio_label_set_order():
    assert bio_label_set({"PER", "LOC"}) == (
        "O", "B-LOC", "B-PER", "I-LOC", "I-PER")
    assert bio_label_set([]) == ("O",)


def test_build_features_counts_one_sentence():
    ds = Dataset((make_sentence(["John"], ["B-PER"]),))
    index = build_features(ds, ("word", "bias"), min_count=1)
    # 2 feature strings x 3 labels (O, B-PER, I-PER)
    assert index.labels == ("O", "B-PER", "I-PER")
    assert index.n_pairs == 2
    assert index.size == 6


def test_build_features_min_count_cutoff():
    # word identity occurs once and is cut; bias is structural and stays
    ds = Dataset((make_sentence(["John"], ["B-PER"]),))
    index = build_features(ds, ("word", "bias"), min_count=2)
    assert set(index.pairs) == {("bias", "1")}
    assert index.size == 3


def test_build_features_min_count_cutoff_multitoken():
    ds = Dataset((make_sentence(["a", "b", "a"], ["O", "O", "O"]),))
    index = build_features(ds, ("word", "bias"), min_count=2)
    # word "a" fires twice, word "b" once
    assert set(index.pairs) == {("bias", "1"), ("word", "a")}
    assert index.size == 2 * 1  # one label: O


def test_build_features_deterministic_rows(small_synthetic):
    a = build_features(small_synthetic, DEFAULT_TEMPLATES, 1)
    b = build_features(small_synthetic, DEFAULT_TEMPLATES, 1)
    assert a.pairs == b.pairs
    assert a.labels == b.labels
    rows = list(a.pairs.values())
    assert rows == sorted(rows)
    assert list(a.pairs) == sorted(a.pairs)


def test_build_features_empty_dataset():
    with pytest.raises(ValueError, match="empty"):
        build_features(Dataset(()))


def test_emission_index():
    ds = Dataset((make_sentence(["John"], ["B-PER"]),))
    index = build_features(ds, ("word", "bias"))
    total = {index.emission_index(t, v, l)
             for (t, v) in index.pairs for l in index.labels}
    assert total == set(range(6))
    assert index.emission_index("word", "unseen", "O") is None
