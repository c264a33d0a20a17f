from __future__ import annotations

import pytest

from labelaudit.corpus import check_bio2, serialize_conll
from labelaudit.errors import DataError
from labelaudit.synth import (CORRUPTION_MODES, CorruptionSpec,
                              corrupt_labels, synthesize_corpus)


def test_synthesis_deterministic():
    a = synthesize_corpus(200, 50, ["PER", "LOC"], seed=7)
    b = synthesize_corpus(200, 50, ["PER", "LOC"], seed=7)
    assert serialize_conll(a) == serialize_conll(b)
    c = synthesize_corpus(200, 50, ["PER", "LOC"], seed=8)
    assert serialize_conll(a) != serialize_conll(c)


def test_synthesis_sizes():
    ds = synthesize_corpus(1, 10, ["PER"], seed=0)
    assert len(ds) == 1
    ds = synthesize_corpus(57, 25, ["A", "B", "C"], seed=3)
    assert len(ds) == 57
    assert ds.label_alphabet <= {"A", "B", "C"}


def test_synthesis_entity_density_band():
    ds = synthesize_corpus(1000, 200, ["PER", "LOC"], seed=11)
    total = sum(len(s) for s in ds.sentences)
    non_o = sum(1 for s in ds.sentences for t in s.tokens if t.label != "O")
    assert 0.10 <= non_o / total <= 0.40


def test_synthesis_codebook_is_consistent():
    """The same token always carries the same label across the corpus."""
    ds = synthesize_corpus(400, 60, ["A", "B"], seed=5, phrases_per_type=30)
    seen: dict[str, str] = {}
    for sentence in ds.sentences:
        for token in sentence.tokens:
            assert seen.setdefault(token.text, token.label) == token.label


def test_synthesis_validates_args():
    with pytest.raises(ValueError):
        synthesize_corpus(0, 20, ["A"], seed=0)
    with pytest.raises(ValueError):
        synthesize_corpus(5, 5, ["A"], seed=0)
    with pytest.raises(ValueError):
        synthesize_corpus(5, 20, [], seed=0)
    with pytest.raises(ValueError):
        synthesize_corpus(5, 20, ["A", "A"], seed=0)


def test_corruption_spec_validation():
    with pytest.raises(ValueError):
        CorruptionSpec(1.5, "span-drop", 0)
    with pytest.raises(ValueError):
        CorruptionSpec(0.5, "bogus", 0)


def test_corrupt_zero_fraction_is_identity(small_synthetic):
    out, indices = corrupt_labels(small_synthetic,
                                  CorruptionSpec(0.0, "span-drop", 1))
    assert indices == []
    assert out.sentences == small_synthetic.sentences


def test_corrupt_exact_paper_count():
    ds = synthesize_corpus(551, 80, ["PER", "LOC"], seed=2)
    out, indices = corrupt_labels(
        ds, CorruptionSpec(0.267, "type-permutation", 3))
    assert len(indices) == 147  # round(0.267 * 551)
    assert indices == sorted(indices)


@pytest.mark.parametrize("mode", CORRUPTION_MODES)
def test_corrupt_output_valid_and_untouched_rest(mode, small_synthetic):
    out, indices = corrupt_labels(small_synthetic,
                                  CorruptionSpec(0.25, mode, 9))
    assert len(indices) == round(0.25 * len(small_synthetic))
    changed = set(indices)
    for i, (old, new) in enumerate(zip(small_synthetic.sentences,
                                       out.sentences)):
        check_bio2(new.labels)
        assert new.texts == old.texts
        if i in changed:
            assert new.labels != old.labels
        else:
            assert new is old


@pytest.mark.parametrize("mode", CORRUPTION_MODES)
def test_corrupt_deterministic(mode, small_synthetic):
    spec = CorruptionSpec(0.3, mode, 42)
    out1, idx1 = corrupt_labels(small_synthetic, spec)
    out2, idx2 = corrupt_labels(small_synthetic, spec)
    assert idx1 == idx2
    assert out1.sentences == out2.sentences


def test_type_permutation_swaps_two_types():
    ds = synthesize_corpus(40, 30, ["A", "B"], seed=1, phrases_per_type=10)
    out, indices = corrupt_labels(ds, CorruptionSpec(1.0, "type-permutation", 4))
    swap = {"A": "B", "B": "A"}
    for i in indices:
        for old, new in zip(ds.sentences[i].spans, out.sentences[i].spans):
            assert (new.start, new.end) == (old.start, old.end)
            assert new.entity_type == swap[old.entity_type]


def test_type_permutation_needs_two_types():
    ds = synthesize_corpus(20, 20, ["A"], seed=1)
    with pytest.raises(DataError, match="at least 2 entity types"):
        corrupt_labels(ds, CorruptionSpec(0.5, "type-permutation", 0))


def test_boundary_shift_moves_one_boundary_by_one():
    ds = synthesize_corpus(60, 40, ["A", "B"], seed=6)
    out, indices = corrupt_labels(ds, CorruptionSpec(0.4, "boundary-shift", 8))
    for i in indices:
        old = set(ds.sentences[i].spans)
        new = set(out.sentences[i].spans)
        moved_out = old - new
        moved_in = new - old
        assert len(moved_out) == 1 and len(moved_in) == 1
        (a,), (b,) = moved_out, moved_in
        assert a.entity_type == b.entity_type
        assert abs(a.start - b.start) + abs(a.end - b.end) == 1


def test_span_drop_removes_exactly_one_span():
    ds = synthesize_corpus(60, 40, ["A", "B"], seed=6)
    out, indices = corrupt_labels(ds, CorruptionSpec(0.4, "span-drop", 8))
    for i in indices:
        old = list(ds.sentences[i].spans)
        new = list(out.sentences[i].spans)
        assert len(new) == len(old) - 1
        assert all(s in old for s in new)


def test_corrupt_too_few_eligible():
    # sentences without any spans are ineligible for every mode
    from labelaudit.corpus import Dataset, make_sentence
    plain = Dataset(tuple(
        make_sentence([f"w{i}", "x"], ["O", "O"]) for i in range(9)) + (
        make_sentence(["Foo"], ["B-A"]),
        make_sentence(["Bar"], ["B-B"]),
    ))
    with pytest.raises(DataError, match="only 2 of 11"):
        corrupt_labels(plain, CorruptionSpec(0.5, "span-drop", 1))


def test_corrupt_skips_ineligible_and_meets_count():
    from labelaudit.corpus import Dataset, make_sentence
    mixed = Dataset(tuple(
        make_sentence([f"w{i}", "x"], ["O", "O"]) for i in range(5)) + tuple(
        make_sentence([f"Ent{i}", "y"], ["B-A", "O"]) for i in range(5)))
    out, indices = corrupt_labels(mixed, CorruptionSpec(0.4, "span-drop", 3))
    assert len(indices) == 4
    assert all(i >= 5 for i in indices)  # only span-bearing sentences


def test_boundary_shift_skips_unshiftable():
    from labelaudit.corpus import Dataset, make_sentence
    # single-token span with no O room on either side cannot shift
    stuck = make_sentence(["A1"], ["B-A"])
    ok = make_sentence(["pad", "B1", "pad2"], ["O", "B-B", "O"])
    ds = Dataset((stuck, ok))
    out, indices = corrupt_labels(ds, CorruptionSpec(0.5, "boundary-shift", 0))
    assert indices == [1]
