"""
Unit tests for label canonicalization, the class vocabulary, stratified
sampling and train/test splits.

Run with: pytest tests/test_labels_sampling.py
"""

from collections import Counter

import pytest

from src.errors import LabelVocabError, SamplingError
from src.flows.labels import LabelVocab, build_label_vocab, canonical_label, count_table, label_counts
from src.flows.sampling import allocate_quota, split_train_test, stratified_sample
from tests.helpers import FIXTURE_COUNTS, IOT23_COUNTS, make_records


def test_canonical_label_forms():
    """Verdict prefixes are dropped and separators unified."""
    assert canonical_label("Malicious   PartOfAHorizontalPortScan") == "PartOfAHorizontalPortScan"
    assert canonical_label("Malicious   C&C HeartBeat") == "C&C-HeartBeat"
    assert canonical_label("C&C--HeartBeat") == "C&C-HeartBeat"
    assert canonical_label("Benign   -") == "Benign"
    assert canonical_label("benign") == "Benign"

    with pytest.raises(LabelVocabError):
        canonical_label("   ")


def test_vocab_order_on_iot23_counts():
    """The IoT-23 table gives 11 classes with the horizontal port scan first."""
    vocab = LabelVocab.from_counts(IOT23_COUNTS)

    assert len(vocab) == 11, "Every label should become a class"
    assert vocab.names[0] == "PartOfAHorizontalPortScan", "Largest class should get id 0"
    assert vocab.names[vocab.benign_id] == "Benign"
    assert vocab.names[-1] == "C&C-Mirai", "Smallest class should get the last id"


def test_vocab_ties_break_lexicographically():
    """Equal counts: the lexicographically smaller name gets the lower id."""
    vocab = LabelVocab.from_counts({"Okiru": 4, "DDoS": 4})

    assert vocab.names == ["DDoS", "Okiru"]
    assert vocab.benign_id is None


def test_vocab_single_benign_class():
    """All records benign: one class, benign_id 0."""
    vocab = build_label_vocab(make_records({"Benign": 3}))

    assert vocab.names == ["Benign"]
    assert vocab.benign_id == 0


def test_vocab_requires_benign_in_binary_mode():
    """Binary mode without a benign class is an explicit error."""
    with pytest.raises(LabelVocabError, match="no benign class"):
        build_label_vocab(make_records({"DDoS": 2, "Okiru": 1}), require_benign=True)


def test_vocab_index_is_bijection(fixture_records):
    """index maps names onto 0..n-1 and id_of agrees with it."""
    vocab = build_label_vocab(fixture_records)

    assert sorted(vocab.index.values()) == list(range(len(vocab)))
    for name, i in vocab.index.items():
        assert vocab.id_of(name) == i
    with pytest.raises(LabelVocabError):
        vocab.id_of("NotAClass")


def test_vocab_rejects_duplicates():
    """Duplicate names fail validation."""
    with pytest.raises(ValueError):
        LabelVocab(names=["Benign", "Benign"], benign_id=0)


def test_count_table_layout():
    """Summary rows are (label, count) in vocabulary order."""
    rows = count_table(FIXTURE_COUNTS)

    assert rows[0] == {"label": "Benign", "count": 11}
    assert [row["label"] for row in rows][-2:] == ["Attack", "C&C-Mirai"]


def test_quota_keeps_rare_iot23_classes():
    """Budget 10000 over the IoT-23 distribution keeps every small class whole."""
    alloc = allocate_quota(IOT23_COUNTS, 10000)

    assert sum(alloc.values()) == 10000, "Allocation should spend exactly the budget"
    for name in ("C&C-Mirai", "FileDownload", "C&C-Torii", "C&C-HeartBeat-FileDownload", "C&C-FileDownload"):
        assert alloc[name] == IOT23_COUNTS[name], f"{name} should be retained in full"
    assert all(alloc[name] >= 1 for name in IOT23_COUNTS), "No class may vanish"


def test_sample_equal_classes_two_seeds():
    """Three classes of 100 with budget 30: 10 each, different members per seed."""
    records = make_records({"A": 100, "B": 100, "C": 100})
    first = stratified_sample(records, 30, seed=1)
    second = stratified_sample(records, 30, seed=2)

    assert Counter(r.label for r in first) == {"A": 10, "B": 10, "C": 10}
    assert Counter(r.label for r in second) == {"A": 10, "B": 10, "C": 10}
    assert {r.uid for r in first} != {r.uid for r in second}, "Different seeds should draw different members"


def test_sample_is_deterministic_and_ordered():
    """Same seed, same output; selected records keep input order."""
    records = make_records({"A": 50, "B": 20, "C": 5})
    first = stratified_sample(records, 25, seed=3)

    assert first == stratified_sample(records, 25, seed=3)
    assert [r.ts for r in first] == sorted(r.ts for r in first)


def test_sample_full_budget_copies_input():
    """budget >= input size returns the input unchanged."""
    records = make_records({"A": 4, "B": 2})

    assert stratified_sample(records, len(records), seed=0) == records


def test_sample_keeps_singleton_for_many_seeds():
    """A count-1 class survives sampling for 100 seeds."""
    records = make_records({"Benign": 60, "PartOfAHorizontalPortScan": 40, "Okiru": 10, "C&C-Mirai": 1})

    for seed in range(100):
        sample = stratified_sample(records, 8, seed)
        assert set(label_counts(sample)) == set(label_counts(records)), f"Seed {seed} lost a class"


def test_sample_errors():
    """Budget below the class count and empty input are rejected."""
    with pytest.raises(SamplingError):
        stratified_sample(make_records({"A": 5, "B": 5, "C": 5}), 2, seed=0)
    with pytest.raises(SamplingError):
        stratified_sample([], 10, seed=0)


def test_split_per_class_counts():
    """Four classes of 25 at ratio 0.8 give 20 train and 5 test each."""
    records = make_records({"A": 25, "B": 25, "C": 25, "D": 25})
    split = split_train_test(records, 0.8, seed=4)

    assert Counter(r.label for r in split.train) == {"A": 20, "B": 20, "C": 20, "D": 20}
    assert Counter(r.label for r in split.test) == {"A": 5, "B": 5, "C": 5, "D": 5}
    assert not {r.uid for r in split.train} & {r.uid for r in split.test}, "Partitions must be disjoint"


def test_split_two_records_half():
    """Ratio 0.5 over two records of one class splits 1/1."""
    split = split_train_test(make_records({"A": 2}), 0.5, seed=0)

    assert len(split.train) == 1 and len(split.test) == 1


def test_split_singleton_goes_to_train(fixture_records):
    """Single-record classes go to train; sizes always add up."""
    for seed in range(5):
        split = split_train_test(fixture_records, 0.7, seed)
        train_labels = set(label_counts(split.train))

        assert len(split.train) + len(split.test) == len(fixture_records)
        assert {"C&C-Mirai", "Attack"} <= train_labels, "Singletons belong to train"
        assert "C&C-HeartBeat" in set(label_counts(split.test)), "Two-record classes appear in both"


def test_split_is_deterministic():
    """Same seed twice gives the same split and split hash."""
    records = make_records({"A": 30, "B": 12})

    first = split_train_test(records, 0.75, seed=9)
    second = split_train_test(records, 0.75, seed=9)
    other = split_train_test(records, 0.75, seed=10)

    assert first.train_indices == second.train_indices
    assert first.split_hash == second.split_hash
    assert first.split_hash != other.split_hash


def test_split_rejects_bad_ratio():
    with pytest.raises(SamplingError):
        split_train_test(make_records({"A": 4}), 1.0, seed=0)
