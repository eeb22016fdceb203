"""
Unit tests for schema fitting, record encoding, windowing, batching and the
synthetic tasks.

Run with: pytest tests/test_features.py
"""

from dataclasses import replace

import numpy as np
import pytest

from src.errors import SchemaError, ShapeError
from src.features.encoding import encode_record, encode_records
from src.features.schema import FeatureConfig, FeatureSchema, fit_schema
from src.features.sequences import SequenceBatch, batch, make_sequences, window_count
from src.features.synthetic import SyntheticTask, make_task
from src.flows.labels import build_label_vocab
from src.flows.records import Proto
from tests.helpers import make_records


def _with(records, **changes):
    return [replace(r, **changes) for r in records]


def test_zero_variance_column():
    """Constant column: mean kept, std stored as 1."""
    records = _with(make_records({"A": 3}), duration=0.0)
    schema = fit_schema(records, FeatureConfig(numeric_cols=["duration"], categorical_cols=["proto"]))

    assert schema.numeric_cols[0].mean == 0.0
    assert schema.numeric_cols[0].std == 1.0, "Zero variance should be stored as std 1"


def test_population_std():
    """duration {1, 3}: mean 2, population std 1; 3.0 encodes to 1.0."""
    records = make_records({"A": 2})
    records = [replace(records[0], duration=1.0), replace(records[1], duration=3.0)]
    schema = fit_schema(records, FeatureConfig(numeric_cols=["duration"], categorical_cols=["proto"]))

    assert schema.numeric_cols[0].mean == pytest.approx(2.0)
    assert schema.numeric_cols[0].std == pytest.approx(1.0)
    numeric, _ = encode_record(records[1], schema)
    assert numeric[0] == pytest.approx(1.0)


def test_categorical_vocabulary_order():
    """Equal-frequency values are indexed by name, starting after OOV."""
    records = make_records({"A": 4})
    records = _with(records[:2], proto=Proto.UDP) + _with(records[2:], proto=Proto.TCP)
    schema = fit_schema(records, FeatureConfig(numeric_cols=["duration"], categorical_cols=["proto"]))

    assert schema.categorical_cols[0].vocabulary == {"tcp": 1, "udp": 2}
    assert schema.categorical_width == 3, "Width includes the OOV slot"


def test_unseen_value_hits_oov():
    """A proto never seen at fit time is one-hot at index 0 of its block."""
    records = make_records({"A": 4})
    schema = fit_schema(records, FeatureConfig(numeric_cols=["duration"], categorical_cols=["proto"]))
    _, categorical = encode_record(replace(records[0], proto=Proto.ICMP), schema)

    np.testing.assert_array_equal(categorical, [1.0, 0.0])


def test_mean_value_encodes_to_zero_and_absent_is_imputed():
    """Mean-valued and absent numerics both encode to 0."""
    records = make_records({"A": 2})
    records = [replace(records[0], duration=1.0), replace(records[1], duration=3.0)]
    schema = fit_schema(records, FeatureConfig(numeric_cols=["duration"], categorical_cols=["proto"]))

    assert encode_record(replace(records[0], duration=2.0), schema)[0][0] == 0.0
    assert encode_record(replace(records[0], duration=None), schema)[0][0] == 0.0


def test_missing_service_is_a_token(fixture_records, fixture_schema):
    """An absent service is encoded as its own '-' token."""
    service = next(col for col in fixture_schema.categorical_cols if col.name == "service")

    assert "-" in service.vocabulary, "Absent service should get a vocabulary slot"
    assert service.vocabulary["-"] == 1, "'-' is the most frequent service value in the fixture"


def test_unknown_column_rejected():
    """A configured column that records lack is named in the error."""
    with pytest.raises(SchemaError, match="bogus"):
        fit_schema(make_records({"A": 2}), FeatureConfig(numeric_cols=["bogus"]))


def test_train_encoding_is_standardized():
    """Encoding the training set with its own schema gives mean 0 and std 1 per column."""
    records = make_records({"A": 40, "B": 23})
    schema = fit_schema(records, FeatureConfig())
    numeric, _ = encode_records(records, schema)

    np.testing.assert_allclose(numeric.mean(axis=0), 0.0, atol=1e-9)
    for j, col in enumerate(schema.numeric_cols):
        if col.name == "resp_port":
            continue  # constant in these records
        assert abs(numeric[:, j].std() - 1.0) < 1e-9, f"{col.name} should have unit std"
    assert np.all(np.isfinite(numeric))


def test_schema_save_load(fixture_schema, tmp_path):
    """The schema JSON reloads to an equal schema."""
    path = tmp_path / "schema.json"
    fixture_schema.save(path)

    assert FeatureSchema.load(path) == fixture_schema


def test_window_counts():
    """10 records -> 1 window, 12 -> 3, 5 -> none (W=10, stride 1)."""
    records = make_records({"A": 6, "B": 6})
    schema = fit_schema(records, FeatureConfig(window=10))
    vocab = build_label_vocab(records)

    assert len(make_sequences(records[:10], schema, vocab)) == 1
    samples = make_sequences(records, schema, vocab)
    assert len(samples) == 3
    assert [s.target for s in samples] == [vocab.id_of(r.label) for r in records[9:12]], (
        "Each window takes the label of its last record"
    )
    assert make_sequences(records[:5], schema, vocab) == []


def test_window_count_formula():
    for n, w, stride in [(10, 10, 1), (12, 10, 1), (5, 10, 1), (30, 4, 3), (31, 4, 3)]:
        assert window_count(n, w, stride) == max(0, (n - w) // stride + 1)


def test_strided_windows_and_shapes(fixture_records, fixture_schema):
    """Stride 3 over the fixture: shapes are W x D per channel."""
    schema = fixture_schema.model_copy(update={"stride": 3})
    vocab = build_label_vocab(fixture_records)
    samples = make_sequences(fixture_records, schema, vocab)

    assert len(samples) == window_count(len(fixture_records), 4, 3)
    assert samples[0].numeric.shape == (4, schema.numeric_width)
    assert samples[0].categorical.shape == (4, schema.categorical_width)
    assert np.all(samples[0].categorical.sum(axis=1) == len(schema.categorical_cols)), "One hot per column"


def test_unsorted_records_are_sorted(fixture_records, fixture_schema):
    """Windows over reversed input equal windows over sorted input."""
    vocab = build_label_vocab(fixture_records)
    forward = make_sequences(fixture_records, fixture_schema, vocab)
    backward = make_sequences(fixture_records[::-1], fixture_schema, vocab)

    assert [s.target for s in forward] == [s.target for s in backward]
    np.testing.assert_array_equal(forward[0].numeric, backward[0].numeric)


def test_batch_sizes_and_order():
    """10 samples in batches of 4 -> 4, 4, 2 in input order."""
    samples, _, _ = make_task(SyntheticTask.SIGN, 10, seed=0, window=3)
    batches = batch(samples, 4)

    assert [len(b) for b in batches] == [4, 4, 2]
    np.testing.assert_array_equal(batches[0].numeric[1], samples[1].numeric)


def test_shuffled_batches_are_seeded_permutations():
    """Same seed gives identical batches; together they hold every sample once."""
    samples, _, _ = make_task(SyntheticTask.SIGN, 10, seed=0, window=3)
    first = batch(samples, 4, seed=7, shuffle=True)
    second = batch(samples, 4, seed=7, shuffle=True)

    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.numeric, b.numeric)
    seen = np.concatenate([b.numeric[:, 0, 0] for b in first])
    np.testing.assert_array_equal(np.sort(seen), np.sort([s.numeric[0, 0] for s in samples]))


def test_batch_rejects_mixed_windows():
    short, _, _ = make_task(SyntheticTask.SIGN, 2, seed=0, window=3)
    long, _, _ = make_task(SyntheticTask.SIGN, 2, seed=0, window=5)

    with pytest.raises(ShapeError):
        SequenceBatch.stack(short + long)
    with pytest.raises(ValueError):
        batch(short, 0)


def test_synthetic_tasks():
    """Both tasks are seeded, balanced enough, and match their schema."""
    for task in SyntheticTask:
        samples, schema, vocab = make_task(task, 200, seed=11, window=6)
        again, _, _ = make_task(task, 200, seed=11, window=6)
        targets = np.array([s.target for s in samples])

        assert len(vocab) == 2 and vocab.benign_id == 0
        assert samples[0].numeric.shape == (6, schema.numeric_width)
        assert samples[0].categorical.shape == (6, schema.categorical_width)
        assert 40 < targets.sum() < 160, f"{task.value} classes should both be well represented"
        np.testing.assert_array_equal(samples[5].numeric, again[5].numeric)


def test_salient_step_is_in_first_half():
    """The marker token and the large value share one step before window // 2."""
    samples, schema, _ = make_task(SyntheticTask.SALIENT, 200, seed=3, window=20)
    marker = schema.categorical_cols[0].vocabulary["marker"]

    for s in samples:
        position = int(np.argmax(s.categorical[:, marker]))
        assert s.categorical[:, marker].sum() == 1, "Exactly one step carries the marker"
        assert position < 10, "The marker should sit in the first half of the window"
        assert abs(s.numeric[position, 0]) >= 2.0
        assert s.target == int(s.numeric[position, 0] > 0), "The spike sign is the class"


def test_label_noise_flips_exact_fraction():
    """10% noise flips 20 of 200 targets and leaves the sequences unchanged."""
    clean, _, _ = make_task(SyntheticTask.SIGN, 200, seed=5, window=4)
    noisy, _, _ = make_task(SyntheticTask.SIGN, 200, seed=5, window=4, label_noise=0.1)

    flipped = sum(a.target != b.target for a, b in zip(clean, noisy))
    assert flipped == 20
    np.testing.assert_array_equal(clean[7].numeric, noisy[7].numeric)
    with pytest.raises(ValueError):
        make_task(SyntheticTask.SIGN, 10, seed=0, label_noise=1.5)
