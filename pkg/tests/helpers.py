"""Builders shared by several test modules."""

from pathlib import Path

import numpy as np

from src.features.sequences import SequenceBatch
from src.features.synthetic import synthetic_schema
from src.flows.labels import LabelVocab
from src.flows.records import FlowRecord, Proto
from src.model.config import ModelConfig
from src.model.ecnet import EcNetModel, build_model

FIXTURES = Path(__file__).parent / "fixtures"
ZEEK_FIXTURE = FIXTURES / "conn.log.labeled"

# Valid records per class in the fixture (two further lines are malformed)
FIXTURE_COUNTS = {
    "Benign": 11,
    "PartOfAHorizontalPortScan": 7,
    "Okiru": 5,
    "DDoS": 3,
    "C&C-HeartBeat": 2,
    "Attack": 1,
    "C&C-Mirai": 1,
}

# Label counts of the IoT-23 light captures
IOT23_COUNTS = {
    "PartOfAHorizontalPortScan": 825939,
    "Okiru": 262690,
    "Benign": 197809,
    "DDoS": 138777,
    "Attack": 3915,
    "C&C-HeartBeat": 349,
    "C&C-FileDownload": 43,
    "C&C-Torii": 30,
    "FileDownload": 13,
    "C&C-HeartBeat-FileDownload": 8,
    "C&C-Mirai": 1,
}


def tiny_model(**overrides) -> EcNetModel:
    """Small 3-class model on the synthetic schema (D_num=2, W=4)."""
    schema = synthetic_schema(d_num=2, window=4)
    vocab = LabelVocab(names=["Benign", "Scan", "DDoS"], benign_id=0)
    settings = dict(hidden_numeric=3, hidden_categorical=2, d_k=4, fc_sizes=[4], n_classes=3, seed=5)
    settings.update(overrides)
    return build_model(ModelConfig(**settings), schema, vocab)


def random_batch(m: EcNetModel, batch_size: int = 2, seed: int = 0) -> SequenceBatch:
    """Random numeric channel and one-hot categorical rows matching m's schema."""
    rng = np.random.default_rng(seed)
    window = m.schema.window
    width = m.schema.categorical_width
    tokens = rng.integers(0, width, size=(batch_size, window))
    return SequenceBatch(
        numeric=rng.normal(size=(batch_size, window, m.schema.numeric_width)),
        categorical=np.eye(width)[tokens],
        targets=rng.integers(0, m.config.n_classes, size=batch_size),
    )


def make_records(counts: dict[str, int]) -> list[FlowRecord]:
    """Records with increasing timestamps, classes interleaved round-robin."""
    pending = dict(counts)
    records = []
    while any(pending.values()):
        for label in counts:
            if pending[label]:
                pending[label] -= 1
                i = len(records)
                records.append(FlowRecord(
                    ts=float(i), uid=f"C{i}", orig_host="10.0.0.1", orig_port=1000 + i % 50000,
                    resp_host="10.0.0.2", resp_port=80, proto=Proto.TCP, service=None,
                    duration=0.1 * (i % 7), orig_bytes=i % 300, resp_bytes=2 * i % 500,
                    conn_state="SF", orig_pkts=1 + i % 5, resp_pkts=i % 3,
                    label_raw=label, label=label,
                ))
    return records
