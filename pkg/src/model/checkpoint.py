"""Binary checkpoint format.

Layout (all integers little-endian):

    magic        4 bytes   b"ECNT"
    version      uint16
    header_len   uint32
    header       JSON (UTF-8): model_config, feature_schema, label_vocab, parameters
    payload      float64 values of every parameter, in header order
    checksum     uint32    CRC-32 of the payload

See docs/checkpoint-format.md.
"""

import json
import logging
import struct
import zlib
from pathlib import Path

import numpy as np

from src.errors import CheckpointChecksumError, CheckpointFormatError, CheckpointVersionError
from src.features.schema import FeatureSchema
from src.flows.labels import LabelVocab
from src.model.config import ModelConfig
from src.model.ecnet import EcNetModel

logger = logging.getLogger(__name__)

MAGIC = b"ECNT"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sHI")
_CHECKSUM = struct.Struct("<I")


def checkpoint_bytes(m: EcNetModel) -> bytes:
    """Serialize a model to the checkpoint byte layout."""
    header = {
        "model_config": m.config.model_dump(mode="json"),
        "feature_schema": m.schema.model_dump(mode="json"),
        "label_vocab": m.vocab.model_dump(mode="json"),
        "parameters": [{"name": name, "shape": list(value.shape)} for name, value in m.params.items()],
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = b"".join(np.ascontiguousarray(value, dtype="<f8").tobytes() for value in m.params.values())
    return b"".join([
        _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)),
        header_bytes,
        payload,
        _CHECKSUM.pack(zlib.crc32(payload)),
    ])


def save_checkpoint(m: EcNetModel, path: str | Path) -> None:
    """Write a model checkpoint to path."""
    data = checkpoint_bytes(m)
    Path(path).write_bytes(data)
    logger.info("wrote checkpoint %s (%d parameters, %d bytes)", path, m.parameter_count(), len(data))


def checkpoint_from_bytes(data: bytes) -> EcNetModel:
    """Rebuild a model from checkpoint bytes.

    Raises:
        CheckpointFormatError: Wrong magic bytes or unreadable header
        CheckpointVersionError: Written by a newer format version
        CheckpointChecksumError: Truncated payload or checksum mismatch
    """
    if len(data) < _PREFIX.size:
        raise CheckpointChecksumError("file too short to be a checkpoint")
    magic, version, header_len = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointFormatError(f"bad magic bytes {magic!r}")
    if version > FORMAT_VERSION:
        raise CheckpointVersionError(f"checkpoint version {version} is newer than supported {FORMAT_VERSION}")

    header_end = _PREFIX.size + header_len
    if len(data) < header_end:
        raise CheckpointChecksumError("truncated header")
    try:
        header = json.loads(data[_PREFIX.size:header_end].decode("utf-8"))
        config = ModelConfig.model_validate(header["model_config"])
        schema = FeatureSchema.model_validate(header["feature_schema"])
        vocab = LabelVocab.model_validate(header["label_vocab"])
        layout = [(entry["name"], tuple(entry["shape"])) for entry in header["parameters"]]
    except (ValueError, KeyError, TypeError) as e:
        raise CheckpointFormatError(f"unreadable checkpoint header: {e}") from e

    sizes = [int(np.prod(shape)) for _, shape in layout]
    payload_len = 8 * sum(sizes)
    if len(data) != header_end + payload_len + _CHECKSUM.size:
        raise CheckpointChecksumError(
            f"expected {header_end + payload_len + _CHECKSUM.size} bytes, found {len(data)}"
        )
    payload = data[header_end:header_end + payload_len]
    (stored,) = _CHECKSUM.unpack_from(data, header_end + payload_len)
    if zlib.crc32(payload) != stored:
        raise CheckpointChecksumError("payload checksum mismatch")

    values = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    params = {}
    offset = 0
    for (name, shape), size in zip(layout, sizes):
        params[name] = values[offset:offset + size].reshape(shape).copy()
        offset += size
    return EcNetModel(config=config, schema=schema, vocab=vocab, params=params)


def load_checkpoint(path: str | Path) -> EcNetModel:
    """Read a checkpoint written by save_checkpoint."""
    return checkpoint_from_bytes(Path(path).read_bytes())
