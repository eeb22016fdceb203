"""Label canonicalization and the class vocabulary."""

import re
from collections import Counter
from pathlib import Path
from typing import Iterable

from pydantic import BaseModel, Field, model_validator

from src.errors import LabelVocabError
from src.flows.records import FlowRecord

BENIGN_NAME = "Benign"

# Tuple prefix tokens written by the IoT-23 labelling scripts
_VERDICT_TOKENS = {"malicious", "benign"}
_SEPARATOR_RUN = re.compile(r"[\s\-]+")


def canonical_label(label_raw: str) -> str:
    """Reduce a raw label string to its canonical class name.

    The verdict prefix ("Malicious"/"Benign") is dropped when a detailed label
    follows it; runs of spaces and hyphens become a single hyphen, so
    "C&C FileDownload" and "C&C-FileDownload" unify.

    Args:
        label_raw: Verbatim label text, e.g. "Malicious   PartOfAHorizontalPortScan"

    Returns:
        Canonical class name, e.g. "PartOfAHorizontalPortScan"

    Raises:
        LabelVocabError: If the label is empty
    """
    tokens = label_raw.split()
    if not tokens:
        raise LabelVocabError("empty label")
    if tokens[0].lower() in _VERDICT_TOKENS and len(tokens) > 1:
        detail = [t for t in tokens[1:] if t != "-"]
        if not detail:
            return BENIGN_NAME if tokens[0].lower() == "benign" else tokens[0]
        tokens = detail
    if len(tokens) == 1 and tokens[0].lower() == "benign":
        return BENIGN_NAME
    return _SEPARATOR_RUN.sub("-", " ".join(tokens)).strip("-")


class LabelVocab(BaseModel):
    """Ordered class names; position in names is the class id."""

    names: list[str] = Field(..., min_length=1)
    benign_id: int | None = None

    @model_validator(mode="after")
    def _check(self) -> "LabelVocab":
        if len(set(self.names)) != len(self.names):
            raise ValueError("class names must be unique")
        if self.benign_id is not None and not 0 <= self.benign_id < len(self.names):
            raise ValueError(f"benign_id {self.benign_id} out of range")
        return self

    @property
    def index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def __len__(self) -> int:
        return len(self.names)

    def id_of(self, name: str) -> int:
        """Class id for a canonical name.

        Raises:
            LabelVocabError: If the name is not in the vocabulary
        """
        try:
            return self.index[name]
        except KeyError:
            raise LabelVocabError(f"label {name!r} not in vocabulary {self.names}") from None

    def require_benign(self) -> int:
        """benign_id, or an error when the vocabulary has no benign class."""
        if self.benign_id is None:
            raise LabelVocabError("no benign class in vocabulary")
        return self.benign_id

    @classmethod
    def from_counts(cls, counts: dict[str, int], require_benign: bool = False) -> "LabelVocab":
        """Order classes by descending count, ties broken lexicographically."""
        names = sorted(counts, key=lambda name: (-counts[name], name))
        benign = [i for i, name in enumerate(names) if name.lower() == BENIGN_NAME.lower()]
        vocab = cls(names=names, benign_id=benign[0] if benign else None)
        if require_benign:
            vocab.require_benign()
        return vocab

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.model_dump_json(indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "LabelVocab":
        """Read a vocabulary file.

        Raises:
            FileNotFoundError: If path does not exist
        """
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"label vocabulary not found: {path}")
        return cls.model_validate_json(path.read_text(encoding="utf-8"))


def label_counts(records: Iterable[FlowRecord]) -> Counter:
    """Count records per canonical label."""
    return Counter(r.label for r in records)


def build_label_vocab(records: list[FlowRecord], require_benign: bool = False) -> LabelVocab:
    """Build the class vocabulary from parsed records.

    Args:
        records: Non-empty list of records
        require_benign: Raise when no class is named "Benign" (binary mode)

    Returns:
        LabelVocab ordered by descending frequency, then name

    Raises:
        LabelVocabError: On empty input, or missing benign class when required
    """
    if not records:
        raise LabelVocabError("cannot build a vocabulary from zero records")
    return LabelVocab.from_counts(dict(label_counts(records)), require_benign=require_benign)


def count_table(counts: dict[str, int]) -> list[dict[str, int | str]]:
    """Rows of (label, count) in vocabulary order, for ingest summaries."""
    return [
        {"label": name, "count": counts[name]}
        for name in sorted(counts, key=lambda name: (-counts[name], name))
    ]
