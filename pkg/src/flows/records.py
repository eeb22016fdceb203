"""Typed flow records parsed from Zeek connection logs."""

import math
from dataclasses import dataclass, fields
from enum import Enum


class Proto(str, Enum):
    """Transport protocol of a connection.

    Anything Zeek reports other than tcp/udp/icmp collapses to OTHER.
    """
    TCP = "tcp"
    UDP = "udp"
    ICMP = "icmp"
    OTHER = "other"

    @classmethod
    def parse(cls, value: str) -> "Proto":
        try:
            return cls(value.lower())
        except ValueError:
            return cls.OTHER


@dataclass(frozen=True)
class FlowRecord:
    """One Zeek conn.log entry with its ground-truth label."""

    ts: float
    uid: str
    orig_host: str
    orig_port: int | None
    resp_host: str
    resp_port: int | None
    proto: Proto
    service: str | None
    duration: float | None
    orig_bytes: int | None
    resp_bytes: int | None
    conn_state: str
    orig_pkts: int | None
    resp_pkts: int | None
    label_raw: str
    label: str

    def __post_init__(self):
        for name in FLOAT_COLUMNS:
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        for port in (self.orig_port, self.resp_port):
            if port is not None and not 0 <= port <= 65535:
                raise ValueError(f"port out of range: {port}")
        for name in ("duration", "orig_bytes", "resp_bytes", "orig_pkts", "resp_pkts"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")


# Column order shared by the canonical CSV and the Zeek writer
FLOW_COLUMNS: tuple[str, ...] = tuple(f.name for f in fields(FlowRecord))

INT_COLUMNS = ("orig_port", "resp_port", "orig_bytes", "resp_bytes", "orig_pkts", "resp_pkts")
FLOAT_COLUMNS = ("ts", "duration")
