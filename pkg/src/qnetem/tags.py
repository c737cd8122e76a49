"""Time-tag wire formats: binary records, JSON-lines debug, histogram CSV.

The binary format is a flat little-endian record stream, 11 bytes per
record: u8 node, u8 channel, u8 origin (0 photon, 1 dark), u64 time in
integer picoseconds. The JSON-lines form is the human-readable mirror
used for debugging and fixtures.
"""

from __future__ import annotations

import json
from typing import Iterable

import numpy as np

from .errors import E_CORRUPT, EmulatorError

ORIGIN_PHOTON = 0
ORIGIN_DARK = 1
_ORIGIN_NAMES = {ORIGIN_PHOTON: "photon", ORIGIN_DARK: "dark"}
_ORIGIN_CODES = {v: k for k, v in _ORIGIN_NAMES.items()}

TAG_DTYPE = np.dtype(
    [("node", "u1"), ("channel", "u1"), ("origin", "u1"), ("time_ps", "<u8")]
)
RECORD_BYTES = TAG_DTYPE.itemsize  # 11


def make_tags(times_ps, channels, node=0, origin=ORIGIN_PHOTON) -> np.ndarray:
    """Build a tag array from parallel time/channel sequences."""
    times = np.asarray(times_ps, dtype=np.uint64)
    out = np.zeros(times.shape[0], dtype=TAG_DTYPE)
    out["time_ps"] = times
    out["channel"] = np.asarray(channels, dtype=np.uint8)
    out["node"] = node
    out["origin"] = origin
    return out


def sort_tags(tags: np.ndarray) -> np.ndarray:
    return tags[np.argsort(tags["time_ps"], kind="stable")]


def encode_tags(tags: np.ndarray) -> bytes:
    return np.ascontiguousarray(tags, dtype=TAG_DTYPE).tobytes()


def decode_tags(data: bytes) -> np.ndarray:
    if len(data) % RECORD_BYTES != 0:
        raise EmulatorError(E_CORRUPT, f"tag payload length {len(data)} not a record multiple")
    return np.frombuffer(data, dtype=TAG_DTYPE).copy()


def tags_to_jsonl(tags: np.ndarray) -> str:
    lines = []
    for rec in tags:
        lines.append(
            json.dumps(
                {
                    "node": int(rec["node"]),
                    "channel": int(rec["channel"]),
                    "origin": _ORIGIN_NAMES[int(rec["origin"])],
                    "time_ps": int(rec["time_ps"]),
                },
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def tags_from_jsonl(text: str) -> np.ndarray:
    rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    out = np.zeros(len(rows), dtype=TAG_DTYPE)
    for i, row in enumerate(rows):
        out[i] = (row["node"], row["channel"], _ORIGIN_CODES[row["origin"]], row["time_ps"])
    return out


def histogram_csv(bin_centers_ps: Iterable[float], counts: Iterable[int]) -> str:
    """Delay histogram in the interchange CSV layout."""
    lines = ["bin_center_ps,count"]
    for center, count in zip(bin_centers_ps, counts):
        center = float(center)
        text = f"{int(center)}" if center.is_integer() else f"{center}"
        lines.append(f"{text},{int(count)}")
    return "\n".join(lines) + "\n"
