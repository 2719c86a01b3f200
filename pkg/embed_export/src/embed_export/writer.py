"""Embedding file writer.

The binary layout is the portable format the retrieval engine reads:
little-endian, magic ``EMBV``, u32 version, u32 dim, u32 count, then per
record a u32 id length, the UTF-8 id bytes, and ``dim`` float32 values.
A JSON-lines fallback (``{"id", "vector": [...]}``) is available for
debugging and interop.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

MAGIC = b"EMBV"
VERSION = 1


def write_binary(records: Sequence[tuple[str, np.ndarray]], dim: int, path: str | Path) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<III", VERSION, dim, len(records)))
    for key, vec in records:
        raw = key.encode("utf-8")
        buf.write(struct.pack("<I", len(raw)))
        buf.write(raw)
        buf.write(np.asarray(vec, dtype="<f4").tobytes())
    Path(path).write_bytes(buf.getvalue())


def write_jsonl(records: Sequence[tuple[str, np.ndarray]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, vec in records:
            rec = {"id": key, "vector": [float(x) for x in np.asarray(vec, dtype=np.float32)]}
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
