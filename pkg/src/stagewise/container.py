"""Single-file tensor container: JSON manifest + little-endian binary blob.

Used for parameter checkpoints and trajectory datasets alike. Layout:

    bytes 0..8    magic ``TNSC0001``
    bytes 8..16   manifest length, unsigned 64-bit little-endian
    manifest      UTF-8 JSON: {"meta": {...}, "tensors": [entry, ...]}
    payload       concatenated C-order little-endian array bytes

Each manifest entry records name, dtype, shape, offset and nbytes, so the
payload can be sliced without trusting anything but the manifest. Round-trips
are bit-exact; writing the same tensors and meta twice yields identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Mapping

import numpy as np

MAGIC = b"TNSC0001"


class ContainerError(Exception):
    pass


def _to_little_endian(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    if arr.dtype.byteorder == ">":
        arr = arr.astype(arr.dtype.newbyteorder("<"))
    return arr


def write_container(path: str | Path, tensors: Mapping[str, np.ndarray], meta: dict | None = None) -> None:
    """Write named arrays plus a free-form meta dict to a single file."""
    entries = []
    blobs = []
    offset = 0
    for name, arr in tensors.items():
        arr = _to_little_endian(np.asarray(arr))
        raw = arr.tobytes(order="C")
        dtype = arr.dtype.str if arr.dtype.byteorder != "|" else arr.dtype.str
        entries.append(
            {
                "name": name,
                "dtype": dtype,
                "shape": list(arr.shape),
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        blobs.append(raw)
        offset += len(raw)
    manifest = json.dumps({"meta": meta or {}, "tensors": entries}, sort_keys=True).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(manifest)))
        f.write(manifest)
        for raw in blobs:
            f.write(raw)


def read_container(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read back (meta, {name: array}). Arrays are fresh writable copies."""
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise ContainerError(f"{path}: not a tensor container (bad magic {magic!r})")
        (mlen,) = struct.unpack("<Q", f.read(8))
        manifest = json.loads(f.read(mlen).decode("utf-8"))
        payload = f.read()
    tensors: dict[str, np.ndarray] = {}
    for entry in manifest["tensors"]:
        start, nbytes = entry["offset"], entry["nbytes"]
        chunk = payload[start : start + nbytes]
        if len(chunk) != nbytes:
            raise ContainerError(f"{path}: truncated payload for tensor {entry['name']!r}")
        arr = np.frombuffer(chunk, dtype=np.dtype(entry["dtype"])).reshape(entry["shape"]).copy()
        tensors[entry["name"]] = arr
    return manifest["meta"], tensors


def read_meta(path: str | Path) -> dict:
    """Read only the manifest meta block (cheap; skips the payload)."""
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise ContainerError(f"{path}: not a tensor container (bad magic {magic!r})")
        (mlen,) = struct.unpack("<Q", f.read(8))
        manifest = json.loads(f.read(mlen).decode("utf-8"))
    return manifest["meta"]
