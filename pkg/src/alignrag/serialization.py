"""Versioned binary container for index and checkpoint files.

Layout (little-endian throughout):

    bytes 0..3    magic b"ARAG"
    bytes 4..7    uint32 format version
    bytes 8..11   uint32 header length L
    bytes 12..    header: UTF-8 JSON with sorted keys
    ...           float64 C-order array payloads, concatenated in the
                  order listed under header["arrays"]

The header's "kind" field distinguishes file types and its "arrays"
field records name, shape, and byte offset of every payload. Writing
is fully deterministic, so save -> load -> save is byte-identical.
"""
from __future__ import annotations

import json
import struct

import numpy as np

from .errors import CheckpointError

MAGIC = b"ARAG"
FORMAT_VERSION = 1


def write_container(path, kind: str, header: dict, arrays: dict[str, np.ndarray]) -> None:
    manifest = []
    offset = 0
    names = sorted(arrays)
    for name in names:
        arr = np.ascontiguousarray(arrays[name], dtype=np.float64)
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.nbytes
    full_header = dict(header)
    full_header["kind"] = kind
    full_header["arrays"] = manifest
    blob = json.dumps(full_header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
        fh.write(blob)
        for name in names:
            fh.write(np.ascontiguousarray(arrays[name], dtype=np.float64).tobytes())


def read_container(path, kind: str) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise CheckpointError(f"{path}: bad magic {magic!r}")
        version, header_len = struct.unpack("<II", fh.read(8))
        if version != FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported format version {version}")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        if header.get("kind") != kind:
            raise CheckpointError(f"{path}: expected kind {kind!r}, got {header.get('kind')!r}")
        payload = fh.read()
    arrays = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=start)
        arrays[entry["name"]] = arr.reshape(shape).copy()
    return header, arrays
