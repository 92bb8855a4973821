"""Single-file binary container for named float64/int64 tensors.

Layout: 8-byte magic, uint64 little-endian header length, UTF-8 JSON
header, then the raw tensor payloads back to back in manifest order,
each C-contiguous little-endian. The header carries a kind tag, a
format version, an arbitrary JSON config, and the tensor manifest
(name, dtype, shape). Loading is bit-exact.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError

MAGIC = b"ASCPROBE"
FORMAT_VERSION = 1
_ALLOWED_DTYPES = ("<f8", "<i8")


def save_container(
    path: str | Path, kind: str, config: dict, tensors: dict[str, np.ndarray]
) -> None:
    manifest = []
    payloads = []
    for name, arr in tensors.items():
        arr = np.asarray(arr)
        dtype = "<i8" if np.issubdtype(arr.dtype, np.integer) else "<f8"
        arr = np.ascontiguousarray(arr.astype(dtype, copy=False))
        manifest.append({"name": name, "dtype": dtype, "shape": list(arr.shape)})
        payloads.append(arr.tobytes())
    header = json.dumps(
        {
            "kind": kind,
            "version": FORMAT_VERSION,
            "config": config,
            "tensors": manifest,
        },
        ensure_ascii=False,
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        for chunk in payloads:
            f.write(chunk)


def load_container(
    path: str | Path, expected_kind: str | None = None
) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < len(MAGIC) + 8 or not data.startswith(MAGIC):
        raise CheckpointError(f"{path}: not a container file (bad magic)")
    (header_len,) = struct.unpack_from("<Q", data, len(MAGIC))
    start = len(MAGIC) + 8
    if start + header_len > len(data):
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(data[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: unreadable header: {e}") from e
    if header.get("version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: format version {header.get('version')!r}, "
            f"expected {FORMAT_VERSION}"
        )
    if expected_kind is not None and header.get("kind") != expected_kind:
        raise CheckpointError(
            f"{path}: kind {header.get('kind')!r}, expected {expected_kind!r}"
        )
    tensors: dict[str, np.ndarray] = {}
    offset = start + header_len
    for entry in header.get("tensors", []):
        name, dtype, shape = entry["name"], entry["dtype"], tuple(entry["shape"])
        if dtype not in _ALLOWED_DTYPES:
            raise CheckpointError(f"{path}: tensor {name!r} has dtype {dtype!r}")
        nbytes = int(np.prod(shape, dtype=np.int64)) * 8
        if offset + nbytes > len(data):
            raise CheckpointError(f"{path}: truncated payload for tensor {name!r}")
        arr = np.frombuffer(data[offset : offset + nbytes], dtype=dtype)
        tensors[name] = arr.reshape(shape).copy()
        offset += nbytes
    if offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - offset} trailing bytes")
    return header["config"], tensors


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()
