"""Bit-exact binary embedding files.

Layout (all integers little-endian):
    magic "VLSE" | version u32 (=1) | dim u32 | count u64 |
    model_tag_len u16 | model_tag utf-8 | constant_C f64 |
    count records of [id_len u16 | id utf-8 | dim * f32]

Coordinates are stored as 32-bit floats and widened to 64-bit on load, so a
write/load round trip preserves every coordinate bit for bit.
"""
from __future__ import annotations

import os
import struct
from typing import BinaryIO

import numpy as np

from .errors import InputError
from .types import EmbeddingStore

MAGIC = b"VLSE"
VERSION = 1

_HEAD = struct.Struct("<4sIIQ")
_U16 = struct.Struct("<H")
_F64 = struct.Struct("<d")


def _read_exact(fh: BinaryIO, n: int, path: object, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise InputError(f"{path}: truncated file while reading {what}")
    return data


def load_embeddings(path: str | os.PathLike[str]) -> EmbeddingStore:
    """Parse an embedding file, validating magic, version, counts and finiteness."""
    with open(path, "rb") as fh:
        magic, version, dim, count = _HEAD.unpack(_read_exact(fh, _HEAD.size, path, "header"))
        if magic != MAGIC:
            raise InputError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise InputError(f"{path}: unsupported version {version}, expected {VERSION}")
        if dim < 1:
            raise InputError(f"{path}: header dim must be >= 1, got {dim}")
        (tag_len,) = _U16.unpack(_read_exact(fh, 2, path, "model_tag length"))
        model_tag = _read_exact(fh, tag_len, path, "model_tag").decode("utf-8")
        (constant_c,) = _F64.unpack(_read_exact(fh, 8, path, "constant C"))

        entries: dict[str, np.ndarray] = {}
        rec_bytes = 4 * dim
        for index in range(count):
            (id_len,) = _U16.unpack(_read_exact(fh, 2, path, f"record {index} id length"))
            key = _read_exact(fh, id_len, path, f"record {index} id").decode("utf-8")
            if key in entries:
                raise InputError(f"{path}: duplicate id {key!r} at record {index}")
            raw = _read_exact(fh, rec_bytes, path, f"record {index} ({key!r}) coordinates")
            vec = np.frombuffer(raw, dtype="<f4").astype(np.float64)
            if not np.isfinite(vec).all():
                raise InputError(f"{path}: record {key!r} contains non-finite coordinates")
            entries[key] = vec
        if fh.read(1):
            raise InputError(f"{path}: trailing data after {count} records")

    return EmbeddingStore(dim=dim, entries=entries, model_tag=model_tag, constant_c=constant_c)


def write_embeddings(store: EmbeddingStore, path: str | os.PathLike[str]) -> None:
    """Serialize a store; coordinates are narrowed to f32 (overflow is an error)."""
    tag = store.model_tag.encode("utf-8")
    if len(tag) > 0xFFFF:
        raise InputError(f"model_tag is {len(tag)} bytes; limit is 65535")
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, store.dim, len(store.entries)))
        fh.write(_U16.pack(len(tag)))
        fh.write(tag)
        fh.write(_F64.pack(store.constant_c))
        for key, vec in store.entries.items():
            raw_id = key.encode("utf-8")
            if len(raw_id) > 0xFFFF:
                raise InputError(f"id {key!r} is {len(raw_id)} bytes; limit is 65535")
            narrowed = vec.astype("<f4")
            if not np.isfinite(narrowed).all():
                raise InputError(f"id {key!r}: coordinates overflow 32-bit float storage")
            fh.write(_U16.pack(len(raw_id)))
            fh.write(raw_id)
            fh.write(narrowed.tobytes())
