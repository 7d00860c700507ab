"""The toolkit's external file interfaces, implemented against their wire specs.

Embedding file (all integers little-endian):
    magic "VLSE" | version u32 (=1) | dim u32 | count u64 |
    model_tag_len u16 | model_tag utf-8 | constant_C f64 |
    count records of [id_len u16 | id utf-8 | dim * f32]

Manifests are JSON Lines with study_id, image_id, reference_text (required)
and candidate_text (optional); other fields pass through untouched.
"""
from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"VLSE"
VERSION = 1

_HEAD = struct.Struct("<4sIIQ")
_COUNT_OFFSET = 12  # magic + version + dim


class ExportError(Exception):
    """Anything that should abort an export with a nonzero exit."""


@dataclass(frozen=True)
class ManifestEntry:
    study_id: str
    image_id: str
    reference_text: str
    candidate_text: str | None = None


def read_manifest(path: str | os.PathLike[str]) -> list[ManifestEntry]:
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExportError(f"{path}, line {lineno}: malformed JSON ({exc.msg})") from None
            for field in ("study_id", "image_id", "reference_text"):
                if not isinstance(obj.get(field), str) or not obj[field]:
                    raise ExportError(f"{path}, line {lineno}: missing or empty {field!r}")
            if obj["study_id"] in seen:
                raise ExportError(f"{path}, line {lineno}: duplicate study_id {obj['study_id']!r}")
            seen.add(obj["study_id"])
            candidate = obj.get("candidate_text")
            if candidate is not None and not isinstance(candidate, str):
                raise ExportError(f"{path}, line {lineno}: candidate_text must be a string")
            entries.append(
                ManifestEntry(obj["study_id"], obj["image_id"], obj["reference_text"], candidate)
            )
    return entries


class StoreWriter:
    """Single-threaded append writer; the record count is patched into the
    header on close, so batches can stream through without buffering."""

    def __init__(self, path: str | os.PathLike[str], dim: int, model_tag: str, constant_c: float):
        if dim < 1:
            raise ExportError(f"dim must be >= 1, got {dim}")
        if not constant_c > 0:
            raise ExportError(f"constant_C must be positive, got {constant_c!r}")
        tag = model_tag.encode("utf-8")
        if len(tag) > 0xFFFF:
            raise ExportError("model_tag exceeds 65535 bytes")
        self._dim = dim
        self._count = 0
        self._seen: set[str] = set()
        self._fh = open(path, "wb")
        self._fh.write(_HEAD.pack(MAGIC, VERSION, dim, 0))
        self._fh.write(struct.pack("<H", len(tag)))
        self._fh.write(tag)
        self._fh.write(struct.pack("<d", constant_c))

    def add(self, key: str, vector: np.ndarray) -> None:
        if key in self._seen:
            raise ExportError(f"duplicate embedding id {key!r}")
        raw_id = key.encode("utf-8")
        if len(raw_id) > 0xFFFF:
            raise ExportError(f"id {key!r} exceeds 65535 bytes")
        narrowed = np.asarray(vector, dtype="<f4").reshape(-1)
        if narrowed.shape != (self._dim,):
            raise ExportError(f"id {key!r}: expected {self._dim} coordinates, got {narrowed.shape}")
        if not np.isfinite(narrowed).all():
            raise ExportError(f"id {key!r}: non-finite coordinates")
        self._fh.write(struct.pack("<H", len(raw_id)))
        self._fh.write(raw_id)
        self._fh.write(narrowed.tobytes())
        self._seen.add(key)
        self._count += 1

    def close(self) -> None:
        self._fh.seek(_COUNT_OFFSET)
        self._fh.write(struct.pack("<Q", self._count))
        self._fh.close()

    def __enter__(self) -> "StoreWriter":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
