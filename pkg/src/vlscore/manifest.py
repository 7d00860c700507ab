"""JSON-Lines study manifests: one record per line.

Required fields: study_id, image_id, reference_text. Optional: candidate_text,
perturbation (one of the six kind names), split (val/test/other).
"""
from __future__ import annotations

import json
import os
from collections.abc import Iterable, Sequence

from .errors import InputError
from .types import PerturbationKind, Split, StudyRecord

_REQUIRED = ("study_id", "image_id", "reference_text")
_OPTIONAL = ("candidate_text", "perturbation", "split")


def _record_from_obj(obj: object, where: str) -> StudyRecord:
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected a JSON object, got {type(obj).__name__}")
    for name in _REQUIRED:
        if name not in obj:
            raise InputError(f"{where}: missing required field {name!r}")
        if not isinstance(obj[name], str):
            raise InputError(f"{where}: field {name!r} must be a string")
    unknown = set(obj) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise InputError(f"{where}: unknown fields {sorted(unknown)}")

    candidate = obj.get("candidate_text")
    if candidate is not None and not isinstance(candidate, str):
        raise InputError(f"{where}: candidate_text must be a string or null")

    perturbation = None
    if obj.get("perturbation") is not None:
        try:
            perturbation = PerturbationKind(obj["perturbation"])
        except ValueError:
            names = [k.value for k in PerturbationKind]
            raise InputError(
                f"{where}: perturbation {obj['perturbation']!r} is not one of {names}"
            ) from None

    split = Split.OTHER
    if obj.get("split") is not None:
        try:
            split = Split(obj["split"])
        except ValueError:
            raise InputError(f"{where}: split must be one of val/test/other") from None

    try:
        return StudyRecord(
            study_id=obj["study_id"],
            image_id=obj["image_id"],
            reference_text=obj["reference_text"],
            candidate_text=candidate,
            perturbation=perturbation,
            split=split,
        )
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from None


def load_manifest(path: str | os.PathLike[str]) -> list[StudyRecord]:
    """Read a manifest, preserving file order. Parse errors carry line numbers."""
    records: list[StudyRecord] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}, line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{where}: malformed JSON ({exc.msg})") from None
            record = _record_from_obj(obj, where)
            if record.study_id in seen:
                raise InputError(
                    f"{where}: duplicate study_id {record.study_id!r}"
                    f" (first seen on line {seen[record.study_id]})"
                )
            seen[record.study_id] = lineno
            records.append(record)
    return records


def record_to_obj(record: StudyRecord) -> dict[str, str]:
    obj = {
        "study_id": record.study_id,
        "image_id": record.image_id,
        "reference_text": record.reference_text,
    }
    if record.candidate_text is not None:
        obj["candidate_text"] = record.candidate_text
    if record.perturbation is not None:
        obj["perturbation"] = record.perturbation.value
    obj["split"] = record.split.value
    return obj


def write_manifest(records: Iterable[StudyRecord], path: str | os.PathLike[str]) -> None:
    """Serialize records one per line; load(write(load(x))) == load(x) field for field."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record_to_obj(record), ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")


def require_candidates(records: Sequence[StudyRecord]) -> None:
    """Scoring pipelines reject records lacking a candidate report."""
    missing = [r.study_id for r in records if r.candidate_text is None or not r.candidate_text.strip()]
    if missing:
        raise InputError(
            f"{len(missing)} record(s) lack candidate_text (first: {missing[:5]}); "
            "scoring requires a candidate report per study"
        )
