"""Core domain types: study records, score rows, and embedding stores.

Embedding vectors are plain 1-D float64 numpy arrays; the store enforces the
shared-dimension and finiteness invariants once, at construction time.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


class Split(str, enum.Enum):
    VAL = "val"
    TEST = "test"
    OTHER = "other"


# One embedding store holds all three roles of a study under these ids.
CAND_SUFFIX = "#cand"
REF_SUFFIX = "#ref"


def triplet_ids(study_id: str, image_id: str) -> tuple[str, str, str]:
    """The (image, candidate, reference) embedding ids for one study."""
    return image_id, f"{study_id}{CAND_SUFFIX}", f"{study_id}{REF_SUFFIX}"


class PerturbationKind(str, enum.Enum):
    """The six report modification types."""

    REMOVE_PATHOLOGY_SENTENCE = "remove_pathology_sentence"
    REMOVE_INSIGNIFICANT_SENTENCE = "remove_insignificant_sentence"
    SWAP_LOCATION = "swap_location"
    SWAP_SEVERITY = "swap_severity"
    MASK_NONINFORMATIVE = "mask_noninformative"
    NORMAL_REPORT_SUBSTITUTION = "normal_report_substitution"


@dataclass(frozen=True)
class StudyRecord:
    """One study: its image, reference report, and optional candidate report."""

    study_id: str
    image_id: str
    reference_text: str
    candidate_text: str | None = None
    perturbation: PerturbationKind | None = None
    split: Split = Split.OTHER

    def __post_init__(self) -> None:
        if not self.study_id:
            raise InputError("study_id must be nonempty")
        if not self.image_id:
            raise InputError(f"record {self.study_id!r}: image_id must be nonempty")
        if not self.reference_text.strip():
            raise InputError(f"record {self.study_id!r}: reference_text must be nonempty")
        try:
            if self.perturbation is not None:
                object.__setattr__(self, "perturbation", PerturbationKind(self.perturbation))
            object.__setattr__(self, "split", Split(self.split))
        except ValueError as exc:
            raise InputError(f"record {self.study_id!r}: {exc}") from None


@dataclass(frozen=True)
class ScoreRow:
    """One (study, metric, value) result."""

    study_id: str
    metric: str
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise InputError(
                f"score for ({self.study_id!r}, {self.metric!r}) is not finite: {self.value!r}"
            )


@dataclass(frozen=True)
class EmbeddingStore:
    """Immutable id -> vector map sharing one dimension and one normalizer C.

    Safe for concurrent reads: every vector is marked read-only.
    """

    dim: int
    entries: dict[str, np.ndarray] = field(repr=False)
    model_tag: str = ""
    constant_c: float = 890.0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InputError(f"embedding dim must be >= 1, got {self.dim}")
        if not (self.constant_c > 0):
            raise InputError(f"constant C must be positive, got {self.constant_c!r}")
        for key, vec in self.entries.items():
            if not key:
                raise InputError("embedding id must be nonempty")
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.dim,):
                raise InputError(
                    f"embedding {key!r} has shape {arr.shape}, expected ({self.dim},)"
                )
            if not np.isfinite(arr).all():
                raise InputError(f"embedding {key!r} contains non-finite coordinates")
            arr.setflags(write=False)
            self.entries[key] = arr

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def ids(self) -> list[str]:
        return list(self.entries)

    def vector(self, key: str) -> np.ndarray:
        """Look up one embedding; a missing id is always a reported error."""
        try:
            return self.entries[key]
        except KeyError:
            raise InputError(f"embedding id {key!r} not found in store {self.model_tag!r}") from None
