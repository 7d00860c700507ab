"""Export jobs: checkpoint-backed and synthetic."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .encoder import CheckpointEncoder, set_deterministic
from .format import ExportError, ManifestEntry, StoreWriter, read_manifest

log = logging.getLogger("vlscore_export")

# one study fans out to image + reference (+ candidate when present)
CAND_SUFFIX = "#cand"
REF_SUFFIX = "#ref"

# calibrated normalizers for the public checkpoints this adapter typically
# wraps; anything else defaults to the LIMITR value until recalibrated
KNOWN_CONSTANTS = {
    "limitr": 890.0,
    "convirt": 124.0,
    "biovil": 1.0,
    "medclip": 0.06,
    "gloria": 1155.0,
}
DEFAULT_CONSTANT = 890.0


def constant_for_model(model_tag: str) -> float:
    """The calibrated C for a known model tag, else the default."""
    head = model_tag.lower().split("|")[0].strip()
    return KNOWN_CONSTANTS.get(head, DEFAULT_CONSTANT)

_BATCH = 16
_SKIP_FRACTION_LIMIT = 0.01


@dataclass
class ExportJob:
    manifest_path: Path
    output_path: Path
    image_root: Path = Path(".")
    checkpoint_ref: str = ""
    model_tag: str = "unnamed-model"
    constant_c: float = 890.0
    deterministic: bool = False

    def __post_init__(self) -> None:
        self.manifest_path = Path(self.manifest_path)
        self.output_path = Path(self.output_path)
        self.image_root = Path(self.image_root)
        if not self.model_tag:
            raise ExportError("model_tag must be nonempty")
        if not self.constant_c > 0:
            raise ExportError(f"constant_C must be positive, got {self.constant_c!r}")


@dataclass
class ExportResult:
    n_studies: int
    n_records: int
    skipped: list[str]


def _study_ids(entry: ManifestEntry) -> list[str]:
    ids = [entry.image_id, f"{entry.study_id}{REF_SUFFIX}"]
    if entry.candidate_text is not None:
        ids.insert(1, f"{entry.study_id}{CAND_SUFFIX}")
    return ids


def export_embeddings(job: ExportJob) -> ExportResult:
    """Run the checkpoint over every study and write the embedding file.

    Studies with unreadable images are skipped and logged; more than 1%
    skipped makes the whole export fail after the file is written.
    """
    if not job.checkpoint_ref:
        raise ExportError("export needs a checkpoint_ref")
    if job.deterministic:
        set_deterministic()
    encoder = CheckpointEncoder.load(job.checkpoint_ref)
    entries = read_manifest(job.manifest_path)

    skipped: list[str] = []
    usable: list[tuple[ManifestEntry, torch.Tensor]] = []
    for entry in entries:
        try:
            usable.append((entry, encoder.load_image(job.image_root, entry.image_id)))
        except ExportError as exc:
            log.warning("skipping study %s: %s", entry.study_id, exc)
            skipped.append(entry.study_id)

    tag = f"{job.model_tag}|{encoder.preprocessing_tag}"
    count = 0
    with StoreWriter(job.output_path, encoder.embed_dim, tag, job.constant_c) as writer:
        for lo in range(0, len(usable), _BATCH):
            batch = usable[lo : lo + _BATCH]
            images = encoder.encode_images([pixels for _, pixels in batch])
            texts: list[str] = []
            keys: list[str] = []
            for entry, _ in batch:
                texts.append(entry.reference_text)
                keys.append(f"{entry.study_id}{REF_SUFFIX}")
                if entry.candidate_text is not None:
                    texts.append(entry.candidate_text)
                    keys.append(f"{entry.study_id}{CAND_SUFFIX}")
            encoded_texts = encoder.encode_texts(texts)
            for (entry, _), vector in zip(batch, images):
                writer.add(entry.image_id, vector)
                count += 1
            for key, vector in zip(keys, encoded_texts):
                writer.add(key, vector)
                count += 1

    if entries and len(skipped) / len(entries) > _SKIP_FRACTION_LIMIT:
        raise ExportError(
            f"skipped {len(skipped)}/{len(entries)} studies (> 1%): {skipped[:10]}"
        )
    return ExportResult(n_studies=len(usable), n_records=count, skipped=skipped)


def export_synthetic(job: ExportJob, seed: int, dim: int = 512) -> ExportResult:
    """Random unit-length vectors under the same id scheme, fixed by seed."""
    entries = read_manifest(job.manifest_path)
    rng = np.random.default_rng(seed)
    count = 0
    with StoreWriter(job.output_path, dim, f"{job.model_tag}|synthetic", job.constant_c) as writer:
        for entry in entries:
            for key in _study_ids(entry):
                vector = rng.standard_normal(dim)
                writer.add(key, vector / np.linalg.norm(vector))
                count += 1
    return ExportResult(n_studies=len(entries), n_records=count, skipped=[])
