"""Materialize vision-language embeddings into the vlscore binary format."""

from .encoder import CheckpointEncoder, hash_token_ids
from .export import (
    KNOWN_CONSTANTS,
    ExportJob,
    ExportResult,
    constant_for_model,
    export_embeddings,
    export_synthetic,
)
from .format import ExportError, ManifestEntry, StoreWriter, read_manifest

__version__ = "0.1.0"

__all__ = [
    "CheckpointEncoder",
    "ExportError",
    "ExportJob",
    "ExportResult",
    "KNOWN_CONSTANTS",
    "constant_for_model",
    "StoreWriter",
    "ManifestEntry",
    "export_embeddings",
    "export_synthetic",
    "hash_token_ids",
    "read_manifest",
]
