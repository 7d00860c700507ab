"""Image-anchored evaluation of generated radiology reports.

The quality score of a candidate report is one minus the (normalized, clamped)
area of the triangle formed by the image, candidate, and reference embeddings
in a shared vision-language space. The package also ships the ablation
similarity measures, native BLEU/ROUGE-L/METEOR-lite baselines, a six-kind
report perturbation engine, and Kendall tau-b agreement analytics.
"""

from .errors import InputError, InternalConsistencyError, VLScoreError
from .geometry import (
    TriangleScoreConfig,
    calibrate_constant,
    cosine_similarity,
    image_centered_cosine,
    min_enclosing_sphere,
    min_enclosing_sphere_radius,
    triangle_area,
    vlscore,
    vlscore_from_area,
)
from .lexicon import Lexicon, default_lexicon, load_lexicon
from .manifest import load_manifest, write_manifest
from .embedfile import load_embeddings, write_embeddings
from .perturb import (
    PerturbationOutcome,
    PerturbationSuite,
    build_normal_report,
    generate_suite,
    mask_noninformative_word,
    remove_insignificant_sentence,
    remove_pathology_sentence,
    split_sentences,
    swap_location_word,
    swap_severity_word,
)
from .stats import (
    DEFAULT_CONTRASTS,
    Contrast,
    DeltaTable,
    RatingPair,
    ScatterData,
    delta_table,
    import_external_scores,
    kendall_tau_b,
    load_ratings,
    scatter_export,
    tau_b_from_values,
)
from .synth import PlantedTriplet, SynthSpec, synth_embeddings
from .textmetrics import bleu, meteor_lite, rouge_l, tokenize
from .types import (
    EmbeddingStore,
    PerturbationKind,
    ScoreRow,
    Split,
    StudyRecord,
    triplet_ids,
)

__version__ = "0.1.0"

__all__ = [
    "Contrast",
    "DeltaTable",
    "DEFAULT_CONTRASTS",
    "EmbeddingStore",
    "InputError",
    "InternalConsistencyError",
    "Lexicon",
    "PerturbationKind",
    "PerturbationOutcome",
    "PerturbationSuite",
    "PlantedTriplet",
    "RatingPair",
    "ScatterData",
    "ScoreRow",
    "Split",
    "StudyRecord",
    "SynthSpec",
    "TriangleScoreConfig",
    "VLScoreError",
    "bleu",
    "build_normal_report",
    "calibrate_constant",
    "cosine_similarity",
    "default_lexicon",
    "delta_table",
    "generate_suite",
    "image_centered_cosine",
    "import_external_scores",
    "kendall_tau_b",
    "load_embeddings",
    "load_lexicon",
    "load_manifest",
    "load_ratings",
    "mask_noninformative_word",
    "meteor_lite",
    "min_enclosing_sphere",
    "min_enclosing_sphere_radius",
    "remove_insignificant_sentence",
    "remove_pathology_sentence",
    "rouge_l",
    "scatter_export",
    "split_sentences",
    "swap_location_word",
    "swap_severity_word",
    "synth_embeddings",
    "tau_b_from_values",
    "tokenize",
    "triangle_area",
    "triplet_ids",
    "vlscore",
    "vlscore_from_area",
    "write_embeddings",
    "write_manifest",
]
