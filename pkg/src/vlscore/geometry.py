"""Similarity measures over (image, candidate, reference) embedding triplets.

All operations are pure functions over immutable arrays and are safe to call
from any number of threads.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, InternalConsistencyError
from .types import EmbeddingStore

# Rounding can push the Gram radicand slightly negative for (near-)collinear
# triplets; anything more negative than this fraction of its natural scale is
# a logic bug, not noise.
_RADICAND_SLACK = 1e-6

# Triangles flatter than this fraction of (longest side)^2 take the
# degenerate enclosing-sphere branch.
_COLLINEAR_AREA_FRACTION = 1e-12


@dataclass(frozen=True)
class TriangleScoreConfig:
    """Normalizer C and the score floor (fixed at 0)."""

    constant_c: float = 890.0
    clamp_floor: float = 0.0

    def __post_init__(self) -> None:
        if not (self.constant_c > 0):
            raise InputError(f"constant C must be positive, got {self.constant_c!r}")


def _as_triplet(*vecs: Sequence[float]) -> list[np.ndarray]:
    arrays = [np.asarray(v, dtype=np.float64) for v in vecs]
    dims = {a.shape for a in arrays}
    if len(dims) != 1 or arrays[0].ndim != 1:
        raise InputError(f"vectors must be 1-D and share a dimension, got shapes {sorted(dims)}")
    return arrays


def triangle_area(i_e: Sequence[float], g_e: Sequence[float], r_e: Sequence[float]) -> float:
    """Euclidean area of the triangle spanned by the three embedding points.

    Computed as half the square root of the Gram determinant of the two edge
    vectors anchored at the image point.
    """
    i, g, r = _as_triplet(i_e, g_e, r_e)
    u = g - i
    v = r - i
    uu = float(u @ u)
    vv = float(v @ v)
    uv = float(u @ v)
    radicand = uu * vv - uv * uv
    if radicand < 0.0:
        if radicand < -_RADICAND_SLACK * uu * vv:
            raise InternalConsistencyError(
                f"Gram radicand {radicand!r} is far below zero (scale {uu * vv!r})"
            )
        radicand = 0.0
    return 0.5 * math.sqrt(radicand)


def vlscore_from_area(area: float, cfg: TriangleScoreConfig = TriangleScoreConfig()) -> float:
    """Map a triangle area to the [0, 1] quality score: max{1 - area/C, floor}."""
    if area < 0:
        raise InputError(f"triangle area must be nonnegative, got {area!r}")
    return max(1.0 - area / cfg.constant_c, cfg.clamp_floor)


def vlscore(
    i_e: Sequence[float],
    g_e: Sequence[float],
    r_e: Sequence[float],
    cfg: TriangleScoreConfig = TriangleScoreConfig(),
) -> float:
    """Quality of a candidate report against reference and image embeddings."""
    return vlscore_from_area(triangle_area(i_e, g_e, r_e), cfg)


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    x, y = _as_triplet(a, b)
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        raise InputError("cosine similarity is undefined for a zero vector")
    if np.array_equal(x, y):
        return 1.0
    if np.array_equal(x, -y):
        return -1.0
    value = float(x @ y) / (nx * ny)
    return min(1.0, max(-1.0, value))


def image_centered_cosine(
    i_e: Sequence[float], g_e: Sequence[float], r_e: Sequence[float]
) -> float:
    """Cosine of the angle at the image vertex between the two report offsets."""
    i, g, r = _as_triplet(i_e, g_e, r_e)
    gi = g - i
    ri = r - i
    if not np.any(gi) or not np.any(ri):
        raise InputError(
            "image-centered cosine is undefined when a report embedding "
            "coincides with the image embedding"
        )
    return cosine_similarity(ri, gi)


def min_enclosing_sphere(
    i_e: Sequence[float], g_e: Sequence[float], r_e: Sequence[float]
) -> tuple[np.ndarray, float]:
    """Exact smallest sphere containing the three points: (center, radius).

    Right/obtuse/degenerate triangles are covered by the diameter of the
    farthest pair; acute triangles by the circumsphere. No iteration.
    """
    points = _as_triplet(i_e, g_e, r_e)
    pairs = ((0, 1), (0, 2), (1, 2))
    sq = [float(np.sum((points[p] - points[q]) ** 2)) for p, q in pairs]
    widest = max(range(3), key=lambda k: sq[k])
    longest_sq = sq[widest]
    area = triangle_area(*points)

    if area < _COLLINEAR_AREA_FRACTION * longest_sq or longest_sq >= sum(sq) - longest_sq:
        p, q = pairs[widest]
        center = 0.5 * (points[p] + points[q])
        return center, 0.5 * math.sqrt(longest_sq)

    # acute: circumcenter in barycentric form, radius abc / (4 * area)
    a2 = sq[2]  # opposite vertex 0
    b2 = sq[1]  # opposite vertex 1
    c2 = sq[0]  # opposite vertex 2
    alpha = a2 * (b2 + c2 - a2)
    beta = b2 * (c2 + a2 - b2)
    gamma = c2 * (a2 + b2 - c2)
    center = (alpha * points[0] + beta * points[1] + gamma * points[2]) / (alpha + beta + gamma)
    radius = math.sqrt(a2 * b2 * c2) / (4.0 * area)
    return center, radius


def min_enclosing_sphere_radius(
    i_e: Sequence[float], g_e: Sequence[float], r_e: Sequence[float]
) -> float:
    return min_enclosing_sphere(i_e, g_e, r_e)[1]


def calibrate_constant(
    store: EmbeddingStore, triplets: Sequence[tuple[str, str, str]]
) -> float:
    """Largest triangle area over (image_id, candidate_id, reference_id) triplets.

    This is the calibration rule for C: the raw maximum, no trimming.
    """
    if not triplets:
        raise InputError("calibration needs at least one triplet")
    best = 0.0
    for image_id, candidate_id, reference_id in triplets:
        area = triangle_area(
            store.vector(image_id), store.vector(candidate_id), store.vector(reference_id)
        )
        best = max(best, area)
    if best <= 0.0:
        warnings.warn(
            "largest observed triangle area is 0; C must be positive, pick one manually",
            RuntimeWarning,
            stacklevel=2,
        )
    return best
