"""Agreement and robustness analytics.

Kendall's tau is the tie-corrected tau-b, computed by an O(n log n)
merge-count; the final division uses the same expression as the quadratic
pair-enumeration definition, so the two agree bit for bit.
"""
from __future__ import annotations

import csv
import math
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import InputError
from .types import PerturbationKind, ScoreRow


@dataclass(frozen=True)
class RatingPair:
    study_id: str
    metric_value: float
    human_rating: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.metric_value) and math.isfinite(self.human_rating)):
            raise InputError(f"rating pair for {self.study_id!r} has non-finite values")


def _tie_term(sorted_values: Sequence) -> int:
    total = 0
    run = 1
    for prev, cur in zip(sorted_values, sorted_values[1:]):
        if cur == prev:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    total += run * (run - 1) // 2
    return total


def _count_inversions(values: list[float]) -> int:
    """Strict inversions (i < j with values[i] > values[j]) via merge sort."""
    work = list(values)
    buffer = [0.0] * len(work)
    count = 0
    width = 1
    n = len(work)
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if work[j] < work[i]:
                    buffer[k] = work[j]
                    j += 1
                    count += mid - i
                else:
                    buffer[k] = work[i]
                    i += 1
                k += 1
            while i < mid:
                buffer[k] = work[i]
                i += 1
                k += 1
            while j < hi:
                buffer[k] = work[j]
                j += 1
                k += 1
        work, buffer = buffer, work
        width *= 2
    return count


def tau_b_from_values(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Tie-corrected Kendall tau-b between two equal-length value sequences."""
    n = len(xs)
    if n != len(ys):
        raise InputError(f"tau needs equal-length sequences, got {n} and {len(ys)}")
    if n < 2:
        raise InputError("tau needs at least 2 pairs")
    order = sorted(range(n), key=lambda k: (xs[k], ys[k]))
    x = [xs[k] for k in order]
    y = [ys[k] for k in order]
    n0 = n * (n - 1) // 2
    n1 = _tie_term(x)
    n2 = _tie_term(sorted(y))
    if n0 == n1:
        raise InputError("all metric values are tied; tau is undefined")
    if n0 == n2:
        raise InputError("all human ratings are tied; tau is undefined")
    joint = _tie_term(list(zip(x, y)))
    discordant = _count_inversions(y)
    concordant_minus_discordant = n0 - n1 - n2 + joint - 2 * discordant
    return concordant_minus_discordant / math.sqrt((n0 - n1) * (n0 - n2))


def kendall_tau_b(pairs: Sequence[RatingPair]) -> float:
    """Tau-b between metric values and human ratings."""
    seen: set[str] = set()
    for pair in pairs:
        if pair.study_id in seen:
            raise InputError(f"duplicate study_id {pair.study_id!r} in rating pairs")
        seen.add(pair.study_id)
    return tau_b_from_values(
        [p.metric_value for p in pairs], [p.human_rating for p in pairs]
    )


@dataclass(frozen=True)
class Contrast:
    """A signed comparison: mean(minor kind) - mean(major kind)."""

    name: str
    minor: PerturbationKind
    major: PerturbationKind


# Sentence-removal and changed-word comparisons, minor minus major.
DEFAULT_CONTRASTS = (
    Contrast(
        "sentence_removal",
        PerturbationKind.REMOVE_INSIGNIFICANT_SENTENCE,
        PerturbationKind.REMOVE_PATHOLOGY_SENTENCE,
    ),
    Contrast("location", PerturbationKind.MASK_NONINFORMATIVE, PerturbationKind.SWAP_LOCATION),
    Contrast("severity", PerturbationKind.MASK_NONINFORMATIVE, PerturbationKind.SWAP_SEVERITY),
)


@dataclass(frozen=True)
class DeltaTable:
    means: dict[tuple[str, PerturbationKind], float]
    deltas: dict[tuple[str, str], float]


def delta_table(
    rows: Iterable[tuple[ScoreRow, PerturbationKind]],
    contrasts: Sequence[Contrast] = DEFAULT_CONTRASTS,
) -> DeltaTable:
    """Per-(metric, kind) means and signed deltas for the declared contrasts.

    Means use exact summation, so they are invariant under input row order.
    """
    groups: dict[tuple[str, PerturbationKind], list[float]] = defaultdict(list)
    for row, kind in rows:
        groups[(row.metric, kind)].append(row.value)
    means = {key: math.fsum(values) / len(values) for key, values in sorted(groups.items())}

    metrics = sorted({metric for metric, _ in means})
    kinds_present = {kind for _, kind in means}
    deltas: dict[tuple[str, str], float] = {}
    for contrast in contrasts:
        for kind in (contrast.minor, contrast.major):
            if kind not in kinds_present:
                raise InputError(
                    f"contrast {contrast.name!r} references kind {kind.value!r}, "
                    "absent from the data"
                )
        for metric in metrics:
            minor = means.get((metric, contrast.minor))
            major = means.get((metric, contrast.major))
            if minor is not None and major is not None:
                deltas[(metric, contrast.name)] = minor - major
    return DeltaTable(means=means, deltas=deltas)


@dataclass(frozen=True)
class ScatterData:
    points: list[tuple[str, float, float]]
    mean_a: float
    mean_b: float


def _by_study(rows: Sequence[ScoreRow], side: str) -> dict[str, float]:
    values: dict[str, float] = {}
    for row in rows:
        if row.study_id in values:
            raise InputError(f"duplicate study_id {row.study_id!r} in {side} scores")
        values[row.study_id] = row.value
    return values


def scatter_export(scores_a: Sequence[ScoreRow], scores_b: Sequence[ScoreRow]) -> ScatterData:
    """Join two per-study score sets into plot-ready points plus per-side means."""
    a = _by_study(scores_a, "first")
    b = _by_study(scores_b, "second")
    only_a = sorted(set(a) - set(b))
    only_b = sorted(set(b) - set(a))
    if only_a or only_b:
        raise InputError(
            f"study sets differ: {len(only_a)} only in first {only_a[:5]}, "
            f"{len(only_b)} only in second {only_b[:5]}"
        )
    if not a:
        raise InputError("no studies to join")
    points = [(sid, a[sid], b[sid]) for sid in sorted(a)]
    return ScatterData(
        points=points,
        mean_a=math.fsum(v for _, v, _ in points) / len(points),
        mean_b=math.fsum(v for _, _, v in points) / len(points),
    )


def import_external_scores(path: str | os.PathLike[str]) -> list[ScoreRow]:
    """Read a study_id,metric,value CSV; unknown metric names pass through."""
    rows: list[ScoreRow] = []
    seen: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [cell.strip() for cell in header] != ["study_id", "metric", "value"]:
            raise InputError(f"{path}: expected header study_id,metric,value, got {header}")
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            where = f"{path}, line {lineno}"
            if len(cells) != 3:
                raise InputError(f"{where}: expected 3 fields, got {len(cells)}")
            study_id, metric, raw = cells
            if not study_id or not metric:
                raise InputError(f"{where}: empty study_id or metric")
            try:
                value = float(raw)
            except ValueError:
                raise InputError(f"{where}: value {raw!r} is not a number") from None
            if not math.isfinite(value):
                raise InputError(f"{where}: value {raw!r} is not finite")
            key = (study_id, metric)
            if key in seen:
                raise InputError(
                    f"{where}: duplicate (study_id, metric) {key!r}, first on line {seen[key]}"
                )
            seen[key] = lineno
            rows.append(ScoreRow(study_id=study_id, metric=metric, value=value))
    return rows


def load_ratings(path: str | os.PathLike[str], aggregation: str = "mean") -> dict[str, float]:
    """Read a study_id,rating CSV; repeated studies (one row per rater) aggregate."""
    if aggregation not in ("mean", "sum"):
        raise InputError(f"aggregation must be mean or sum, got {aggregation!r}")
    groups: dict[str, list[float]] = defaultdict(list)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [cell.strip() for cell in header] != ["study_id", "rating"]:
            raise InputError(f"{path}: expected header study_id,rating, got {header}")
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            where = f"{path}, line {lineno}"
            if len(cells) != 2:
                raise InputError(f"{where}: expected 2 fields, got {len(cells)}")
            study_id, raw = cells
            if not study_id:
                raise InputError(f"{where}: empty study_id")
            try:
                value = float(raw)
            except ValueError:
                raise InputError(f"{where}: rating {raw!r} is not a number") from None
            if not math.isfinite(value):
                raise InputError(f"{where}: rating {raw!r} is not finite")
            groups[study_id].append(value)
    if aggregation == "mean":
        return {sid: math.fsum(vals) / len(vals) for sid, vals in groups.items()}
    return {sid: math.fsum(vals) for sid, vals in groups.items()}


def to_rating_pairs(rows: Sequence[ScoreRow], ratings: Mapping[str, float]) -> list[RatingPair]:
    """Join metric rows with ratings; a study-set mismatch reports both orphan sides."""
    scored = {row.study_id for row in rows}
    rated = set(ratings)
    only_scores = sorted(scored - rated)
    only_ratings = sorted(rated - scored)
    if only_scores or only_ratings:
        raise InputError(
            f"scores and ratings cover different studies: "
            f"{len(only_scores)} without ratings {only_scores[:5]}, "
            f"{len(only_ratings)} without scores {only_ratings[:5]}"
        )
    return [
        RatingPair(row.study_id, row.value, ratings[row.study_id])
        for row in sorted(rows, key=lambda r: r.study_id)
    ]
