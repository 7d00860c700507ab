"""Batch pipelines: score, perturb, correlate, ablate, calibrate, scatter.

Every command writes byte-identical primary outputs for a fixed config and
fixed inputs, independent of worker count: scoring fans out over records but
rows are sorted by (study_id, metric) before anything is written.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import figures
from .embedfile import load_embeddings, write_embeddings
from .errors import InputError
from .geometry import (
    TriangleScoreConfig,
    calibrate_constant,
    cosine_similarity,
    image_centered_cosine,
    min_enclosing_sphere_radius,
    triangle_area,
    vlscore_from_area,
)
from .lexicon import resolve_lexicon
from .manifest import load_manifest, require_candidates, write_manifest
from .perturb import PerturbationSuite, generate_suite
from .stats import (
    DEFAULT_CONTRASTS,
    ScatterData,
    delta_table,
    import_external_scores,
    kendall_tau_b,
    load_ratings,
    scatter_export,
    to_rating_pairs,
)
from .textmetrics import bleu, meteor_lite, rouge_l, tokenize
from .types import EmbeddingStore, ScoreRow, StudyRecord, triplet_ids

GEOMETRY_METRICS = ("vlscore", "triangle_area", "cosine", "image_centered_cosine", "min_sphere_radius")
TEXT_METRICS = ("bleu1", "bleu2", "bleu3", "bleu4", "rouge_l", "meteor_lite")
REGISTERED_METRICS = GEOMETRY_METRICS + TEXT_METRICS

# Larger means farther apart for these; they are negated before rank
# correlation so every tau reads "higher is better".
DISSIMILARITY_METRICS = frozenset({"triangle_area", "min_sphere_radius"})

ABLATION_METRICS = ("cosine", "image_centered_cosine", "min_sphere_radius", "vlscore")


@dataclass
class RunConfig:
    manifest_path: Path
    embeddings_path: Path | None = None
    lexicon_path: Path | None = None
    output_dir: Path = Path("vlscore-out")
    metrics: list[str] = field(default_factory=lambda: ["vlscore"])
    constant_c: float | None = None
    seed: int = 0
    aggregation: str = "mean"
    workers: int = 4
    render_figures: bool = True

    def __post_init__(self) -> None:
        self.manifest_path = Path(self.manifest_path)
        if self.embeddings_path is not None:
            self.embeddings_path = Path(self.embeddings_path)
        if self.lexicon_path is not None:
            self.lexicon_path = Path(self.lexicon_path)
        self.output_dir = Path(self.output_dir)
        if self.constant_c is not None and not (self.constant_c > 0):
            raise InputError(f"--constant must be positive, got {self.constant_c!r}")
        if self.workers < 1:
            raise InputError(f"workers must be >= 1, got {self.workers}")


def _ensure_output(cfg: RunConfig) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg.output_dir


def _write_json(obj: object, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def format_table(headers: list[str], rows: list[list[str]]) -> str:
    """ASCII-aligned text table."""
    widths = [
        max(len(header), *(len(row[col]) for row in rows)) if rows else len(header)
        for col, header in enumerate(headers)
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# scoring


def _validate_metrics(metrics: list[str], store: EmbeddingStore | None) -> None:
    if not metrics:
        raise InputError("score runs need at least one metric")
    unknown = [m for m in metrics if m not in REGISTERED_METRICS]
    if unknown:
        raise InputError(f"unknown metric name(s) {unknown}; registered: {list(REGISTERED_METRICS)}")
    if len(set(metrics)) != len(metrics):
        raise InputError(f"metric names repeat in {metrics}")
    if store is None and any(m in GEOMETRY_METRICS for m in metrics):
        raise InputError("geometry metrics need --embeddings")


def _score_one(
    record: StudyRecord,
    store: EmbeddingStore | None,
    tcfg: TriangleScoreConfig,
    metrics: list[str],
) -> tuple[list[ScoreRow], list[dict], int]:
    rows: list[ScoreRow] = []
    skips: list[dict] = []
    clamps = 0

    if any(m in GEOMETRY_METRICS for m in metrics):
        image_id, cand_id, ref_id = triplet_ids(record.study_id, record.image_id)
        i_e = store.vector(image_id)
        g_e = store.vector(cand_id)
        r_e = store.vector(ref_id)
    if any(m in TEXT_METRICS for m in metrics):
        ref_tokens = tokenize(record.reference_text)
        cand_tokens = tokenize(record.candidate_text or "")

    for metric in metrics:
        try:
            if metric == "vlscore":
                area = triangle_area(i_e, g_e, r_e)
                if area > tcfg.constant_c:
                    clamps += 1
                value = vlscore_from_area(area, tcfg)
            elif metric == "triangle_area":
                value = triangle_area(i_e, g_e, r_e)
            elif metric == "cosine":
                value = cosine_similarity(r_e, g_e)
            elif metric == "image_centered_cosine":
                value = image_centered_cosine(i_e, g_e, r_e)
            elif metric == "min_sphere_radius":
                value = min_enclosing_sphere_radius(i_e, g_e, r_e)
            elif metric.startswith("bleu"):
                value = bleu(ref_tokens, cand_tokens, max_n=int(metric[4:]))
            elif metric == "rouge_l":
                value = rouge_l(ref_tokens, cand_tokens)
            else:
                value = meteor_lite(ref_tokens, cand_tokens)
        except InputError as exc:
            # undefined for this record's geometry (e.g. report == image);
            # unresolved ids raise before this loop and abort the run
            skips.append({"study_id": record.study_id, "metric": metric, "reason": str(exc)})
            continue
        rows.append(ScoreRow(study_id=record.study_id, metric=metric, value=value))
    return rows, skips, clamps


def run_scoring(
    records: list[StudyRecord],
    store: EmbeddingStore | None,
    tcfg: TriangleScoreConfig,
    metrics: list[str],
    workers: int = 1,
) -> tuple[list[ScoreRow], list[dict], int]:
    """Score every (record, metric); returns (rows, skips, vlscore clamp count)."""
    _validate_metrics(metrics, store)
    if workers > 1 and len(records) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda r: _score_one(r, store, tcfg, metrics), records))
    else:
        outcomes = [_score_one(r, store, tcfg, metrics) for r in records]
    rows = [row for per_record, _, _ in outcomes for row in per_record]
    skips = [skip for _, per_record, _ in outcomes for skip in per_record]
    clamp_count = sum(c for _, _, c in outcomes)
    rows.sort(key=lambda r: (r.study_id, r.metric))
    return rows, skips, clamp_count


def _resolve_store_and_config(cfg: RunConfig) -> tuple[EmbeddingStore | None, TriangleScoreConfig]:
    store = load_embeddings(cfg.embeddings_path) if cfg.embeddings_path else None
    if cfg.constant_c is not None:
        constant = cfg.constant_c
    elif store is not None:
        constant = store.constant_c
    else:
        constant = TriangleScoreConfig().constant_c
    return store, TriangleScoreConfig(constant_c=constant)


@dataclass
class ScoreRun:
    rows: list[ScoreRow]
    summary: dict


def cmd_score(cfg: RunConfig) -> ScoreRun:
    """Score a manifest; writes scores.csv, summary.json and figures."""
    records = load_manifest(cfg.manifest_path)
    require_candidates(records)
    store, tcfg = _resolve_store_and_config(cfg)
    rows, skips, clamp_count = run_scoring(records, store, tcfg, cfg.metrics, cfg.workers)

    grouped: dict[str, list[float]] = {m: [] for m in cfg.metrics}
    for row in rows:
        grouped[row.metric].append(row.value)
    means = {m: math.fsum(v) / len(v) for m, v in grouped.items() if v}

    summary: dict = {
        "clamp_count": clamp_count,
        "constant_c": tcfg.constant_c,
        "means": means,
        "metrics": list(cfg.metrics),
        "n_records": len(records),
        "n_rows": len(rows),
        "seed": cfg.seed,
        "skips": skips,
    }

    kinds = {r.study_id: r.perturbation for r in records if r.perturbation is not None}
    if kinds:
        joined = [(row, kinds[row.study_id]) for row in rows if row.study_id in kinds]
        present = {kind for _, kind in joined}
        contrasts = [c for c in DEFAULT_CONTRASTS if c.minor in present and c.major in present]
        table = delta_table(joined, contrasts) if joined else None
        if table is not None:
            per_kind: dict[str, dict[str, float]] = {}
            for (metric, kind), mean in table.means.items():
                per_kind.setdefault(metric, {})[kind.value] = mean
            summary["per_kind_means"] = per_kind
            deltas: dict[str, dict[str, float]] = {}
            for (metric, contrast_name), value in table.deltas.items():
                deltas.setdefault(contrast_name, {})[metric] = value
            summary["deltas"] = deltas

    out = _ensure_output(cfg)
    with open(out / "scores.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["study_id", "metric", "value"])
        for row in rows:
            writer.writerow([row.study_id, row.metric, repr(row.value)])
    _write_json(summary, out / "summary.json")

    if cfg.render_figures:
        if means:
            figures.save_metric_means(means, out / "metric_means.png")
        if "per_kind_means" in summary:
            figures.save_kind_means(summary["per_kind_means"], out / "kind_means.png")
    return ScoreRun(rows=rows, summary=summary)


# ---------------------------------------------------------------------------
# perturbation suites


def cmd_perturb(cfg: RunConfig) -> PerturbationSuite:
    """Build the perturbed suite manifest; writes suite.jsonl and counts."""
    records = load_manifest(cfg.manifest_path)
    lex = resolve_lexicon(cfg.lexicon_path)
    suite = generate_suite(records, lex, cfg.seed)
    out = _ensure_output(cfg)
    write_manifest(suite.records, out / "suite.jsonl")
    counts = {kind.value: n for kind, n in suite.counts.items()}
    _write_json(
        {
            "counts": counts,
            "n_input_records": len(records),
            "n_suite_records": len(suite.records),
            "seed": cfg.seed,
        },
        out / "suite_counts.json",
    )
    if cfg.render_figures:
        figures.save_kind_counts(counts, out / "kind_counts.png")
    return suite


# ---------------------------------------------------------------------------
# rank agreement


@dataclass(frozen=True)
class TauEntry:
    metric: str
    tau: float
    n_pairs: int
    negated: bool


def cmd_correlate(
    cfg: RunConfig,
    ratings_path: Path,
    external_scores_path: Path | None = None,
) -> list[TauEntry]:
    """Kendall tau-b of every metric against human ratings, best first."""
    records = load_manifest(cfg.manifest_path)
    require_candidates(records)
    store, tcfg = _resolve_store_and_config(cfg)
    rows, _, _ = run_scoring(records, store, tcfg, cfg.metrics, cfg.workers)
    if external_scores_path is not None:
        rows = rows + import_external_scores(external_scores_path)

    ratings = load_ratings(ratings_path, cfg.aggregation)
    by_metric: dict[str, list[ScoreRow]] = {}
    for row in rows:
        by_metric.setdefault(row.metric, []).append(row)

    entries: list[TauEntry] = []
    for metric in sorted(by_metric):
        metric_rows = by_metric[metric]
        negated = metric in DISSIMILARITY_METRICS
        if negated:
            metric_rows = [ScoreRow(r.study_id, r.metric, -r.value) for r in metric_rows]
        pairs = to_rating_pairs(metric_rows, ratings)
        try:
            tau = kendall_tau_b(pairs)
        except InputError as exc:
            raise InputError(f"metric {metric!r}: {exc}") from None
        entries.append(TauEntry(metric=metric, tau=tau, n_pairs=len(pairs), negated=negated))
    entries.sort(key=lambda e: (-e.tau, e.metric))

    out = _ensure_output(cfg)
    _write_json(
        {
            "aggregation": cfg.aggregation,
            "entries": [
                {"metric": e.metric, "n_pairs": e.n_pairs, "negated": e.negated, "tau": e.tau}
                for e in entries
            ],
        },
        out / "tau.json",
    )
    if cfg.render_figures:
        figures.save_tau_bars([(e.metric, e.tau) for e in entries], out / "tau.png")
    return entries


def cmd_ablate(cfg: RunConfig, ratings_path: Path) -> list[TauEntry]:
    """The fixed four-measure comparison; dissimilarities are rank-negated."""
    return cmd_correlate(replace(cfg, metrics=list(ABLATION_METRICS)), ratings_path)


# ---------------------------------------------------------------------------
# calibration


def cmd_calibrate(cfg: RunConfig) -> dict:
    """Compute max triangle area over the manifest and stamp it into a store copy."""
    if cfg.embeddings_path is None:
        raise InputError("calibrate needs --embeddings")
    store = load_embeddings(cfg.embeddings_path)
    records = load_manifest(cfg.manifest_path)
    triplets = [triplet_ids(r.study_id, r.image_id) for r in records]
    max_area = calibrate_constant(store, triplets)
    report = {
        "max_triangle_area": max_area,
        "model_tag": store.model_tag,
        "n_triplets": len(triplets),
        "previous_constant": store.constant_c,
        "recommended_constant": max_area if max_area > 0 else None,
    }
    out = _ensure_output(cfg)
    _write_json(report, out / "calibration.json")
    if max_area > 0:
        calibrated = EmbeddingStore(
            dim=store.dim,
            entries=dict(store.entries),
            model_tag=store.model_tag,
            constant_c=max_area,
        )
        write_embeddings(calibrated, out / "calibrated.vlse")
        report["calibrated_store"] = str(out / "calibrated.vlse")
    return report


# ---------------------------------------------------------------------------
# scatter export


def cmd_scatter(
    scores_path: Path,
    x_metric: str,
    y_metric: str,
    output_dir: Path,
    render_figures: bool = True,
) -> ScatterData:
    """Join two metric columns of a scores.csv into plot-ready points."""
    rows = import_external_scores(scores_path)
    xs = [r for r in rows if r.metric == x_metric]
    ys = [r for r in rows if r.metric == y_metric]
    for name, side in ((x_metric, xs), (y_metric, ys)):
        if not side:
            raise InputError(f"metric {name!r} not present in {scores_path}")
    data = scatter_export(xs, ys)

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    with open(output_dir / "scatter.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["study_id", x_metric, y_metric])
        for sid, x, y in data.points:
            writer.writerow([sid, repr(x), repr(y)])
    _write_json(
        {
            "mean_x": data.mean_a,
            "mean_y": data.mean_b,
            "n_points": len(data.points),
            "x_metric": x_metric,
            "y_metric": y_metric,
        },
        output_dir / "scatter_summary.json",
    )
    if render_figures:
        figures.save_scatter(data, x_metric, y_metric, output_dir / "scatter.png")
    return data
