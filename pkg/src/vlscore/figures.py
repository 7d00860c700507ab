"""Matplotlib renderings written next to the delimited outputs."""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .stats import ScatterData

PathLike = str | os.PathLike[str]


def save_metric_means(means: dict[str, float], path: PathLike) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    names = list(means)
    ax.bar(range(len(names)), [means[n] for n in names], color="#4878d0")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("mean score")
    ax.set_title("Per-metric means")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_kind_means(kind_means: dict[str, dict[str, float]], path: PathLike) -> None:
    """Grouped bars: one cluster per perturbation kind, one bar per metric."""
    kinds = sorted({kind for per_metric in kind_means.values() for kind in per_metric})
    metrics = sorted(kind_means)
    if not kinds or not metrics:
        return
    width = 0.8 / len(metrics)
    fig, ax = plt.subplots(figsize=(1.8 + 1.4 * len(kinds), 4.0))
    for offset, metric in enumerate(metrics):
        xs = [k + offset * width for k in range(len(kinds))]
        ys = [kind_means[metric].get(kind, 0.0) for kind in kinds]
        ax.bar(xs, ys, width=width, label=metric)
    ax.set_xticks([k + 0.4 - width / 2 for k in range(len(kinds))])
    ax.set_xticklabels(kinds, rotation=20, ha="right")
    ax.set_ylabel("mean score")
    ax.set_title("Mean score by perturbation kind")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_tau_bars(taus: list[tuple[str, float]], path: PathLike) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    names = [name for name, _ in taus]
    ax.bar(range(len(names)), [t for _, t in taus], color="#6acc64")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("Kendall tau-b")
    ax.set_ylim(-1.0, 1.0)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_title("Agreement with human ratings")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_scatter(data: ScatterData, x_label: str, y_label: str, path: PathLike) -> None:
    fig, ax = plt.subplots(figsize=(4.8, 4.8))
    xs = [x for _, x, _ in data.points]
    ys = [y for _, _, y in data.points]
    ax.scatter(xs, ys, s=14, alpha=0.7, color="#d65f5f", edgecolors="none")
    lo = min(xs + ys + [0.0])
    hi = max(xs + ys + [1.0])
    ax.plot([lo, hi], [lo, hi], linestyle="--", color="gray", linewidth=0.8)
    ax.scatter([data.mean_a], [data.mean_b], marker="x", s=60, color="black", label="means")
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.set_title(f"{y_label} vs {x_label}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_kind_counts(counts: dict[str, int], path: PathLike) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    names = list(counts)
    ax.bar(range(len(names)), [counts[n] for n in names], color="#956cb4")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("records")
    ax.set_title("Perturbation suite size by kind")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
