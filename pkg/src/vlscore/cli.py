"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 internal-consistency error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import InputError, InternalConsistencyError
from .lexicon import ENV_LEXICON
from .pipeline import (
    REGISTERED_METRICS,
    RunConfig,
    cmd_ablate,
    cmd_calibrate,
    cmd_correlate,
    cmd_perturb,
    cmd_scatter,
    cmd_score,
    format_table,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: ANN201 - argparse contract
        raise InputError(message)


def _add_common(sub: argparse.ArgumentParser, *, embeddings: bool = True) -> None:
    sub.add_argument("--manifest", required=True, type=Path, help="JSONL study manifest")
    if embeddings:
        sub.add_argument("--embeddings", type=Path, help="binary embedding store")
    sub.add_argument("--output", type=Path, default=Path("vlscore-out"), help="output directory")
    sub.add_argument("--seed", type=int, default=0, help="run seed")
    sub.add_argument(
        "--figures",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="render figures next to the delimited outputs",
    )


def _add_scoring(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--metrics",
        default="vlscore",
        help=f"comma-separated metric names from: {', '.join(REGISTERED_METRICS)}",
    )
    sub.add_argument("--constant", type=float, help="override the store's constant C")
    sub.add_argument("--workers", type=int, default=4, help="scoring worker threads")


def _add_ratings(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--ratings", required=True, type=Path, help="study_id,rating CSV")
    sub.add_argument(
        "--aggregation",
        choices=("mean", "sum"),
        default="mean",
        help="how repeated per-study ratings collapse to one value",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="vlscore", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    score = commands.add_parser("score", help="score a manifest against its embeddings")
    _add_common(score)
    _add_scoring(score)

    perturb = commands.add_parser("perturb", help="build the six-kind perturbation suite")
    _add_common(perturb, embeddings=False)
    perturb.add_argument(
        "--lexicon", type=Path, help=f"lexicon JSON (falls back to ${ENV_LEXICON}, then built-in)"
    )

    correlate = commands.add_parser("correlate", help="Kendall tau-b of metrics vs ratings")
    _add_common(correlate)
    _add_scoring(correlate)
    _add_ratings(correlate)
    correlate.add_argument(
        "--external-scores", type=Path, help="extra study_id,metric,value CSV to include"
    )

    ablate = commands.add_parser("ablate", help="tau-b for the four similarity measures")
    _add_common(ablate)
    ablate.add_argument("--constant", type=float, help="override the store's constant C")
    ablate.add_argument("--workers", type=int, default=4, help="scoring worker threads")
    _add_ratings(ablate)

    calibrate = commands.add_parser("calibrate", help="derive C from the largest triangle area")
    _add_common(calibrate)

    scatter = commands.add_parser("scatter", help="join two metric columns into point files")
    scatter.add_argument("--scores", required=True, type=Path, help="scores.csv to read")
    scatter.add_argument("--x-metric", required=True, help="metric for the x axis")
    scatter.add_argument("--y-metric", required=True, help="metric for the y axis")
    scatter.add_argument("--output", type=Path, default=Path("vlscore-out"))
    scatter.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)

    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        manifest_path=args.manifest,
        embeddings_path=getattr(args, "embeddings", None),
        lexicon_path=getattr(args, "lexicon", None),
        output_dir=args.output,
        metrics=[m.strip() for m in getattr(args, "metrics", "vlscore").split(",") if m.strip()],
        constant_c=getattr(args, "constant", None),
        seed=args.seed,
        aggregation=getattr(args, "aggregation", "mean"),
        workers=getattr(args, "workers", 1),
        render_figures=args.figures,
    )


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _dispatch(args: argparse.Namespace) -> None:
    if args.command == "score":
        run = cmd_score(_run_config(args))
        rows = [[m, _fmt(v)] for m, v in sorted(run.summary["means"].items())]
        print(format_table(["metric", "mean"], rows))
        print(
            f"{run.summary['n_rows']} rows over {run.summary['n_records']} records; "
            f"clamped {run.summary['clamp_count']}; skipped {len(run.summary['skips'])}"
        )
        for contrast, per_metric in run.summary.get("deltas", {}).items():
            joined = ", ".join(f"{m}={_fmt(d)}" for m, d in sorted(per_metric.items()))
            print(f"delta[{contrast}]: {joined}")
    elif args.command == "perturb":
        suite = cmd_perturb(_run_config(args))
        rows = [[kind.value, str(n)] for kind, n in suite.counts.items()]
        print(format_table(["kind", "records"], rows))
        print(f"wrote {len(suite.records)} suite records")
    elif args.command in ("correlate", "ablate"):
        cfg = _run_config(args)
        if args.command == "correlate":
            entries = cmd_correlate(cfg, args.ratings, getattr(args, "external_scores", None))
        else:
            entries = cmd_ablate(cfg, args.ratings)
        rows = [
            [e.metric + (" (negated)" if e.negated else ""), _fmt(e.tau), str(e.n_pairs)]
            for e in entries
        ]
        print(format_table(["metric", "tau_b", "pairs"], rows))
    elif args.command == "calibrate":
        report = cmd_calibrate(_run_config(args))
        print(f"max triangle area: {report['max_triangle_area']!r}")
        if report["recommended_constant"] is not None:
            print(f"recommended C: {report['recommended_constant']!r}")
            print(f"calibrated store: {report['calibrated_store']}")
        else:
            print("all areas are zero; C left unchanged")
    else:
        data = cmd_scatter(args.scores, args.x_metric, args.y_metric, args.output, args.figures)
        print(
            f"{len(data.points)} points; mean {args.x_metric}={_fmt(data.mean_a)}, "
            f"mean {args.y_metric}={_fmt(data.mean_b)}"
        )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _dispatch(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InternalConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
