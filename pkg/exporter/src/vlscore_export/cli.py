"""CLI for the embedding exporter. Exit codes: 0 success, 1 error."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .export import ExportJob, constant_for_model, export_embeddings, export_synthetic
from .format import ExportError


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: ANN201 - argparse contract
        raise ExportError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="vlscore-export", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--manifest", required=True, type=Path, help="JSONL study manifest")
        sub.add_argument("--output", required=True, type=Path, help="embedding file to write")
        sub.add_argument("--model-tag", default="unnamed-model", help="tag stored in the header")
        sub.add_argument(
            "--constant",
            type=float,
            help="normalizer C stored in the header (default: the calibrated value "
            "for a known model tag, else 890)",
        )

    run = commands.add_parser("run", help="encode images and texts with a checkpoint")
    add_common(run)
    run.add_argument("--checkpoint", required=True, help="TorchScript archive to load")
    run.add_argument("--image-root", type=Path, default=Path("."), help="directory of images")
    run.add_argument(
        "--deterministic", action="store_true", help="seed torch and force deterministic kernels"
    )

    synthetic = commands.add_parser("synthetic", help="write seeded random unit vectors")
    add_common(synthetic)
    synthetic.add_argument("--seed", type=int, default=0)
    synthetic.add_argument("--dim", type=int, default=512)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        constant = args.constant if args.constant is not None else constant_for_model(args.model_tag)
        job = ExportJob(
            manifest_path=args.manifest,
            output_path=args.output,
            image_root=getattr(args, "image_root", Path(".")),
            checkpoint_ref=getattr(args, "checkpoint", ""),
            model_tag=args.model_tag,
            constant_c=constant,
            deterministic=getattr(args, "deterministic", False),
        )
        if args.command == "run":
            result = export_embeddings(job)
        else:
            result = export_synthetic(job, seed=args.seed, dim=args.dim)
    except (ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {result.n_records} records for {result.n_studies} studies to {args.output}"
        + (f"; skipped {result.skipped}" if result.skipped else "")
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
