"""CLI: extract --images <dir> --out <file.dsef> [options]."""

from __future__ import annotations

import argparse
import sys

from .backbone import POOLING_MODES
from .extract import ExtractorConfig, extract_features
from .naming import DEFAULT_POWER_LOSS_REGEX


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extract",
        description="Run a pretrained ResNet-50 convolutional base over an "
                    "image folder and write a DSEF feature file.",
    )
    parser.add_argument("--images", required=True, help="directory of panel images")
    parser.add_argument("--out", required=True, help="output .dsef path")
    parser.add_argument("--pooling", choices=POOLING_MODES, default="global_average")
    parser.add_argument("--regex", default=DEFAULT_POWER_LOSS_REGEX,
                        help="filename pattern with one capture group for the power-loss fraction")
    parser.add_argument("--threshold", type=float, default=None,
                        help="optionally pre-binarize labels at this power-loss cut")
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--weights", default="pretrained",
                        help="'pretrained', 'random:<seed>', or a state-dict path")
    parser.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = ExtractorConfig(
        image_dir=args.images,
        output=args.out,
        pooling=args.pooling,
        batch_size=args.batch_size,
        power_loss_regex=args.regex,
        threshold=args.threshold,
        weights=args.weights,
        threads=args.threads,
    )
    try:
        summary = extract_features(cfg)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}: {summary.written} records, dim {summary.dim}, "
          f"{len(summary.skipped)} skipped")
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
