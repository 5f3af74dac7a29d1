#!/usr/bin/env python3
"""Generate the standard benchmark, run the eight-method comparison, and
render the report SVGs into one output directory."""

import argparse
import os
import sys

from ensemblekit.cli import main as cli_main
from ensemblekit.data import write_features
from ensemblekit.synth import BENCHMARK_THRESHOLD, make_synthetic_set


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="benchmark_out")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    data = os.path.join(args.out_dir, "benchmark.dsef")
    write_features(make_synthetic_set(), data)

    rc = cli_main([
        "compare", "--data", data, "--threshold", str(BENCHMARK_THRESHOLD),
        "--seed", str(args.seed), "--out-dir", args.out_dir, "--jobs", str(args.jobs),
    ])
    if rc:
        return rc
    return cli_main([
        "report", "--compare-dir", args.out_dir,
        "--out", os.path.join(args.out_dir, "radar_report.svg"),
    ])


if __name__ == "__main__":
    sys.exit(main())
