#!/usr/bin/env python3
"""Write the standard synthetic benchmark (or a variant) as a DSEF file."""

import argparse

from ensemblekit.data import write_features
from ensemblekit.synth import BENCHMARK_DIM, BENCHMARK_N, BENCHMARK_SEED, make_synthetic_set


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--n", type=int, default=BENCHMARK_N)
    parser.add_argument("--dim", type=int, default=BENCHMARK_DIM)
    parser.add_argument("--seed", type=int, default=BENCHMARK_SEED)
    parser.add_argument("--soiled-fraction", type=float, default=0.2)
    args = parser.parse_args()
    fset = make_synthetic_set(args.n, args.dim, args.seed, args.soiled_fraction)
    write_features(fset, args.out)
    print(f"wrote {args.out}: {len(fset)} records, dim {fset.dim}")


if __name__ == "__main__":
    main()
