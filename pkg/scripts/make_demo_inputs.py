#!/usr/bin/env python3
"""Write small NCMAT / NCVEC example inputs for the `ncspace norm` command."""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from ncspace import matcore, mixednorm  # noqa: E402
from ncspace.matcore import RngSeed  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_inputs")
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)
    rng = RngSeed(args.seed, "demo").generator()

    matcore.save_ncmat(os.path.join(args.out, "identity2.ncmat"),
                       np.eye(2, dtype=complex))
    matcore.save_ncmat(os.path.join(args.out, "random4.ncmat"),
                       matcore.ginibre(4, 4, rng))
    fam = np.stack([matcore.ginibre(2, 2, rng) for _ in range(3)])
    mixednorm.save_ncvec(os.path.join(args.out, "family3x2.ncvec"),
                         mixednorm.VectorElement(fam, matcore.normalized(2)))
    diag = np.stack([np.diag(rng.standard_normal(2) + 0j) for _ in range(3)])
    mixednorm.save_ncvec(os.path.join(args.out, "diagonal3x2.ncvec"),
                         mixednorm.VectorElement(diag, matcore.normalized(2)))
    print(f"wrote demo inputs under {args.out}/")
    print("try:  ncspace norm --set input.path="
          f"{args.out}/identity2.ncmat --set space.family=asymmetric "
          "--set space.r=4 --set space.s=4")


if __name__ == "__main__":
    main()
