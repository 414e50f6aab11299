"""Intermediate map between two depolarizing channels.

For E_{-x} followed by E_{x} the intermediate map is E_{-1} (the NOT map).
It is positive on the image ball of radius x and fails outside of it; the
script prints violation counts per Bloch radius.
"""
import argparse

import numpy as np

from corrqpt.channels import depolarizing, is_cp
from corrqpt.dynamics import intermediate_map, preimage_scan
from corrqpt.sampling import bloch_shell


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--x", type=float, default=1 / 3)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    e1, e2 = depolarizing(-args.x), depolarizing(args.x)
    lam = intermediate_map(e1, e2)
    print(f"distance to NOT: {lam.distance(depolarizing(-1)):.2e}")
    print(f"min Choi eigenvalue: {is_cp(lam).min_eigenvalue:+.4f}")
    print(" radius  violating")
    for k, r in enumerate(np.linspace(0.05, 1.0, 20)):
        rep = preimage_scan(e1, bloch_shell(r, args.samples, seed=args.seed + k))
        print(f" {r:6.3f}  {rep.violating:4d}/{rep.tested}")


if __name__ == "__main__":
    main()
