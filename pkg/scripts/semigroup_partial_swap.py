"""Partial-swap dynamics: H = SWAP with the environment in |0>.

Prints, on a time grid, whether each E_t and each intermediate map between
consecutive times is CP, and the worst semigroup deviation.
"""
import argparse
import itertools

import numpy as np

from corrqpt.channels import is_cp
from corrqpt.dynamics import TimeFamily, intermediate_map, semigroup_check
from corrqpt.linalg import swap_operator


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--start", type=float, default=0.1)
    ap.add_argument("--stop", type=float, default=1.4)
    ap.add_argument("--steps", type=int, default=8)
    args = ap.parse_args()

    tf = TimeFamily(swap_operator(2), np.diag([1.0, 0.0]))
    grid = np.linspace(args.start, args.stop, args.steps)
    maps = {t: tf(t) for t in grid}
    print("     t   min eig E_t   min eig E_(t-1,t)")
    prev = None
    for t in grid:
        line = f"{t:6.3f}   {is_cp(maps[t]).min_eigenvalue:+.4e}"
        if prev is not None:
            line += f"   {is_cp(intermediate_map(maps[prev], maps[t])).min_eigenvalue:+.4e}"
        print(line)
        prev = t
    verdicts = semigroup_check(tf, list(itertools.product(grid, grid)), tol=1e-6)
    worst = max(verdicts, key=lambda v: v.deviation)
    print(f"semigroup violations: {sum(not v.holds for v in verdicts)}/{len(verdicts)}, "
          f"worst at (t, s) = ({worst.t:.3f}, {worst.s:.3f}) with deviation {worst.deviation:.3e}")


if __name__ == "__main__":
    main()
