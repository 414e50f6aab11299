"""Sampling noise in the tomography of a CP map.

Reconstructs depolarizing(x) from Pauli counts at several shot numbers and
reports how often the estimate is not CP and the median |min Choi eigenvalue|.
"""
import argparse

import numpy as np

from corrqpt.channels import depolarizing
from corrqpt.tomography import default_inputs, linear_inversion, simulate_channel_counts


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--x", type=float, default=1.0)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--shots", type=int, nargs="+", default=[10**2, 10**3, 10**4, 10**5, 10**6])
    args = ap.parse_args()

    m, inputs = depolarizing(args.x), default_inputs()
    print("   shots  negative  median|min eig|  median*sqrt(N)")
    for n in args.shots:
        mins = np.array(
            [linear_inversion(simulate_channel_counts(m, inputs, n, s)).min_choi_eigenvalue for s in range(args.seeds)]
        )
        med = np.median(np.abs(mins))
        print(f"{n:8d}  {np.sum(mins < 0):4d}/{args.seeds}  {med:14.3e}  {med * np.sqrt(n):14.3f}")


if __name__ == "__main__":
    main()
