"""Two channel uses with joint inputs never beat twice the one-letter value.

Compares the 3-simplex grid maximum over joint binary pairs with 2 C1(B).
"""
import argparse
import sys
import time

from siet.channels import MulticastProblem, hamming_energy, make_bsc
from siet.oracle import product_capacity_n2
from siet.pointtopoint import capacity_energy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, default=0.12)
    ap.add_argument("--step", type=float, default=2e-3)
    ap.add_argument("B", type=float, nargs="*", default=[0.0, 0.6, 0.8])
    args = ap.parse_args()
    ch = make_bsc(args.eps)
    print("B,C1,two_letter_half,difference,seconds")
    for B in args.B:
        t0 = time.perf_counter()
        c1 = capacity_energy(ch, hamming_energy(), B).value
        two = product_capacity_n2(MulticastProblem.common([ch], 0.0), B, args.step).value
        print(f"{B:g},{c1:.9f},{two / 2:.9f},{two / 2 - c1:.3e},{time.perf_counter() - t0:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
