"""C(B, P) for two Gaussian receivers over a grid of peaks and energy requirements."""
import argparse
import sys

import numpy as np

from siet.gaussian import GaussianMulticast, gaussian_capacity_energy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigmas", type=float, nargs="+", default=[1.0, 1.5])
    ap.add_argument("--peaks", type=float, nargs="+", default=[0.5, 1.0, 2.0, 3.0])
    ap.add_argument("--points", type=int, default=6)
    ap.add_argument("--grid-size", type=int, default=65)
    args = ap.parse_args()
    smin = min(args.sigmas)
    print("P,B,C,lambda,kkt_violation,support")
    for P in args.peaks:
        for B in np.linspace(0, P**2 + smin**2, args.points):
            sol = gaussian_capacity_energy(GaussianMulticast(tuple(args.sigmas), P, B), args.grid_size)
            F = sol.cdf.compact(1e-6)
            pts = ";".join(f"{x:.4g}" for x in F.support)
            print(f"{P:g},{B:.6g},{sol.value:.9f},{sol.kkt.lam:.6g},{sol.kkt.max_violation:.2e},{pts}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
