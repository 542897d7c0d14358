"""Multicast curve for a BSC(0.12) and a Z(0.3) receiver with each receiver's MI.

    python scripts/bsc_z_curve.py --points 71 > curve.csv
"""
import argparse
import sys

import numpy as np

from siet.channels import MulticastProblem, make_bsc, make_z
from siet.multicast import b_max_multicast, per_channel_curves
from siet.oracle import GridSpec, grid_capacity_energy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=51)
    ap.add_argument("--oracle", action="store_true", help="add a 1-D grid oracle column (step 1e-5)")
    args = ap.parse_args()
    chans = (make_bsc(0.12), make_z(0.3))
    Bs = np.linspace(0, b_max_multicast(chans), args.points)
    print("B,C,I_bsc,I_z,p1" + (",oracle" if args.oracle else ""))
    for B, s in zip(Bs, per_channel_curves(chans, Bs)):
        row = [B, s.value, *s.per_channel_mi, s.optimizer.probs[1]]
        if args.oracle:
            row.append(grid_capacity_energy(MulticastProblem.common(chans, B), GridSpec(1e-5, 2)).value)
        print(",".join(f"{v:.12g}" for v in row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
