"""Worst-group capacity and largest segmentation loss for every 2-grouping of
BSC(0.3), Z(0.6), Z(0.65) across a common energy requirement.
"""
import argparse
import sys

import numpy as np

from siet.channels import MulticastProblem, make_bsc, make_z
from siet.segmentation import optimize_capacity, optimize_loss, scan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=15)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    chans = (make_bsc(0.3), make_z(0.6), make_z(0.65))
    print("B,partition,C_Q,max_loss,best_capacity,best_loss")
    for B in np.linspace(0, 0.35, args.points):
        prob = MulticastProblem.common(chans, B)
        table = scan(prob, 2, threads=args.threads)
        cap = optimize_capacity(prob, 2, table=table)[0]
        loss = optimize_loss(prob, 2, table=table)[0]
        for seg, sc in table:
            print(f"{B:.12g},\"{seg}\",{sc.c_q:.12g},{sc.max_loss:.12g},{int(seg == cap)},{int(seg == loss)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
