"""Complexity per data bit against eps0 for every palette code, as CSV (spike plot data)."""

import argparse
import csv
import sys

import numpy as np

from ldpc_cran.density_evolution import NonConvergence, complexity_per_bit
from ldpc_cran.ensemble import default_palette

ap = argparse.ArgumentParser()
ap.add_argument("--points", type=int, default=200)
args = ap.parse_args()

w = csv.writer(sys.stdout, lineterminator="\n")
w.writerow(["code", "rate", "eps0", "complexity"])
for code in default_palette():
    for e in np.linspace(0, code.threshold, args.points, endpoint=False):
        c = complexity_per_bit(code, float(e))
        w.writerow([code.label, f"{code.rate:.6f}", f"{e:.6f}", "" if isinstance(c, NonConvergence) else f"{float(c):.6g}"])
