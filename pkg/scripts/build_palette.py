"""Regenerate the shipped code palette (d_c=7, d_max=200)."""

import argparse
import logging

from ldpc_cran.code_design import build_palette
from ldpc_cran.ensemble import default_palette_path, save_palette

ap = argparse.ArgumentParser()
ap.add_argument("--out", default=str(default_palette_path()))
args = ap.parse_args()
logging.basicConfig(level=logging.INFO)

pal = build_palette()
for c in pal:
    print(f"{c.label:28s} rate={c.rate:.4f} threshold={c.threshold:.5f}")
save_palette(pal, args.out)
