"""The three throughput sweeps (alpha, utilization, cluster size), one CSV each."""

import argparse
import logging
from pathlib import Path

from ldpc_cran.harness import SimConfig, emit_results, run_sweep

SWEEPS = {"alpha": [2, 2.5, 3, 3.5, 4, 4.5, 5],
          "utilization": [0.6, 0.7, 0.8, 0.9, 1.0],
          "cluster_size": list(range(1, 11))}

ap = argparse.ArgumentParser()
ap.add_argument("--trials", type=int, default=1000, help="10^5 for full-scale runs")
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--c-server", type=float)
ap.add_argument("--outdir", default="results")
args = ap.parse_args()
logging.basicConfig(level=logging.INFO, format="%(message)s")

base = SimConfig(trials=args.trials, seed=args.seed, c_server=args.c_server)
for var, points in SWEEPS.items():
    path = emit_results(run_sweep(base, var, points), Path(args.outdir) / f"sweep_{var}.csv")
    print("wrote", path)
