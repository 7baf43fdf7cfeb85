"""Refit the SINR -> eps0 curve at default cell parameters and store it."""

import argparse

from ldpc_cran.cellular import calibrate, default_calibration_path

ap = argparse.ArgumentParser()
ap.add_argument("--drops", type=int, default=20_000)
ap.add_argument("--seed", type=int, default=2024)
ap.add_argument("--out", default=str(default_calibration_path()))
args = ap.parse_args()

curve = calibrate(args.drops, args.seed)
curve.save(args.out)
print(f"a={curve.a:.5f} b={curve.b:.5f} over [{curve.gamma_lo_db:.1f}, {curve.gamma_hi_db:.1f}] dB, "
      f"{curve.n_samples} samples")
