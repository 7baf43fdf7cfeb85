"""Decoding-complexity prediction for LDPC codes on the erasure channel and
complexity-aware uplink scheduling for a pooled C-RAN decoder."""

from .density_evolution import DeConfig, NonConvergence, complexity_per_bit, run_de, threshold
from .ensemble import CodePalette, CodeSpec, DegreeDistribution, default_palette, design_rate, regular_distribution

__version__ = "0.1.0"
