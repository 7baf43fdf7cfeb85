"""Edge-perspective degree distributions for LDPC ensembles, plus the palette file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

NORM_TOL = 1e-9
RATE_TOL = 1e-6
DEFAULT_DMAX = 200


def _clean(coeffs: Mapping[int, float]) -> dict[int, float]:
    return {int(d): float(c) for d, c in sorted(coeffs.items()) if c != 0.0}


@dataclass(frozen=True)
class DegreeDistribution:
    """lambda_coeffs[i] / rho_coeffs[j] are the fractions of edges at degree-i variable
    nodes and degree-j check nodes. Stored sparsely; zero entries are dropped."""

    lambda_coeffs: Mapping[int, float]
    rho_coeffs: Mapping[int, float]
    d_max: int = DEFAULT_DMAX

    def __post_init__(self):
        lam = _clean(self.lambda_coeffs)
        rho = _clean(self.rho_coeffs)
        object.__setattr__(self, "lambda_coeffs", lam)
        object.__setattr__(self, "rho_coeffs", rho)
        for name, coeffs in (("lambda", lam), ("rho", rho)):
            if not coeffs:
                raise ValueError(f"{name} has no nonzero coefficients")
            if min(coeffs) < 1:
                raise ValueError(f"{name} has a degree below 1")
            vals = np.fromiter(coeffs.values(), float)
            if np.any(vals < 0) or np.any(vals > 1):
                raise ValueError(f"{name} coefficients must lie in [0, 1]")
            total = float(vals.sum())
            if abs(total - 1.0) > NORM_TOL:
                raise ValueError(f"{name} coefficients sum to {total!r}, not 1")
        if max(lam) > self.d_max:
            raise ValueError(f"variable degree {max(lam)} exceeds d_max={self.d_max}")

    @property
    def is_check_regular(self) -> bool:
        return len(self.rho_coeffs) == 1

    @property
    def d_c(self) -> int:
        if not self.is_check_regular:
            raise ValueError("check degree is undefined for a mixed rho")
        return next(iter(self.rho_coeffs))

    def __hash__(self):
        return hash((tuple(self.lambda_coeffs.items()), tuple(self.rho_coeffs.items()), self.d_max))


def eval_poly(dist: DegreeDistribution, which: str, x):
    """Evaluate lambda(x) or rho(x) = sum_i c_i x^(i-1). Works on scalars and arrays."""
    if which == "lambda":
        coeffs = dist.lambda_coeffs
    elif which == "rho":
        coeffs = dist.rho_coeffs
    else:
        raise ValueError(f"which must be 'lambda' or 'rho', got {which!r}")
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for d, c in coeffs.items():
        out = out + c * x ** (d - 1)
    return out if out.ndim else float(out)


def design_rate(dist: DegreeDistribution) -> float:
    """1 - int(rho) / int(lambda), in closed form."""
    int_lam = sum(c / d for d, c in dist.lambda_coeffs.items())
    int_rho = sum(c / d for d, c in dist.rho_coeffs.items())
    if int_lam == 0:
        raise ValueError("degenerate distribution: sum lambda_i / i is zero")
    return 1.0 - int_rho / int_lam


def regular_distribution(d_v: int, d_c: int, d_max: int = DEFAULT_DMAX) -> DegreeDistribution:
    if d_v < 2 or d_c <= d_v:
        raise ValueError(f"need 2 <= d_v < d_c, got ({d_v}, {d_c})")
    return DegreeDistribution({d_v: 1.0}, {d_c: 1.0}, d_max=max(d_max, d_v))


@dataclass(frozen=True)
class CodeSpec:
    distribution: DegreeDistribution
    rate: float
    threshold: float
    label: str = ""

    def __post_init__(self):
        r = design_rate(self.distribution)
        if abs(r - self.rate) > RATE_TOL:
            raise ValueError(f"{self.label}: rate {self.rate} != design rate {r}")
        if not 0.0 < self.rate < 1.0:
            raise ValueError(f"{self.label}: rate {self.rate} outside (0, 1)")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"{self.label}: threshold {self.threshold} outside (0, 1)")
        if self.threshold > 1.0 - self.rate:
            raise ValueError(f"{self.label}: threshold {self.threshold} exceeds capacity {1 - self.rate}")

    @property
    def d_c(self) -> int:
        return self.distribution.d_c


@dataclass(frozen=True)
class CodePalette:
    codes: tuple[CodeSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        codes = tuple(self.codes)
        object.__setattr__(self, "codes", codes)
        if not codes:
            raise ValueError("palette is empty")
        for lo, hi in zip(codes, codes[1:]):
            if not hi.rate > lo.rate:
                raise ValueError(f"rates not strictly increasing at {hi.label}")
            if not hi.threshold < lo.threshold:
                raise ValueError(f"thresholds not strictly decreasing at {hi.label}")

    def __len__(self):
        return len(self.codes)

    def __iter__(self):
        return iter(self.codes)

    def __getitem__(self, i):
        return self.codes[i]

    @property
    def rates(self) -> np.ndarray:
        return np.array([c.rate for c in self.codes])

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([c.threshold for c in self.codes])

    def by_label(self, label: str) -> CodeSpec:
        for c in self.codes:
            if c.label == label:
                return c
        raise KeyError(f"no code labelled {label!r}; have {[c.label for c in self.codes]}")


# -- palette file: JSON lines, one code per line, fixed field order -----------

def code_to_record(code: CodeSpec) -> dict:
    dist = code.distribution
    return {
        "label": code.label,
        "d_c": dist.d_c,
        "rate": code.rate,
        "threshold": code.threshold,
        "lambda": [[d, c] for d, c in dist.lambda_coeffs.items()],
        "d_max": dist.d_max,
    }


def code_from_record(rec: Mapping) -> CodeSpec:
    lam = {int(d): float(c) for d, c in rec["lambda"]}
    dist = DegreeDistribution(lam, {int(rec["d_c"]): 1.0}, d_max=int(rec.get("d_max", DEFAULT_DMAX)))
    return CodeSpec(dist, float(rec["rate"]), float(rec["threshold"]), rec["label"])


def save_palette(codes: Iterable[CodeSpec], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # json writes floats with repr(), which round-trips float64 exactly
    lines = [json.dumps(code_to_record(c)) for c in codes]
    path.write_text("\n".join(lines) + "\n")
    return path


def load_palette(path) -> CodePalette:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise OSError(f"cannot read palette file {path}: {e}") from e
    codes = [code_from_record(json.loads(line)) for line in text.splitlines() if line.strip()]
    return CodePalette(tuple(sorted(codes, key=lambda c: c.rate)))


def default_palette_path() -> Path:
    return Path(__file__).parent / "data" / "palette.jsonl"


def default_palette() -> CodePalette:
    return load_palette(default_palette_path())
