"""Density evolution on the binary erasure channel: recursion, threshold, iteration
counts and the per-data-bit decoding complexity l * d_c * (1 - R) / R."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .ensemble import CodeSpec, DegreeDistribution, eval_poly

STALL_TOL = 1e-12
GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class DeConfig:
    eps_thresh: float = 1e-3
    max_iters: int = 1000

    def __post_init__(self):
        if not 0 < self.eps_thresh < 1:
            raise ValueError(f"eps_thresh must be in (0, 1), got {self.eps_thresh}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass(frozen=True)
class NonConvergence:
    """Returned instead of an iteration count / complexity when DE does not reach
    eps_thresh. reason is 'stalled' (hit a fixed point above eps_thresh) or
    'max_iters' (still decreasing when the cap was reached)."""

    reason: str

    def __bool__(self):
        return False


STALLED = NonConvergence("stalled")
MAX_ITERS = NonConvergence("max_iters")


@dataclass
class DeTrace:
    eps_sequence: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    status: str = "converged"  # or 'stalled' / 'max_iters'


def de_step(dist: DegreeDistribution, eps0: float, eps_prev: float) -> float:
    return eps0 * eval_poly(dist, "lambda", 1.0 - eval_poly(dist, "rho", 1.0 - eps_prev))


def run_de(dist: DegreeDistribution, eps0: float, cfg: DeConfig = DeConfig()) -> DeTrace:
    if not 0.0 <= eps0 <= 1.0:
        raise ValueError(f"eps0 must be in [0, 1], got {eps0}")
    seq = [float(eps0)]
    if eps0 <= cfg.eps_thresh:
        return DeTrace(seq, 0, True, "converged")
    prev = eps0
    for it in range(1, cfg.max_iters + 1):
        cur = de_step(dist, eps0, prev)
        seq.append(cur)
        if cur <= cfg.eps_thresh:
            return DeTrace(seq, it, True, "converged")
        if cur >= prev - STALL_TOL:
            return DeTrace(seq, it, False, "stalled")
        prev = cur
    return DeTrace(seq, cfg.max_iters, False, "max_iters")


def iterations_required(dist: DegreeDistribution, eps0: float, cfg: DeConfig = DeConfig()):
    """Iterations to reach eps_thresh, or a NonConvergence marker."""
    tr = run_de(dist, eps0, cfg)
    if tr.converged:
        return tr.iterations
    return STALLED if tr.status == "stalled" else MAX_ITERS


def iteration_counts(dist: DegreeDistribution, eps0s, cfg: DeConfig = DeConfig()):
    """Vectorised run_de over many eps0 values at once.

    Returns (iterations, status) arrays, with status 0 = converged, 1 = stalled,
    2 = max_iters. Matches run_de element by element.
    """
    eps0s = np.asarray(eps0s, dtype=float)
    n = eps0s.size
    iters = np.zeros(n, dtype=np.int64)
    status = np.full(n, 2, dtype=np.int8)
    flat = eps0s.ravel()
    done0 = flat <= cfg.eps_thresh
    status[done0] = 0
    active = np.flatnonzero(~done0)
    e0 = flat[active]
    prev = e0.copy()
    for it in range(1, cfg.max_iters + 1):
        if active.size == 0:
            break
        cur = e0 * eval_poly(dist, "lambda", 1.0 - eval_poly(dist, "rho", 1.0 - prev))
        conv = cur <= cfg.eps_thresh
        stall = ~conv & (cur >= prev - STALL_TOL)
        fin = conv | stall
        iters[active[fin]] = it
        status[active[conv]] = 0
        status[active[stall]] = 1
        keep = ~fin
        active, e0, prev = active[keep], e0[keep], cur[keep]
    iters[active] = cfg.max_iters
    return iters.reshape(eps0s.shape), status.reshape(eps0s.shape)


def erasure_ratio(dist: DegreeDistribution, x):
    """eps(x) = x / lambda(1 - rho(1 - x)): the largest eps0 for which f(eps0, x) <= x."""
    g = eval_poly(dist, "lambda", 1.0 - eval_poly(dist, "rho", 1.0 - np.asarray(x, float)))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(g > 0, np.asarray(x, float) / np.where(g > 0, g, 1.0), np.inf)


def _golden_min(f, a: float, b: float, tol: float) -> tuple[float, float]:
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def threshold(dist: DegreeDistribution, x_lo: float = DeConfig.eps_thresh,
              n_grid: int = 10_000, tol: float = 1e-6) -> float:
    """eps* = min{eps(x) : eps(x) > x} over x in [x_lo, 1].

    Dense grid scan, then golden-section refinement around the grid minimiser.
    """
    x = np.linspace(x_lo, 1.0, n_grid)
    e = erasure_ratio(dist, x)
    ok = np.isfinite(e) & (e > x)
    if not ok.any():
        raise ValueError("lambda(1 - rho(1 - x)) vanishes on the whole grid")
    k = int(np.argmin(np.where(ok, e, np.inf)))
    best = float(e[k])
    a, b = x[max(k - 1, 0)], x[min(k + 1, n_grid - 1)]

    def f(t):
        v = float(erasure_ratio(dist, t))
        return v if v > t else math.inf

    _, ref = _golden_min(f, a, b, tol)
    return min(best, ref)


def threshold_bisection(dist: DegreeDistribution, cfg: DeConfig = DeConfig(), tol: float = 1e-5) -> float:
    """Largest eps0 for which run_de converges, by bisection. Slow; a cross-check only."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if run_de(dist, mid, cfg).converged:
            lo = mid
        else:
            hi = mid
    return lo


def complexity_factor(code: CodeSpec) -> float:
    if not code.distribution.is_check_regular:
        raise ValueError(f"{code.label}: complexity needs a check-regular code")
    return code.d_c * (1.0 - code.rate) / code.rate


def complexity_per_bit(code: CodeSpec, eps0: float, cfg: DeConfig = DeConfig()):
    """l * d_c * (1 - R) / R, or the NonConvergence marker from iterations_required."""
    factor = complexity_factor(code)
    ell = iterations_required(code.distribution, eps0, cfg)
    if isinstance(ell, NonConvergence):
        return ell
    return ell * factor


class ComplexityTable:
    """Read-through cache of complexity_per_bit for one code on eps0 quantised to `step`.

    The whole table is computed on first use (vectorised) under a lock, after which
    lookups are lock-free reads of an immutable array. NaN marks non-convergence.
    """

    def __init__(self, code: CodeSpec, cfg: DeConfig = DeConfig(), step: float = 1e-4):
        self.code = code
        self.cfg = cfg
        self.step = step
        self._table = None
        self._lock = threading.Lock()

    def _build(self):
        with self._lock:
            if self._table is None:
                grid = np.arange(int(round(1.0 / self.step)) + 1) * self.step
                iters, status = iteration_counts(self.code.distribution, grid, self.cfg)
                tab = iters * complexity_factor(self.code)
                tab = np.where(status == 0, tab, np.nan)
                tab.setflags(write=False)
                self._table = tab
        return self._table

    def quantize(self, eps0):
        return np.rint(np.asarray(eps0, float) / self.step).astype(np.int64)

    def __call__(self, eps0):
        """Complexity at quantised eps0; NaN where DE does not converge."""
        tab = self._table if self._table is not None else self._build()
        out = tab[np.clip(self.quantize(eps0), 0, tab.size - 1)]
        return out if np.ndim(out) else float(out)
