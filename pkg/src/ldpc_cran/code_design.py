"""Threshold-maximising design of check-regular LDPC ensembles.

For a fixed check degree and a fixed eps0 the convergence condition
eps0 * lambda(1 - rho(1 - x)) < x is linear in the lambda_i, so "is eps0 achievable
at rate R?" is an LP feasibility problem. Bisecting eps0 over it gives the best
threshold for the rate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .density_evolution import threshold
from .ensemble import CodePalette, CodeSpec, DegreeDistribution, design_rate

log = logging.getLogger(__name__)

TARGET_RATES = (Fraction(1, 5), Fraction(1, 4), Fraction(1, 3), Fraction(2, 5),
               Fraction(1, 2), Fraction(3, 5), Fraction(2, 3), Fraction(3, 4))
BISECT_TOL = 1e-4
VALIDATION_TOL = 5e-3


class DesignError(ValueError):
    """The rate / mean-degree constraints cannot be met at all."""


@dataclass(frozen=True)
class Infeasible:
    eps0: float
    message: str = ""

    def __bool__(self):
        return False


@dataclass(frozen=True)
class DesignProblem:
    target_rate: float
    d_c: int = 7
    d_max: int = 200
    forbid_degree_one: bool = True
    n_grid: int = 500
    eps_thresh: float = 1e-3
    margin: float = 1e-9

    def __post_init__(self):
        if not 0 < self.target_rate < 1:
            raise ValueError(f"target_rate must be in (0, 1), got {self.target_rate}")
        if self.d_c < 3:
            raise ValueError(f"d_c must be >= 3, got {self.d_c}")
        if self.d_max < 2:
            raise ValueError(f"d_max must be >= 2, got {self.d_max}")

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(2 if self.forbid_degree_one else 1, self.d_max + 1)

    @property
    def inverse_mean(self) -> float:
        """Required sum lambda_i / i."""
        return 1.0 / (self.d_c * (1.0 - self.target_rate))

    def check_attainable(self):
        lo, hi = 1.0 / self.d_max, 1.0 / self.degrees[0]
        if not lo - 1e-12 <= self.inverse_mean <= hi + 1e-12:
            raise DesignError(
                f"rate {self.target_rate:.6g} with d_c={self.d_c} needs sum lambda_i/i = "
                f"{self.inverse_mean:.6g}, outside attainable [{lo:.6g}, {hi:.6g}]")


def _polish(lam: np.ndarray, degrees: np.ndarray, inv_mean: float) -> np.ndarray:
    # snap LP output onto the two equality constraints exactly (least-norm correction on the support)
    lam = np.clip(lam, 0.0, 1.0)
    lam[lam < 1e-12] = 0.0
    s = lam > 0
    A = np.vstack([np.ones(s.sum()), 1.0 / degrees[s]])
    resid = np.array([1.0, inv_mean]) - A @ lam[s]
    if s.sum() >= 2:
        lam[s] += A.T @ np.linalg.lstsq(A @ A.T, resid, rcond=None)[0]
    return np.clip(lam, 0.0, 1.0)


def feasible_at(problem: DesignProblem, eps0: float):
    """A DegreeDistribution meeting the rate constraint and converging from eps0, or Infeasible."""
    problem.check_attainable()
    if not 0 < eps0 < 1:
        raise ValueError(f"eps0 must be in (0, 1), got {eps0}")
    if eps0 <= problem.eps_thresh:
        eps0 = problem.eps_thresh * (1 + 1e-9)
    deg = problem.degrees
    x = np.linspace(problem.eps_thresh, eps0, problem.n_grid)
    y = 1.0 - (1.0 - x) ** (problem.d_c - 1)
    # rows scaled by 1/x: eps0 * sum_i lam_i y^(i-1) / x <= 1 - margin / x
    A_ub = eps0 * y[:, None] ** (deg[None, :] - 1) / x[:, None]
    b_ub = 1.0 - problem.margin / x
    A_eq = np.vstack([np.ones(deg.size), 1.0 / deg])
    b_eq = np.array([1.0, problem.inverse_mean])
    res = linprog(np.zeros(deg.size), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=(0.0, 1.0), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10})
    if res.status != 0:
        return Infeasible(eps0, res.message)
    lam = _polish(res.x, deg, problem.inverse_mean)
    coeffs = {int(d): float(v) for d, v in zip(deg, lam) if v > 0}
    return DegreeDistribution(coeffs, {problem.d_c: 1.0}, d_max=problem.d_max)


def rate_label(rate: float, d_c: int) -> str:
    f = Fraction(rate).limit_denominator(100)
    return f"R={f.numerator}/{f.denominator} dc={d_c}"


def optimize(problem: DesignProblem, tol: float = BISECT_TOL) -> CodeSpec:
    problem.check_attainable()
    lo, hi = 0.0, 1.0 - problem.target_rate
    best = None
    top = feasible_at(problem, hi * (1 - 1e-9))
    if top:
        lo, best = hi, top
    while hi - lo > tol:
        mid = (lo + hi) / 2
        dist = feasible_at(problem, mid)
        if dist:
            lo, best = mid, dist
        else:
            hi = mid
    if best is None:
        raise DesignError(f"no feasible ensemble for rate {problem.target_rate}")
    eps_star = threshold(best, x_lo=problem.eps_thresh)
    if abs(eps_star - lo) > VALIDATION_TOL:
        raise DesignError(
            f"recomputed threshold {eps_star:.6f} disagrees with bisection value {lo:.6f}")
    return CodeSpec(best, design_rate(best), eps_star, rate_label(problem.target_rate, problem.d_c))


def rate_ceiling_code(d_c: int = 7, d_max: int = 200, eps_thresh: float = 1e-3) -> CodeSpec:
    """The all-degree-2 ensemble: the highest design rate reachable with lambda_1 = 0."""
    dist = DegreeDistribution({2: 1.0}, {d_c: 1.0}, d_max=d_max)
    rate = design_rate(dist)
    return CodeSpec(dist, rate, threshold(dist, x_lo=eps_thresh), rate_label(rate, d_c))


def build_palette(rates=TARGET_RATES, d_c: int = 7, d_max: int = 200,
                        clamp_unattainable: bool = True, **kw) -> CodePalette:
    """Optimise one code per target rate.

    With d_c = 7 and lambda_1 = 0 no rate above 5/7 is attainable, so a target like
    3/4 raises DesignError unless clamp_unattainable, in which case the rate-ceiling
    (2, d_c) ensemble takes its slot (labelled with its true rate).
    """
    codes = []
    for r in rates:
        prob = DesignProblem(float(r), d_c=d_c, d_max=d_max, **kw)
        try:
            code = optimize(prob)
        except DesignError:
            if not clamp_unattainable or prob.inverse_mean <= 1.0 / prob.degrees[0]:
                raise
            code = rate_ceiling_code(d_c, d_max, prob.eps_thresh)
            code = CodeSpec(code.distribution, code.rate, code.threshold,
                            f"{code.label} (target {Fraction(r).limit_denominator(100)})")
            log.warning("rate %s unattainable with d_c=%d; using %s", r, d_c, code.label)
        log.info("%s: threshold %.6f", code.label, code.threshold)
        codes.append(code)
    return CodePalette(tuple(sorted(codes, key=lambda c: c.rate)))
