"""Per-trial rate schedulers for a pooled decoding budget: MRS, EJF, Local Limit, SCC.

Every scheduler works on a ladder per cluster cell: the codes that can decode that
user, ordered by increasing rate, each with its complexity. MRS-style selection
starts every user at the top of its ladder; demotion moves one rung down.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cellular import ClusterSnapshot
from .density_evolution import ComplexityTable, DeConfig
from .ensemble import CodePalette

SCHEDULERS = ("mrs", "ejf", "local-limit", "scc")
# pooled budget per cluster cell; with the shipped palette this gives ~10% MRS outage at defaults
DEFAULT_PER_CELL = 2000.0


@dataclass(frozen=True)
class Rung:
    code: int  # palette index
    rate: float
    complexity: float


Ladder = Sequence[Rung]


@dataclass(frozen=True)
class Budget:
    c_server: float
    c_loc: float | None = None

    def __post_init__(self):
        if not self.c_server > 0:
            raise ValueError(f"c_server must be positive, got {self.c_server}")
        if self.c_loc is not None and not self.c_loc > 0:
            raise ValueError(f"c_loc must be positive, got {self.c_loc}")

    @classmethod
    def default(cls, n_cluster: int, per_cell: float = DEFAULT_PER_CELL) -> Budget:
        return cls(per_cell * n_cluster, per_cell)


@dataclass
class ScheduleDecision:
    rates: np.ndarray          # per cluster cell; 0 = not decoded
    complexities: np.ndarray   # per cluster cell; 0 where not decoded
    codes: np.ndarray          # palette index per cell, -1 where not decoded
    outage: bool               # cluster-wide computational outage
    skipped: frozenset = field(default_factory=frozenset)  # cells dropped by EJF

    @property
    def throughput(self) -> float:
        return float(self.rates.sum() / len(self.rates)) if len(self.rates) else 0.0

    @property
    def load(self) -> float:
        return float(self.complexities.sum())


def build_ladders(eps0s, rates, thresholds, complexity) -> list[list[Rung]]:
    """Ladders for each user from raw palette data.

    A code is on a user's ladder when its threshold exceeds the user's eps0 and
    complexity(code_index, eps0) is finite (DE converged). NaN eps0 = empty cell.
    """
    thresholds = np.asarray(thresholds, float)
    out = []
    for e in eps0s:
        lad = []
        if np.isfinite(e):
            for k in np.flatnonzero(thresholds > e):
                c = complexity(int(k), e)
                if np.isfinite(c):
                    lad.append(Rung(int(k), float(rates[k]), float(c)))
        out.append(lad)
    return out


class ComplexityModel:
    """Palette plus memoised complexity tables; turns snapshots into ladders."""

    def __init__(self, palette: CodePalette, cfg: DeConfig = DeConfig(), step: float = 1e-4):
        self.palette = palette
        self.cfg = cfg
        self.tables = [ComplexityTable(c, cfg, step) for c in palette]
        self._rates = palette.rates
        self._thr = palette.thresholds

    def complexity(self, k: int, eps0: float) -> float:
        return self.tables[k](eps0)

    def ladders(self, snap: ClusterSnapshot) -> list[list[Rung]]:
        return build_ladders(snap.eps0, self._rates, self._thr, self.complexity)


def _decision(ladders, level, outage=False, skipped=()) -> ScheduleDecision:
    n = len(ladders)
    rates, cx, codes = np.zeros(n), np.zeros(n), np.full(n, -1)
    if not outage:
        for u, lv in enumerate(level):
            if lv >= 0 and u not in skipped:
                r = ladders[u][lv]
                rates[u], cx[u], codes[u] = r.rate, r.complexity, r.code
    return ScheduleDecision(rates, cx, codes, outage, frozenset(skipped))


def _top(ladders) -> list[int]:
    return [len(l) - 1 for l in ladders]


def _load(ladders, level) -> float:
    return sum(ladders[u][lv].complexity for u, lv in enumerate(level) if lv >= 0)


def mrs(ladders: Sequence[Ladder], budget: Budget) -> ScheduleDecision:
    level = _top(ladders)
    return _decision(ladders, level, outage=_load(ladders, level) > budget.c_server)


def ejf(ladders: Sequence[Ladder], budget: Budget) -> ScheduleDecision:
    level = _top(ladders)
    if _load(ladders, level) <= budget.c_server:
        return _decision(ladders, level)
    jobs = sorted((ladders[u][lv].complexity, u) for u, lv in enumerate(level) if lv >= 0)
    c_sum, skipped = 0.0, set()
    for c, u in jobs:
        if c_sum + c <= budget.c_server:
            c_sum += c
        else:
            skipped.add(u)
    return _decision(ladders, level, skipped=skipped)


def local_limit(ladders: Sequence[Ladder], budget: Budget) -> ScheduleDecision:
    """While over budget, every user above c_loc drops one rung; outage if that stalls.

    A user still above c_loc on its lowest rung keeps it; only the pooled budget
    decides outage.
    """
    if budget.c_loc is None:
        raise ValueError("local-limit needs c_loc")
    level = _top(ladders)
    while _load(ladders, level) > budget.c_server:
        over = [u for u, lv in enumerate(level)
                if lv > 0 and ladders[u][lv].complexity > budget.c_loc]
        if not over:
            return _decision(ladders, level, outage=True)
        for u in over:
            level[u] -= 1
    return _decision(ladders, level)


def scc(ladders: Sequence[Ladder], budget: Budget) -> ScheduleDecision:
    """While over budget, demote the most complex user that still has a lower rung."""
    level = _top(ladders)
    while _load(ladders, level) > budget.c_server:
        movable = [(-ladders[u][lv].complexity, u) for u, lv in enumerate(level) if lv > 0]
        if not movable:
            return _decision(ladders, level, outage=True)
        level[min(movable)[1]] -= 1
    return _decision(ladders, level)


_BY_NAME = {"mrs": mrs, "ejf": ejf, "local-limit": local_limit, "scc": scc}


def get_scheduler(name: str):
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown scheduler {name!r}; choose from {SCHEDULERS}") from None


def max_rate_assign(snap: ClusterSnapshot, model: ComplexityModel) -> list[tuple[float, float]]:
    """(rate, complexity) per cluster cell at the highest decodable rate; (0, 0) if none."""
    out = []
    for lad in model.ladders(snap):
        out.append((lad[-1].rate, lad[-1].complexity) if lad else (0.0, 0.0))
    return out


def schedule(name: str, snap: ClusterSnapshot, model: ComplexityModel, budget: Budget) -> ScheduleDecision:
    return get_scheduler(name)(model.ladders(snap), budget)


def schedule_mrs(snap, model, budget):
    return mrs(model.ladders(snap), budget)


def schedule_ejf(snap, model, budget):
    return ejf(model.ladders(snap), budget)


def schedule_local_limit(snap, model, budget):
    return local_limit(model.ladders(snap), budget)


def schedule_scc(snap, model, budget):
    return scc(model.ladders(snap), budget)
