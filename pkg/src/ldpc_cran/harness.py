"""Monte Carlo driver: trials, parameter sweeps and CSV output."""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cellular import (CalibrationCurve, ClusterSnapshot, build_topology, default_calibration_path,
                       drop_users, snapshot)
from .density_evolution import DeConfig
from .ensemble import default_palette_path, load_palette
from .schedulers import SCHEDULERS, Budget, ComplexityModel, ScheduleDecision, get_scheduler

log = logging.getLogger(__name__)

SWEEP_VARS = ("alpha", "utilization", "cluster_size")
SWEEP_RANGES = {"alpha": (2, 5), "utilization": (0.6, 1.0), "cluster_size": (1, 10)}
CSV_FIELDS = ("scheduler", "alpha", "utilization", "cluster_size", "gamma_db", "s", "trials", "seed",
              "mean_throughput", "stderr_throughput", "outage_prob", "c_server", "c_loc")


@dataclass(frozen=True)
class SimConfig:
    alpha: float = 3.0
    utilization: float = 1.0
    cluster_size: int = 7
    gamma_db: float = 20.0
    s: float = 0.1
    trials: int = 1000
    seed: int = 0
    schedulers: tuple[str, ...] = SCHEDULERS
    c_server: float | None = None   # default DEFAULT_PER_CELL per cluster cell
    c_loc: float | None = None      # default c_server / cluster_size
    palette: str = str(default_palette_path())
    calibration: str = str(default_calibration_path())
    mapping: str = "exp"
    de: DeConfig = field(default_factory=DeConfig)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 1 <= self.cluster_size <= 10:
            raise ValueError(f"cluster_size must be in [1, 10], got {self.cluster_size}")
        for s in self.schedulers:
            get_scheduler(s)
        for name, (lo, hi) in SWEEP_RANGES.items():
            v = getattr(self, name)
            if not lo <= v <= hi:
                warnings.warn(f"{name}={v} is outside the studied range [{lo}, {hi}]", stacklevel=3)

    @property
    def budget(self) -> Budget:
        default = Budget.default(self.cluster_size)
        c_server = self.c_server if self.c_server is not None else default.c_server
        c_loc = self.c_loc if self.c_loc is not None else c_server / self.cluster_size
        return Budget(c_server, c_loc)


@dataclass
class SweepResult:
    scheduler: str
    alpha: float
    utilization: float
    cluster_size: int
    gamma_db: float
    s: float
    trials: int
    seed: int
    mean_throughput: float
    stderr_throughput: float
    outage_prob: float
    c_server: float
    c_loc: float

    def row(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@lru_cache(maxsize=8)
def _model(palette_path: str, de: DeConfig) -> ComplexityModel:
    return ComplexityModel(load_palette(palette_path), de)


@lru_cache(maxsize=8)
def _curve(path: str, mapping: str) -> CalibrationCurve:
    return CalibrationCurve.load(path).with_mode(mapping)


class Simulation:
    """Loaded resources for one configuration."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.topo = build_topology(cfg.cluster_size, cfg.alpha, cfg.gamma_db, cfg.s)
        self.curve = _curve(cfg.calibration, cfg.mapping)
        self.model = _model(cfg.palette, cfg.de)
        self.budget = cfg.budget

    def snapshot(self, rng: np.random.Generator) -> ClusterSnapshot:
        return snapshot(self.topo, drop_users(self.topo, self.cfg.utilization, rng), self.curve)

    def decide(self, snap: ClusterSnapshot) -> dict[str, ScheduleDecision]:
        ladders = self.model.ladders(snap)
        return {name: get_scheduler(name)(ladders, self.budget) for name in self.cfg.schedulers}

    def trial_rngs(self) -> Iterable[np.random.Generator]:
        for ss in np.random.SeedSequence(self.cfg.seed).spawn(self.cfg.trials):
            yield np.random.default_rng(ss)

    def run(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        """Per scheduler: (throughput per trial, outage flag per trial).

        All schedulers see the same snapshot in every trial.
        """
        T = {s: np.empty(self.cfg.trials) for s in self.cfg.schedulers}
        out = {s: np.zeros(self.cfg.trials, dtype=bool) for s in self.cfg.schedulers}
        for t, rng in enumerate(self.trial_rngs()):
            for name, d in self.decide(self.snapshot(rng)).items():
                T[name][t] = d.throughput
                out[name][t] = d.outage or bool(d.skipped)
        return {s: (T[s], out[s]) for s in self.cfg.schedulers}


def run_trial(cfg: SimConfig, rng: np.random.Generator, scheduler: str | None = None) -> tuple[float, bool]:
    sim = Simulation(cfg)
    name = scheduler or cfg.schedulers[0]
    d = get_scheduler(name)(sim.model.ladders(sim.snapshot(rng)), sim.budget)
    return d.throughput, d.outage or bool(d.skipped)


def summarize(cfg: SimConfig, samples: dict) -> list[SweepResult]:
    b = cfg.budget
    rows = []
    for name, (T, out) in samples.items():
        se = float(np.std(T, ddof=1) / np.sqrt(T.size)) if T.size > 1 else 0.0
        rows.append(SweepResult(name, cfg.alpha, cfg.utilization, cfg.cluster_size, cfg.gamma_db, cfg.s,
                                cfg.trials, cfg.seed, float(np.mean(T)), se, float(np.mean(out)),
                                b.c_server, b.c_loc))
    return rows


def run_point(cfg: SimConfig) -> list[SweepResult]:
    return summarize(cfg, Simulation(cfg).run())


def run_sweep(base: SimConfig, variable: str, points: Sequence[float]) -> list[SweepResult]:
    if variable not in SWEEP_VARS:
        raise ValueError(f"sweep variable must be one of {SWEEP_VARS}, got {variable!r}")
    rows = []
    for p in points:
        cfg = replace(base, **{variable: int(p) if variable == "cluster_size" else float(p)})
        # c_server / c_loc left unset scale with the cluster size at each point
        log.info("%s=%s", variable, p)
        rows.extend(run_point(cfg))
    return sort_rows(rows)


def sort_rows(rows: Iterable[SweepResult]) -> list[SweepResult]:
    order = {s: i for i, s in enumerate(SCHEDULERS)}
    return sorted(rows, key=lambda r: (order.get(r.scheduler, 99), r.scheduler, r.alpha, r.utilization,
                                       r.cluster_size))


def emit_results(results: Iterable[SweepResult], path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
            w.writeheader()
            for r in sort_rows(results):
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.row().items()})
    except OSError as e:
        raise OSError(f"cannot write results to {path}: {e}") from e
    return path


def read_results(path) -> list[SweepResult]:
    types = {f.name: f.type for f in fields(SweepResult)}
    conv = {"str": str, "int": int, "float": float}
    with Path(path).open(newline="") as fh:
        return [SweepResult(**{k: conv[types[k]](v) for k, v in row.items()}) for row in csv.DictReader(fh)]
