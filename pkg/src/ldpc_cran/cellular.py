"""Hex-grid uplink model: topology, user drops, SINR with fractional power control,
and the SINR -> erasure-probability mapping fitted to the SINR CCDF."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

N_COLS, N_ROWS = 11, 10
N_CELLS = N_COLS * N_ROWS
SQRT3 = np.sqrt(3.0)
EMPTY = np.nan


def hex_lattice(n_cols: int = N_COLS, n_rows: int = N_ROWS) -> np.ndarray:
    """Base-station coordinates, unit inter-site distance, odd rows shifted by 1/2."""
    col, row = np.meshgrid(np.arange(n_cols), np.arange(n_rows))
    x = col + 0.5 * (row % 2)
    y = row * SQRT3 / 2
    return np.column_stack([x.ravel(), y.ravel()]).astype(float)


@dataclass(frozen=True)
class Topology:
    bs_positions: np.ndarray
    cluster_ids: np.ndarray
    alpha: float = 3.0
    s: float = 0.1
    gamma_unit: float = 100.0

    def __post_init__(self):
        if self.bs_positions.shape != (N_CELLS, 2):
            raise ValueError(f"expected {N_CELLS} base stations")
        if len(set(self.cluster_ids.tolist())) != len(self.cluster_ids):
            raise ValueError("cluster ids must be distinct")
        if self.alpha < 2 or not 0 <= self.s <= 1:
            raise ValueError("need alpha >= 2 and 0 <= s <= 1")

    @property
    def n_cluster(self) -> int:
        return len(self.cluster_ids)

    @property
    def gamma_db(self) -> float:
        return 10 * np.log10(self.gamma_unit)


def center_cell(pos: np.ndarray) -> int:
    # ties (the 11x10 grid has two equidistant middle cells) go to the lower index
    return int(np.argmin(np.round(np.linalg.norm(pos - pos.mean(0), axis=1), 9)))


def build_topology(N: int = 7, alpha: float = 3.0, gamma_db: float = 20.0, s: float = 0.1) -> Topology:
    if not 1 <= N <= 10:
        raise ValueError(f"cluster size must be in [1, 10], got {N}")
    pos = hex_lattice()
    c = center_cell(pos)
    rel = pos - pos[c]
    dist = np.round(np.hypot(rel[:, 0], rel[:, 1]), 9)
    ang = np.round(np.mod(np.arctan2(rel[:, 1], rel[:, 0]), 2 * np.pi), 9)
    order = np.lexsort((ang, dist))  # center first, then rings by distance, then angle
    return Topology(pos, order[:N].copy(), alpha, s, 10 ** (gamma_db / 10))


@dataclass(frozen=True)
class Drop:
    """occupied[i] says whether cell i has a user; positions[i] is its location (NaN if not)."""

    occupied: np.ndarray
    positions: np.ndarray

    @property
    def users(self) -> dict[int, np.ndarray]:
        return {int(i): self.positions[i] for i in np.flatnonzero(self.occupied)}

    @property
    def utilization(self) -> float:
        return float(self.occupied.mean())


def uniform_in_hex(n: int, rng: np.random.Generator) -> np.ndarray:
    """n offsets uniform over a pointy-top hexagon of unit inter-site distance."""
    out = np.empty((0, 2))
    while len(out) < n:
        m = 2 * (n - len(out)) + 8
        pts = np.column_stack([rng.uniform(-0.5, 0.5, m), rng.uniform(-1 / SQRT3, 1 / SQRT3, m)])
        inside = 0.5 * np.abs(pts[:, 0]) + SQRT3 / 2 * np.abs(pts[:, 1]) <= 0.5
        out = np.vstack([out, pts[inside]])
    return out[:n]


def drop_users(topo: Topology, u: float, rng: np.random.Generator) -> Drop:
    if not 0 <= u <= 1:
        raise ValueError(f"utilization must be in [0, 1], got {u}")
    occupied = rng.random(N_CELLS) < u
    pos = np.full((N_CELLS, 2), np.nan)
    pos[occupied] = topo.bs_positions[occupied] + uniform_in_hex(int(occupied.sum()), rng)
    return Drop(occupied, pos)


def sinr_cells(topo: Topology, drop: Drop, cells) -> np.ndarray:
    """Linear SINR at base stations `cells`; NaN for unoccupied ones.

    Interference is summed over every other occupied cell in the network, each
    user transmitting with power |Y_i - X_i|^(s * alpha).
    """
    cells = np.atleast_1d(np.asarray(cells))
    occ = np.flatnonzero(drop.occupied)
    X = drop.positions[occ]
    serve = np.linalg.norm(X - topo.bs_positions[occ], axis=1)
    tx = serve ** (topo.s * topo.alpha)
    # d[j, i] = distance from base station cells[j] to user occ[i]
    d = np.linalg.norm(topo.bs_positions[cells][:, None, :] - X[None, :, :], axis=2)
    gain = d ** -topo.alpha * tx[None, :]
    own = cells[:, None] == occ[None, :]
    interf = np.where(own, 0.0, gain).sum(1)
    with np.errstate(divide="ignore"):
        num = np.where(own, d, 0.0).sum(1) ** (topo.alpha * (topo.s - 1))
    out = num / (1.0 / topo.gamma_unit + interf)
    out[~drop.occupied[cells]] = np.nan
    return out


def sinr(topo: Topology, drop: Drop, j: int) -> float:
    if not drop.occupied[j]:
        raise ValueError(f"cell {j} has no user")
    return float(sinr_cells(topo, drop, [j])[0])


def to_db(x):
    return 10 * np.log10(x)


@dataclass(frozen=True)
class CalibrationCurve:
    """eps0(gamma_dB) = clip(exp(a * gamma_dB + b), 0, 1), fitted to the SINR CCDF.

    With mode='table' the empirical CCDF (ccdf_db / ccdf_p) is interpolated instead.
    """

    a: float
    b: float
    gamma_lo_db: float
    gamma_hi_db: float
    n_samples: int
    seed: int
    ccdf_db: tuple = field(default=(), repr=False)
    ccdf_p: tuple = field(default=(), repr=False)
    mode: str = "exp"

    def __call__(self, sinr_db):
        g = np.asarray(sinr_db, dtype=float)
        if self.mode == "table":
            out = np.interp(g, self.ccdf_db, self.ccdf_p, left=1.0, right=0.0)
        else:
            with np.errstate(over="ignore"):
                out = np.clip(np.exp(self.a * g + self.b), 0.0, 1.0)
        return out if out.ndim else float(out)

    def with_mode(self, mode: str) -> CalibrationCurve:
        if mode not in ("exp", "table"):
            raise ValueError(f"unknown mapping mode {mode!r}")
        return CalibrationCurve(**{**asdict(self), "mode": mode})

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        d = asdict(self)
        d["ccdf_db"], d["ccdf_p"] = list(self.ccdf_db), list(self.ccdf_p)
        path.write_text(json.dumps(d, indent=1) + "\n")
        return path

    @classmethod
    def load(cls, path) -> CalibrationCurve:
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except OSError as e:
            raise OSError(f"cannot read calibration file {path}: {e}") from e
        d["ccdf_db"], d["ccdf_p"] = tuple(d["ccdf_db"]), tuple(d["ccdf_p"])
        return cls(**d)


def sample_cluster_sinr_db(topo: Topology, u: float, drops: int, rng: np.random.Generator) -> np.ndarray:
    out = []
    for _ in range(drops):
        s = sinr_cells(topo, drop_users(topo, u, rng), topo.cluster_ids)
        out.append(s[np.isfinite(s)])
    return to_db(np.concatenate(out)) if out else np.empty(0)


def empirical_ccdf(samples_db: np.ndarray):
    """(sorted SINR in dB, P(SINR > value)) pairs."""
    x = np.sort(samples_db)
    p = 1.0 - np.arange(1, x.size + 1) / x.size
    return x, p


def fit_ccdf(samples_db: np.ndarray, seed: int = 0, p_lo: float = 0.01, p_hi: float = 0.99,
             table_points: int = 201) -> CalibrationCurve:
    if samples_db.size < 1000:
        raise ValueError(f"need at least 1000 SINR samples, got {samples_db.size}")
    x, p = empirical_ccdf(samples_db)
    sel = (p >= p_lo) & (p <= p_hi)
    a, b = np.polyfit(x[sel], np.log(p[sel]), 1)
    q = np.linspace(0, 1, table_points)
    tab_db = np.quantile(samples_db, q)
    tab_p = 1.0 - q
    return CalibrationCurve(float(a), float(b), float(x[sel][0]), float(x[sel][-1]),
                            int(samples_db.size), int(seed),
                            tuple(map(float, tab_db)), tuple(map(float, tab_p)))


def calibrate(drops: int = 20_000, seed: int = 0, N: int = 7, alpha: float = 3.0,
              gamma_db: float = 20.0, s: float = 0.1, u: float = 1.0) -> CalibrationCurve:
    """Fit the eps0 mapping on cluster SINRs simulated at the given (default) parameters."""
    topo = build_topology(N, alpha, gamma_db, s)
    samples = sample_cluster_sinr_db(topo, u, drops, np.random.default_rng(seed))
    return fit_ccdf(samples, seed)


@dataclass(frozen=True)
class ClusterSnapshot:
    """eps0 per cluster cell, in cluster order; NaN marks an empty cell."""

    eps0: np.ndarray

    @property
    def occupied(self) -> np.ndarray:
        return np.isfinite(self.eps0)

    def __len__(self):
        return len(self.eps0)


def snapshot(topo: Topology, drop: Drop, curve: CalibrationCurve) -> ClusterSnapshot:
    g = sinr_cells(topo, drop, topo.cluster_ids)
    eps = np.full(g.shape, EMPTY)
    ok = np.isfinite(g)
    eps[ok] = curve(to_db(g[ok]))
    return ClusterSnapshot(eps)


def default_calibration_path() -> Path:
    return Path(__file__).parent / "data" / "calibration.json"


def default_calibration() -> CalibrationCurve:
    return CalibrationCurve.load(default_calibration_path())
