"""Finite-length peeling decoder for the erasure channel and configuration-model graph sampling."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .ensemble import DegreeDistribution

ERASED = -1


@dataclass(frozen=True)
class ParityCheckMatrix:
    rows: tuple[frozenset[int], ...]
    n: int

    def __post_init__(self):
        rows = tuple(frozenset(int(c) for c in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        for r in rows:
            if not r:
                raise ValueError("empty parity check")
            if max(r) >= self.n or min(r) < 0:
                raise ValueError(f"column index out of range for n={self.n}")

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def k(self) -> int:
        """Message length assuming H is full rank."""
        return self.n - self.m

    @cached_property
    def csr(self) -> sp.csr_matrix:
        indptr = np.cumsum([0] + [len(r) for r in self.rows])
        indices = np.fromiter((c for r in self.rows for c in sorted(r)), np.int64, indptr[-1])
        data = np.ones(indices.size, dtype=np.int64)
        return sp.csr_matrix((data, indices, indptr), shape=(self.m, self.n))

    def __hash__(self):
        return hash((self.rows, self.n))

    @classmethod
    def from_dense(cls, H) -> ParityCheckMatrix:
        H = np.asarray(H)
        return cls(tuple(frozenset(np.flatnonzero(row).tolist()) for row in H), H.shape[1])


@dataclass
class PeelResult:
    word: np.ndarray
    passes: int
    success: bool


def as_word(symbols: Sequence) -> np.ndarray:
    """Received word as int8 array; None (or ERASED) marks an erasure."""
    return np.array([ERASED if s is None else int(s) for s in symbols], dtype=np.int8)


def peel(H: ParityCheckMatrix, word) -> PeelResult:
    """Flooding peeling decoder.

    Each pass, every check with exactly one erased participant fills it with the
    parity of its known participants. Stops when nothing is erased or a pass
    makes no correction. `passes` counts passes that made corrections.
    """
    word = np.array(word, dtype=np.int8)
    if word.shape != (H.n,):
        raise ValueError(f"word has length {word.size}, H expects {H.n}")
    A = H.csr
    idx = np.arange(H.n, dtype=np.int64)
    passes = 0
    erased = word == ERASED
    while erased.any():
        n_erased = A @ erased.astype(np.int64)
        solvable = n_erased == 1
        if not solvable.any():
            break
        known = np.where(erased, 0, word).astype(np.int64)
        parity = (A[solvable] @ known) % 2
        target = A[solvable] @ np.where(erased, idx, 0)  # the single erased column
        word[target] = parity
        erased = word == ERASED
        passes += 1
    return PeelResult(word, passes, not erased.any())


def _node_counts(fracs: dict[int, float], total: int) -> dict[int, int]:
    # largest-remainder rounding of node-perspective counts to sum to `total`
    degs = np.array(sorted(fracs))
    node = np.array([fracs[d] / d for d in degs])
    node = node / node.sum() * total
    counts = np.floor(node).astype(int)
    short = total - counts.sum()
    counts[np.argsort(-(node - counts), kind="stable")[:short]] += 1
    return {int(d): int(c) for d, c in zip(degs, counts) if c > 0}


def sample_graph(dist: DegreeDistribution, n: int, rng: np.random.Generator,
                 repair_passes: int = 20) -> ParityCheckMatrix:
    """Random Tanner graph from the configuration model.

    Variable-node counts follow lambda (node perspective, rounded). The check side
    must absorb exactly the same number of edges; for a check-regular code a few
    degree bumps on the smallest variable degree fix divisibility, otherwise an
    unbalanced rounding raises.
    """
    var_counts = _node_counts(dict(dist.lambda_coeffs), n)
    var_deg = np.repeat(list(var_counts), list(var_counts.values()))
    edges = int(var_deg.sum())
    if dist.is_check_regular:
        dc = dist.d_c
        bump = (-edges) % dc
        if bump:
            low = np.flatnonzero(var_deg == var_deg.min())[:bump]
            if low.size < bump or var_deg.min() + 1 > dist.d_max:
                raise ValueError("cannot balance edge counts")
            var_deg[low] += 1
            edges += bump
        chk_deg = np.full(edges // dc, dc)
    else:
        m_est = edges * sum(r / d for d, r in dist.rho_coeffs.items())
        counts = _node_counts(dict(dist.rho_coeffs), int(round(m_est)))
        chk_deg = np.repeat(list(counts), list(counts.values()))
        if chk_deg.sum() != edges:
            raise ValueError(f"edge counts do not balance: {edges} variable vs {chk_deg.sum()} check sockets")

    var_sock = np.repeat(np.arange(n), var_deg)
    chk_sock = np.repeat(np.arange(chk_deg.size), chk_deg)
    var_sock = rng.permutation(var_sock)
    for _ in range(repair_passes):
        key = chk_sock.astype(np.int64) * n + var_sock
        order = np.argsort(key, kind="stable")
        dup = np.zeros(edges, dtype=bool)
        dup[order[1:]] = key[order[1:]] == key[order[:-1]]
        bad = np.flatnonzero(dup)
        if bad.size == 0:
            break
        partners = rng.integers(0, edges, size=bad.size)
        for a, b in zip(bad, partners):
            var_sock[a], var_sock[b] = var_sock[b], var_sock[a]

    rows = [set() for _ in range(chk_deg.size)]
    for c, v in zip(chk_sock.tolist(), var_sock.tolist()):
        rows[c].add(v)
    return ParityCheckMatrix(tuple(frozenset(r) for r in rows), n)


def erasure_trial(H: ParityCheckMatrix, eps0: float, rng: np.random.Generator) -> PeelResult:
    """All-zero codeword through a BEC(eps0), then peel."""
    word = np.zeros(H.n, dtype=np.int8)
    word[rng.random(H.n) < eps0] = ERASED
    return peel(H, word)


def peel_monte_carlo(dist: DegreeDistribution, n: int, eps0: float, trials: int, seed: int,
                     fresh_graph: bool = False):
    """Yield (trial, success, passes). One graph per run unless fresh_graph; one
    child seed per trial spawned from `seed`."""
    ss = np.random.SeedSequence(seed)
    graph_ss, *trial_ss = ss.spawn(trials + 1)
    H = sample_graph(dist, n, np.random.default_rng(graph_ss))
    for t, s in enumerate(trial_ss):
        rng = np.random.default_rng(s)
        if fresh_graph:
            H = sample_graph(dist, n, rng)
        res = erasure_trial(H, eps0, rng)
        yield t, res.success, res.passes
