"""Regular bipartite graphs, edge indexing, spectral expansion and the mixing lemma."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

__all__ = [
    "BipartiteGraph",
    "Subgraph",
    "SpectralProfile",
    "MixingReport",
    "as_mask",
    "complete_bipartite",
    "random_biregular",
    "measure_lambda",
    "edges_between",
    "mixing_audit",
    "save_graph",
    "load_graph",
]

MATCHING_ATTEMPTS = 1000


def as_mask(S: Iterable[int] | np.ndarray | None, n: int) -> np.ndarray:
    """Boolean indicator of a vertex set given as a mask or as indices."""
    if S is None:
        return np.zeros(n, dtype=bool)
    arr = np.asarray(S)
    if arr.dtype == bool:
        if arr.shape != (n,):
            raise ValueError(f"mask of shape {arr.shape}, expected ({n},)")
        return arr
    mask = np.zeros(n, dtype=bool)
    if arr.size:
        idx = arr.astype(np.int64).ravel()
        if idx.min() < 0 or idx.max() >= n:
            raise ValueError("vertex index out of range")
        mask[idx] = True
    return mask


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """A d-regular bipartite graph on L = R = {0..n-1}.

    Edge e is the ``slot``-th edge of left vertex ``e // d``; left adjacency
    rows are sorted, so edges are ordered lexicographically by (left, right).
    On the right, the edges of r are ordered by edge index, i.e. by left endpoint.
    """

    n: int
    d: int
    left_adj: np.ndarray  # n×d, sorted rows

    def __post_init__(self) -> None:
        adj = np.array(self.left_adj, dtype=np.int64)
        if adj.shape != (self.n, self.d):
            raise ValueError(f"adjacency shape {adj.shape} != ({self.n}, {self.d})")
        adj.sort(axis=1)
        if np.any(adj < 0) or np.any(adj >= self.n):
            raise ValueError("right neighbour out of range")
        if np.any(np.bincount(adj.ravel(), minlength=self.n) != self.d):
            raise ValueError("right side is not d-regular")
        adj.setflags(write=False)
        object.__setattr__(self, "left_adj", adj)

    @property
    def num_edges(self) -> int:
        return self.n * self.d

    @property
    def is_simple(self) -> bool:
        return bool(np.all(np.diff(self.left_adj, axis=1) > 0)) if self.d > 1 else True

    @cached_property
    def edge_left(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), self.d)

    @cached_property
    def edge_right(self) -> np.ndarray:
        return self.left_adj.ravel()

    @cached_property
    def right_edges(self) -> np.ndarray:
        """n×d table: row r lists the edges at r in increasing edge index."""
        order = np.argsort(self.edge_right, kind="stable")
        return order.reshape(self.n, self.d)

    @cached_property
    def edge_right_slot(self) -> np.ndarray:
        slot = np.empty(self.num_edges, dtype=np.int64)
        slot[self.right_edges.ravel()] = np.tile(np.arange(self.d), self.n)
        return slot

    def edge_at_left(self, left: int, slot: int) -> int:
        return left * self.d + slot

    def edge_at_right(self, right: int, slot: int) -> int:
        return int(self.right_edges[right, slot])

    def endpoint_left(self, e: int) -> int:
        return e // self.d

    def slot_left(self, e: int) -> int:
        return e % self.d

    def endpoint_right(self, e: int) -> int:
        return int(self.edge_right[e])

    def slot_right(self, e: int) -> int:
        return int(self.edge_right_slot[e])

    @cached_property
    def biadjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        np.add.at(a, (self.edge_left, self.edge_right), 1)
        return a

    @cached_property
    def spectrum(self) -> "SpectralProfile":
        return measure_lambda(self)

    def full(self) -> "Subgraph":
        return Subgraph(self, np.ones(self.num_edges, dtype=bool))


@dataclass(frozen=True, eq=False)
class Subgraph:
    """A spanning subgraph H ⊆ G kept as one bit per edge of G."""

    parent: BipartiteGraph
    mask: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mask, dtype=bool).copy()
        if m.shape != (self.parent.num_edges,):
            raise ValueError("mask length must equal n·d")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @property
    def num_edges(self) -> int:
        return int(self.mask.sum())

    @cached_property
    def biadjacency(self) -> np.ndarray:
        g = self.parent
        a = np.zeros((g.n, g.n), dtype=np.int64)
        np.add.at(a, (g.edge_left[self.mask], g.edge_right[self.mask]), 1)
        return a


@dataclass(frozen=True)
class SpectralProfile:
    sigma1: float
    sigma2: float
    lam: float


def complete_bipartite(n: int) -> BipartiteGraph:
    return BipartiteGraph(n, n, np.tile(np.arange(n), (n, 1)))


def random_biregular(n: int, d: int, seed: int) -> BipartiteGraph:
    """Union of d random perfect matchings with no repeated edge.

    Rejecting whole samples succeeds with probability about exp(-(d-1)²/2),
    so repeated edges are instead removed by switchings: a matching that
    sends ℓ to an already used neighbour exchanges the images of ℓ and a
    random ℓ' whenever that clears the repeat without creating a new one.
    Each round of d fresh matchings gets n·d·50 switch attempts; after
    ``MATCHING_ATTEMPTS`` rounds the generator gives up.
    For d = n the only simple graph is K_{n,n}, returned directly. For
    d > n/2 switchings stall, so the complement of a random (n, n−d) graph
    is returned instead; it is simple and d-regular as well.
    """
    if not (1 <= d <= n):
        raise ValueError("need 1 ≤ d ≤ n")
    if d == n:
        return complete_bipartite(n)
    if 2 * d > n:
        present = random_biregular(n, n - d, seed).biadjacency.astype(bool)
        return BipartiteGraph(n, d, np.array([np.flatnonzero(~row) for row in present]))
    rng = np.random.default_rng(seed)
    for _ in range(MATCHING_ATTEMPTS):
        perms = np.stack([rng.permutation(n) for _ in range(d)], axis=1)  # n×d
        for _ in range(50 * n * d):
            repeated = (perms[:, :, None] == perms[:, None, :]).sum(axis=2) > 1
            if not repeated.any():
                return BipartiteGraph(n, d, perms)
            bad = np.argwhere(repeated)
            l, m = (int(x) for x in bad[int(rng.integers(len(bad)))])
            other = int(rng.integers(n))
            a, b = perms[l, m], perms[other, m]
            row_l = np.delete(perms[l], m)
            row_o = np.delete(perms[other], m)
            if other != l and b not in row_l and a not in row_o:
                perms[l, m], perms[other, m] = b, a
    raise RuntimeError(f"no simple ({n},{d}) graph after {MATCHING_ATTEMPTS} rounds")


def measure_lambda(G: BipartiteGraph, tol: float = 1e-9, seed: int = 0) -> SpectralProfile:
    """Second singular value by power iteration on AᵀA restricted to 1^⊥.

    The all-ones vectors are the top singular pair of a regular graph with
    singular value d, so projecting them out leaves σ₂² as the top eigenvalue.
    """
    a = G.biadjacency.astype(float)
    n, d = G.n, G.d
    sigma1 = float(np.linalg.norm(a @ np.ones(n)) / math.sqrt(n))
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x -= x.mean()
    est = 0.0
    max_iters = 10 * n * d
    for _ in range(max_iters):
        norm = np.linalg.norm(x)
        if norm < 1e-300:
            est = 0.0
            break
        x /= norm
        y = a.T @ (a @ x)
        y -= y.mean()
        new = float(x @ y)
        x = y
        if abs(new - est) <= tol * max(abs(new), 1e-300):
            est = new
            break
        est = new
    sigma2 = math.sqrt(max(est, 0.0))
    if sigma2 < 1e-7 * max(d, 1):
        sigma2 = 0.0
    return SpectralProfile(sigma1, sigma2, min(sigma2 / d, 1.0))


def edges_between(G: BipartiteGraph | Subgraph, S, T) -> int:
    """Number of (kept) edges with left endpoint in S and right endpoint in T."""
    graph = G.parent if isinstance(G, Subgraph) else G
    s = as_mask(S, graph.n)
    t = as_mask(T, graph.n)
    hit = s[graph.edge_left] & t[graph.edge_right]
    if isinstance(G, Subgraph):
        hit &= G.mask
    return int(hit.sum())


@dataclass(frozen=True)
class MixingReport:
    trials: int
    violations: int
    max_excess: float  # max of deviation − λd√(|S||T|); ≤ 0 means no violation

    @property
    def ok(self) -> bool:
        return self.violations == 0


def mixing_audit(G: BipartiteGraph, lam: float, trials: int, seed: int, slack: float = 1e-9) -> MixingReport:
    """Check |E(S,T) − (d/n)|S||T|| ≤ λd√(|S||T|) on random set pairs."""
    rng = np.random.default_rng(seed)
    a = G.biadjacency.astype(float)
    n, d = G.n, G.d
    violations = 0
    worst = -math.inf
    done = 0
    while done < trials:
        m = min(4096, trials - done)
        ps = rng.random((m, 1))
        pt = rng.random((m, 1))
        S = (rng.random((m, n)) < ps).astype(float)
        T = (rng.random((m, n)) < pt).astype(float)
        e = np.einsum("ij,jk,ik->i", S, a, T)
        s_sz, t_sz = S.sum(1), T.sum(1)
        excess = np.abs(e - d / n * s_sz * t_sz) - lam * d * np.sqrt(s_sz * t_sz)
        violations += int((excess > slack * max(1.0, n * d)).sum())
        worst = max(worst, float(excess.max()))
        done += m
    return MixingReport(trials, violations, worst if trials else 0.0)


def save_graph(G: BipartiteGraph, path: str | Path) -> None:
    lines = [f"{G.n} {G.d}"]
    for e in range(G.num_edges):
        lines.append(f"{G.endpoint_left(e)} {G.slot_left(e)} {G.endpoint_right(e)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_graph(path: str | Path) -> BipartiteGraph:
    rows = [ln.split() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise ValueError(f"{path}: header must be 'n d'")
    n, d = (int(x) for x in rows[0])
    body = rows[1:]
    if len(body) != n * d:
        raise ValueError(f"{path}: expected {n * d} edge lines, found {len(body)}")
    adj = np.full((n, d), -1, dtype=np.int64)
    for e, row in enumerate(body):
        left, slot, right = (int(x) for x in row)
        if left != e // d or slot != e % d:
            raise ValueError(f"{path}: edge line {e} out of order")
        adj[left, slot] = right
    if np.any(np.diff(adj, axis=1) < 0):
        raise ValueError(f"{path}: left slots must list neighbours in increasing order")
    return BipartiteGraph(n, d, adj)
