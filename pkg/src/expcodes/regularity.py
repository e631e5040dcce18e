"""Cut-norm oracles, weak regularity decompositions and regular function families.

A subgraph H of G is approximated by a short sum of weighted cut matrices
``c_i · 1_{S_i} 1_{T_i}^T`` restricted to the edges of G. The loop keeps asking
a cut-norm oracle for a set pair on which the residual is still large and
subtracts a cut of weight ``alpha·gamma`` there; the squared edge-measure norm
of the residual drops by at least ``(alpha·gamma)²`` each time.

The left sets of the decomposition, together with the full set, form a
function family that is (eta, gamma)-regular for H: two left sets with nearly
equal correlations against every member see nearly the same number of H-edges
into every right set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .expander import BipartiteGraph, Subgraph, as_mask

__all__ = [
    "ENUMERATION_SIDE_CAP",
    "MaskedMatrix",
    "CutWitness",
    "CutNormOracle",
    "exact_oracle",
    "heuristic_oracle",
    "cut_norm_exact",
    "cut_norm_heuristic",
    "DecompositionError",
    "RegularityDecomposition",
    "regularity_decompose",
    "residual_cut_value",
    "FunctionFamily",
    "regular_family",
    "row_partition_family",
    "family_union",
    "regularity_threshold",
    "audit_regular_family",
    "RegularityAudit",
    "dump_decomposition",
]

ENUMERATION_SIDE_CAP = 22  # subset enumeration up to 2^22 left sets
MILP_SIDE_CAP = 64


@dataclass(frozen=True, eq=False)
class MaskedMatrix:
    """A real matrix supported on E(G), stored as one value per edge."""

    graph: BipartiteGraph
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.graph.num_edges,):
            raise ValueError("need one value per edge of G")
        object.__setattr__(self, "values", v)

    @classmethod
    def of_subgraph(cls, H: Subgraph) -> "MaskedMatrix":
        return cls(H.parent, H.mask.astype(float))

    def dense(self) -> np.ndarray:
        g = self.graph
        out = np.zeros((g.n, g.n))
        np.add.at(out, (g.edge_left, g.edge_right), self.values)
        return out

    def bilinear(self, S, T) -> float:
        g = self.graph
        s = as_mask(S, g.n)
        t = as_mask(T, g.n)
        return float(self.values[s[g.edge_left] & t[g.edge_right]].sum())

    def norm_sq(self) -> float:
        """‖M‖² under the uniform measure on E(G)."""
        return float(np.dot(self.values, self.values) / self.graph.num_edges)


@dataclass(frozen=True)
class CutWitness:
    S: tuple[int, ...]
    T: tuple[int, ...]
    value: float  # 1_S^T M 1_T

    def masks(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        return as_mask(list(self.S), n), as_mask(list(self.T), n)


def _witness(dense: np.ndarray, s_mask: np.ndarray, sign: float) -> CutWitness:
    col = s_mask.astype(float) @ dense
    t_mask = col * sign > 0
    value = float(col[t_mask].sum())
    return CutWitness(tuple(np.flatnonzero(s_mask).tolist()), tuple(np.flatnonzero(t_mask).tolist()), value)


@lru_cache(maxsize=8)
def _subset_bits(n: int, start: int, stop: int) -> np.ndarray:
    ids = np.arange(start, stop, dtype=np.int64)
    bits = ((ids[:, None] >> np.arange(n)) & 1).astype(float)
    bits.setflags(write=False)
    return bits


def _exact_by_enumeration(dense: np.ndarray) -> CutWitness:
    n = dense.shape[0]
    total = 1 << n
    chunk = 1 << 16
    best_val, best_id, best_sign = -1.0, 0, 1.0
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        col = _subset_bits(n, start, stop) @ dense
        pos = np.where(col > 0, col, 0.0).sum(axis=1)
        neg = -np.where(col < 0, col, 0.0).sum(axis=1)
        ip, ineg = int(np.argmax(pos)), int(np.argmax(neg))
        for val, idx, sign in ((pos[ip], ip, 1.0), (neg[ineg], ineg, -1.0)):
            if val > best_val + 1e-12 or (abs(val - best_val) <= 1e-12 and start + idx < best_id):
                best_val, best_id, best_sign = float(val), start + idx, sign
    s_mask = ((best_id >> np.arange(n)) & 1).astype(bool)
    return _witness(dense, s_mask, best_sign)


def _milp_improve(M: MaskedMatrix, sign: float, floor: float) -> CutWitness | None:
    """Best witness of sign·1_S^T M 1_T exceeding ``floor``, or None if there is none.

    Variables: x (left indicator, binary), z (right indicator) and one y per
    nonzero edge standing for x_l·z_r. For a fixed integral x the objective is
    linear in each z_r, so z may stay continuous.
    """
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_matrix

    g = M.graph
    n = g.n
    w = sign * M.values
    edges = np.flatnonzero(w != 0)
    m = edges.size
    if m == 0:
        return None
    nv = 2 * n + m
    c = np.zeros(nv)
    c[2 * n :] = -w[edges]
    rows, cols, vals, ub = [], [], [], []
    r = 0
    for t, e in enumerate(edges):
        yv, xv, zv = 2 * n + t, int(g.edge_left[e]), n + int(g.edge_right[e])
        if w[e] > 0:  # y ≤ x, y ≤ z
            rows += [r, r, r + 1, r + 1]
            cols += [yv, xv, yv, zv]
            vals += [1, -1, 1, -1]
            ub += [0, 0]
            r += 2
        else:  # y ≥ x + z − 1
            rows += [r, r, r]
            cols += [xv, zv, yv]
            vals += [1, 1, -1]
            ub += [1]
            r += 1
    A = coo_matrix((vals, (rows, cols)), shape=(r, nv)).tocsr()
    constraints = [
        LinearConstraint(A, -np.inf, np.array(ub, dtype=float)),
        LinearConstraint(c[None, :], -np.inf, -(floor + 1e-7)),
    ]
    integrality = np.r_[np.ones(n), np.zeros(n + m)]
    res = milp(c, constraints=constraints, integrality=integrality, bounds=Bounds(0, 1),
               options={"mip_rel_gap": 0.0})
    if res.x is None:
        if res.status == 2:  # infeasible: nothing beats the floor
            return None
        raise RuntimeError(f"exact cut-norm MILP failed: {res.message}")
    return _witness(M.dense(), res.x[:n] > 0.5, sign)


def _exact_by_milp(M: MaskedMatrix) -> CutWitness:
    """Exact optimum, seeded with the local-search witness as a lower bound."""
    best = cut_norm_heuristic(M, seed=0, restarts=16)
    for sign in (1.0, -1.0):
        better = _milp_improve(M, sign, abs(best.value))
        if better is not None and abs(better.value) > abs(best.value):
            best = better
    return best


def cut_norm_exact(M: MaskedMatrix) -> CutWitness:
    """The set pair maximising |1_S^T M 1_T|.

    Up to ``ENUMERATION_SIDE_CAP`` left vertices every S is scanned, with the
    best T read off the column-sum signs. Wider matrices (up to 64) are solved
    exactly as a mixed-integer program.
    """
    n = M.graph.n
    if n <= ENUMERATION_SIDE_CAP:
        return _exact_by_enumeration(M.dense())
    if n <= MILP_SIDE_CAP:
        return _exact_by_milp(M)
    raise ValueError(f"exact oracle infeasible for |L| = {n}")


def _local_search(dense: np.ndarray, s_mask: np.ndarray, sign: float) -> tuple[float, np.ndarray, np.ndarray]:
    best = -math.inf
    t_mask = np.zeros(dense.shape[1], dtype=bool)
    while True:
        col = sign * (s_mask.astype(float) @ dense)
        t_mask = col > 0
        row = sign * (dense @ t_mask.astype(float))
        s_new = row > 0
        val = float(row[s_new].sum())
        if val <= best + 1e-12:
            return best, s_mask, t_mask
        best, s_mask = val, s_new


def cut_norm_heuristic(M: MaskedMatrix, seed: int = 0, restarts: int = 16) -> CutWitness:
    """Alternating local search started from the sign pattern of the top singular vectors."""
    dense = M.dense()
    n = dense.shape[0]
    if not np.any(dense):
        return CutWitness((), (), 0.0)
    rng = np.random.default_rng(seed)
    u = np.linalg.svd(dense)[0][:, 0]
    starts = [u > 0, u < 0]
    starts += [rng.random(n) < 0.5 for _ in range(max(0, restarts - 1))]
    best_val, best_s, best_sign = -1.0, starts[0], 1.0
    for s0 in starts:
        for sign in (1.0, -1.0):
            val, s_mask, _ = _local_search(dense, s0, sign)
            if val > best_val + 1e-12:
                best_val, best_s, best_sign = val, s_mask, sign
    return _witness(dense, best_s, best_sign)


@dataclass(frozen=True)
class CutNormOracle:
    """A cut-norm routine together with its declared approximation factor."""

    name: str
    alpha: float
    run: Callable[[MaskedMatrix], CutWitness] = field(compare=False, repr=False)

    def __call__(self, M: MaskedMatrix) -> CutWitness:
        return self.run(M)


def exact_oracle() -> CutNormOracle:
    return CutNormOracle("exact", 1.0, cut_norm_exact)


def heuristic_oracle(alpha: float = 0.03, seed: int = 0, restarts: int = 16) -> CutNormOracle:
    return CutNormOracle(
        f"heuristic(restarts={restarts},seed={seed})",
        alpha,
        lambda M: cut_norm_heuristic(M, seed=seed, restarts=restarts),
    )


@dataclass(frozen=True)
class RegularityDecomposition:
    triples: tuple[tuple[float, tuple[int, ...], tuple[int, ...]], ...]
    gamma: float
    alpha: float
    potentials: tuple[float, ...]  # ‖M_j‖² after each step, starting with M_0
    final_witness: CutWitness | None = None

    @property
    def p(self) -> int:
        return len(self.triples)

    @property
    def coefficient_mass(self) -> float:
        return float(sum(abs(c) for c, _, _ in self.triples))


class DecompositionError(RuntimeError):
    def __init__(self, message: str, partial: RegularityDecomposition):
        super().__init__(message)
        self.partial = partial


def regularity_decompose(
    H: Subgraph,
    gamma: float,
    oracle: CutNormOracle | None = None,
    max_iters: int | None = None,
) -> RegularityDecomposition:
    """Greedy cut decomposition of H until the oracle certifies a small residual."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    oracle = oracle or exact_oracle()
    G = H.parent
    alpha = oracle.alpha
    step = alpha * gamma
    if max_iters is None:
        max_iters = math.ceil(2 / step**2)
    num_e = G.num_edges
    threshold = step * num_e
    values = H.mask.astype(float)
    potentials = [float(values @ values) / num_e]
    triples: list[tuple[float, tuple[int, ...], tuple[int, ...]]] = []
    while True:
        w = oracle(MaskedMatrix(G, values))
        if abs(w.value) <= threshold * (1 + 1e-12):
            return RegularityDecomposition(tuple(triples), gamma, alpha, tuple(potentials), w)
        if len(triples) >= max_iters:
            partial = RegularityDecomposition(tuple(triples), gamma, alpha, tuple(potentials), w)
            raise DecompositionError(f"no convergence within {max_iters} steps (oracle {oracle.name})", partial)
        c = math.copysign(step, w.value)
        s, t = w.masks(G.n)
        values[s[G.edge_left] & t[G.edge_right]] -= c
        triples.append((c, w.S, w.T))
        potentials.append(float(values @ values) / num_e)


def residual_cut_value(H: Subgraph, D: RegularityDecomposition, S, T) -> float:
    """E_H(S,T) − Σ c_i E_G(S_i ∩ S, T_i ∩ T)."""
    G = H.parent
    s = as_mask(S, G.n)
    t = as_mask(T, G.n)
    inside = s[G.edge_left] & t[G.edge_right]
    total = float((inside & H.mask).sum())
    for c, Si, Ti in D.triples:
        si = as_mask(list(Si), G.n)
        ti = as_mask(list(Ti), G.n)
        total -= c * float((inside & si[G.edge_left] & ti[G.edge_right]).sum())
    return total


# ---------------------------------------------------------------------------
# function families


@dataclass(frozen=True, eq=False)
class FunctionFamily:
    """Indicator functions on a ground set of size n; row 0 is always the full set."""

    n: int
    indicators: np.ndarray  # m×n bool

    @classmethod
    def from_sets(cls, n: int, sets: Iterable[Iterable[int] | np.ndarray]) -> "FunctionFamily":
        rows = [np.ones(n, dtype=bool)] + [as_mask(s if isinstance(s, np.ndarray) else list(s), n) for s in sets]
        seen: set[bytes] = set()
        kept = []
        for r in rows:
            key = np.packbits(r).tobytes()
            if key not in seen:
                seen.add(key)
                kept.append(r)
        ind = np.array(kept, dtype=bool)
        ind.setflags(write=False)
        return cls(n, ind)

    def __len__(self) -> int:
        return int(self.indicators.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FunctionFamily):
            return NotImplemented
        return self.n == other.n and {r.tobytes() for r in self.indicators} == {
            r.tobytes() for r in other.indicators
        }

    def __hash__(self) -> int:
        return hash((self.n, frozenset(r.tobytes() for r in self.indicators)))

    def sets(self) -> list[tuple[int, ...]]:
        return [tuple(np.flatnonzero(r).tolist()) for r in self.indicators]


def family_union(*families: FunctionFamily) -> FunctionFamily:
    if not families:
        raise ValueError("need at least one family")
    n = families[0].n
    if any(f.n != n for f in families):
        raise ValueError("ground-set mismatch")
    return FunctionFamily.from_sets(n, [r for f in families for r in f.indicators])


def regular_family(
    H: Subgraph, gamma: float, oracle: CutNormOracle | None = None
) -> tuple[FunctionFamily, float]:
    """Left sets of a gamma/4 decomposition plus the full set, and the matching eta."""
    oracle = oracle or exact_oracle()
    D = regularity_decompose(H, gamma / 4, oracle)
    fam = FunctionFamily.from_sets(H.parent.n, [S for _, S, _ in D.triples])
    return fam, oracle.alpha * gamma**2 / 16


def row_partition_family(graphs: Iterable[Subgraph]) -> FunctionFamily:
    """Classes of left vertices whose rows agree in every graph, plus the full set.

    If 1_S − 1_S' sums to zero on every class then S and S' have identical
    edge counts into every right set of every graph, so this family is
    (eta, gamma)-regular for all of them whenever eta < 1/n, for any gamma ≥ 0.
    Used when gamma·nd < 1, where a decomposition would have to be exact.
    """
    graphs = list(graphs)
    if not graphs:
        raise ValueError("need at least one graph")
    n = graphs[0].parent.n
    rows = np.concatenate([H.biadjacency for H in graphs], axis=1)
    _, cls = np.unique(rows, axis=0, return_inverse=True)
    cls = cls.ravel()
    return FunctionFamily.from_sets(n, [cls == c for c in range(int(cls.max()) + 1)])


# ---------------------------------------------------------------------------
# regularity audits


@lru_cache(maxsize=8)
def _ternary_vectors(n: int) -> np.ndarray:
    v = np.array(list(itertools.product((-1, 0, 1), repeat=n)), dtype=float)
    v.setflags(write=False)
    return v


def regularity_threshold(family: FunctionFamily, H: Subgraph, gamma: float, side_cap: int = 12) -> float:
    """Supremum of the eta for which ``family`` is (eta, gamma)-regular for H.

    Whether a pair (S, S') violates regularity and how far apart it is in
    family distance both depend only on u = 1_S − 1_S', so scanning all of
    {−1,0,1}^n is exhaustive. The family is (eta, gamma)-regular exactly when
    eta is strictly below the returned value (``inf`` when nothing violates).
    """
    n = H.parent.n
    if n > side_cap:
        raise ValueError(f"exhaustive regularity scan infeasible for n = {n}")
    A = H.biadjacency.astype(float)
    limit = gamma * H.parent.num_edges
    F = family.indicators.astype(float)
    best = math.inf
    U = _ternary_vectors(n)
    for chunk in np.array_split(U, max(1, U.shape[0] // 65536)):
        cols = chunk @ A
        spread = np.maximum(np.where(cols > 0, cols, 0).sum(1), -np.where(cols < 0, cols, 0).sum(1))
        bad = spread > limit + 1e-9
        if bad.any():
            dist = np.abs(chunk[bad] @ F.T).max(axis=1) / n
            best = min(best, float(dist.min()))
    return best


@dataclass(frozen=True)
class RegularityAudit:
    trials: int
    violations: int
    max_excess: float  # max of |E_H(S,T) − E_H(S',T)| − gamma·nd over sampled pairs


def audit_regular_family(
    family: FunctionFamily, H: Subgraph, eta: float, gamma: float, trials: int, seed: int
) -> RegularityAudit:
    """Sampled check of the regularity definition.

    S' is obtained from S by swapping members with non-members inside one
    atom of the factor generated by the family, so S and S' have identical
    correlations with every family member (family distance 0 ≤ eta). T is the
    worst right set for the pair.
    """
    n = family.n
    rng = np.random.default_rng(seed)
    weights = 1 << np.arange(len(family), dtype=np.int64)
    atom_of = (family.indicators.T.astype(np.int64) * weights).sum(1)
    A = H.biadjacency.astype(float)
    limit = gamma * H.parent.num_edges
    violations = 0
    worst = -math.inf
    for _ in range(trials):
        s = rng.random(n) < rng.random()
        s2 = s.copy()
        for atom in np.unique(atom_of):
            members = np.flatnonzero(atom_of == atom)
            inside = members[s[members]]
            outside = members[~s[members]]
            m = int(rng.integers(0, min(inside.size, outside.size) + 1))
            if m:
                s2[rng.choice(inside, m, replace=False)] = False
                s2[rng.choice(outside, m, replace=False)] = True
        dist = float(np.abs(family.indicators.astype(float) @ (s.astype(float) - s2)).max() / n)
        if dist > eta + 1e-12:
            continue
        cols = (s.astype(float) - s2) @ A
        spread = max(cols[cols > 0].sum(), -cols[cols < 0].sum())
        excess = spread - limit
        worst = max(worst, excess)
        violations += int(excess > 1e-9)
    return RegularityAudit(trials, violations, worst)


def dump_decomposition(D: RegularityDecomposition) -> str:
    """One line ``c |S| |T|`` per triple, then the two index sets on their own lines."""
    out: list[str] = []
    for c, S, T in D.triples:
        out.append(f"{c:.17g} {len(S)} {len(T)}")
        out.append(" ".join(map(str, S)))
        out.append(" ".join(map(str, T)))
    return "\n".join(out) + ("\n" if out else "")
