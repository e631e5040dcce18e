"""Tanner codes on bipartite expanders.

An edge word h ∈ GF(q)^E is a codeword when every left neighbourhood reads a
codeword of ``c1`` and every right neighbourhood reads a codeword of ``c2``.
Neighbourhood words are read in slot order: left slots by edge index, right
slots by left endpoint.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .expander import BipartiteGraph, Subgraph
from .factors import DEFAULT_NET_CAP
from .gf_linear import (
    ERASED,
    LinearCode,
    brute_force_list_decode,
    max_list_size,
    min_distance,
    nearest_indices,
    nullspace,
    radius_to_count,
)
from .netsearch import build_family, candidate_placements
from .regularity import CutNormOracle
from .soundness import ListDecodeResult, certify

__all__ = [
    "MAX_BASIS_EDGES",
    "TannerCode",
    "LeftAssignment",
    "UniqueDecodeResult",
    "tanner_membership",
    "tanner_basis",
    "tanner_distance_bound",
    "unique_decode_errors_erasures",
    "tanner_list_params",
    "local_lists",
    "agreement_graph_tanner",
    "list_decode_tanner",
]

MAX_BASIS_EDGES = 4096


@dataclass(frozen=True, eq=False)
class TannerCode:
    graph: BipartiteGraph
    c1: LinearCode
    c2: LinearCode

    def __post_init__(self) -> None:
        if self.c1.n != self.graph.d or self.c2.n != self.graph.d:
            raise ValueError("base codes must have length d")
        if self.c1.q != self.c2.q:
            raise ValueError("base codes must share a field")

    @property
    def q(self) -> int:
        return self.c1.q

    @property
    def length(self) -> int:
        return self.graph.num_edges

    @cached_property
    def delta1(self) -> Fraction:
        return min_distance(self.c1)

    @cached_property
    def delta2(self) -> Fraction:
        return min_distance(self.c2)

    def left_view(self, h: np.ndarray) -> np.ndarray:
        """n×d: row ℓ is h restricted to N(ℓ)."""
        return np.asarray(h).reshape(self.graph.n, self.graph.d)

    def right_view(self, h: np.ndarray) -> np.ndarray:
        return np.asarray(h)[self.graph.right_edges]

    @cached_property
    def linear_code(self) -> LinearCode:
        basis = tanner_basis(self)
        if basis.shape[0] == 0:
            raise ValueError("the Tanner code is trivial")
        return LinearCode.from_generator(self.c1.field, basis)


def _check_edge_word(T: TannerCode, h) -> np.ndarray:
    h = np.asarray(h, dtype=np.int64)
    if h.shape != (T.length,):
        raise ValueError(f"edge word of length {h.shape}, expected {T.length}")
    return h


def _rows_in_code(code: LinearCode, rows: np.ndarray) -> np.ndarray:
    return ~np.any((rows @ code.parity.T) % code.q, axis=1)


def tanner_membership(T: TannerCode, h) -> bool:
    h = _check_edge_word(T, h)
    if np.any((h < 0) | (h >= T.q)):
        return False
    return bool(_rows_in_code(T.c1, T.left_view(h)).all() and _rows_in_code(T.c2, T.right_view(h)).all())


def tanner_basis(T: TannerCode) -> np.ndarray:
    """Generator rows of the Tanner code as a subspace of GF(q)^E."""
    g, q = T.graph, T.q
    E = g.num_edges
    if E > MAX_BASIS_EDGES:
        raise ValueError(f"nd = {E} exceeds the dense nullspace cap {MAX_BASIS_EDGES}")
    checks = []
    for v in range(g.n):
        for par, edges in ((T.c1.parity, np.arange(v * g.d, (v + 1) * g.d)), (T.c2.parity, g.right_edges[v])):
            block = np.zeros((par.shape[0], E), dtype=np.int64)
            block[:, edges] = par
            checks.append(block)
    H = np.vstack([c for c in checks if c.size]) if any(c.size for c in checks) else np.zeros((0, E), dtype=np.int64)
    return nullspace(H, q, ncols=E)


def tanner_distance_bound(delta1: float, delta2: float, lam: float) -> float:
    root = math.sqrt(float(delta1) * float(delta2))
    return max(0.0, root * (root - float(lam)))


# ---------------------------------------------------------------------------
# errors-and-erasures unique decoding


@dataclass(frozen=True)
class LeftAssignment:
    """Per left vertex a c1 codeword index, or ERASED."""

    code: LinearCode
    indices: np.ndarray

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=np.int64).copy()
        if np.any((idx < ERASED) | (idx >= self.code.size)):
            raise ValueError("assignment entries must be codeword indices or ERASED")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_codeword(cls, T: TannerCode, h) -> "LeftAssignment":
        rows = T.left_view(_check_edge_word(T, h))
        return cls(T.c1, np.array([T.c1.index_of(r) for r in rows]))

    @property
    def erasure_fraction(self) -> float:
        return float(np.mean(self.indices == ERASED))

    def edge_word(self) -> np.ndarray:
        """Edge word with ERASED on the neighbourhoods of erased vertices."""
        cw = self.code.codewords
        out = np.full((self.indices.size, self.code.n), ERASED, dtype=np.int64)
        live = self.indices != ERASED
        out[live] = cw[self.indices[live]]
        return out.ravel()

    def errors_against(self, T: TannerCode, h) -> float:
        """Fraction of left vertices that are not erased and disagree with h."""
        rows = T.left_view(_check_edge_word(T, h))
        live = self.indices != ERASED
        cw = self.code.codewords
        wrong = np.zeros(self.indices.size, dtype=bool)
        wrong[live] = np.any(cw[self.indices[live]] != rows[live], axis=1)
        return float(wrong.mean())


@dataclass(frozen=True)
class UniqueDecodeResult:
    word: np.ndarray | None
    rounds: int
    warning: str | None = None


def _decode_side(code: LinearCode, rows: np.ndarray) -> np.ndarray:
    return code.codewords[nearest_indices(code.codewords, rows)]


def unique_decode_errors_erasures(
    T: TannerCode, g: LeftAssignment, eps: float, lam: float | None = None, check_radius: bool = True
) -> UniqueDecodeResult:
    """Alternate nearest-codeword passes, right side first, until nothing changes.

    With ``check_radius`` the fixpoint is returned only if it is a Tanner
    codeword with 2·(errors) + (erasures) ≤ δ₂ − 4·eps against g; without it any
    Tanner codeword fixpoint is returned. A warning is attached when the
    measured λ exceeds (eps/8)·min(δ₁, δ₂).
    """
    gr = T.graph
    lam = gr.spectrum.lam if lam is None else lam
    warning = None
    if lam > eps / 8 * float(min(T.delta1, T.delta2)) + 1e-12:
        warning = f"lambda={lam:.4g} exceeds (eps/8)·min(delta1, delta2); uniqueness not guaranteed"
    s = g.erasure_fraction
    if s >= 1.0:
        return UniqueDecodeResult(None, 0, warning)
    word = g.edge_word()
    max_rounds = math.ceil(4 * math.log2(max(2, gr.num_edges)))
    rounds = 0
    right_edges = gr.right_edges
    while rounds < max_rounds:
        rounds += 1
        new = word.copy()
        new[right_edges] = _decode_side(T.c2, word[right_edges])
        new = _decode_side(T.c1, new.reshape(gr.n, gr.d)).ravel()
        if np.array_equal(new, word):
            break
        word = new
    if np.any(word == ERASED) or not tanner_membership(T, word):
        return UniqueDecodeResult(None, rounds, warning)
    if check_radius and 2 * g.errors_against(T, word) + s > float(T.delta2) - 4 * eps + 1e-12:
        return UniqueDecodeResult(None, rounds, warning)
    return UniqueDecodeResult(word, rounds, warning)


# ---------------------------------------------------------------------------
# list decoding


def tanner_list_params(
    T: TannerCode,
    eps: float,
    K1: int | None = None,
    K2: int | None = None,
    dec1: float | None = None,
    dec2: float | None = None,
    gamma: float | None = None,
) -> dict:
    """Local radii, list bounds, gamma and the global radius min(δ₁·dec₂, dec₁·δ₂) − eps."""
    d = T.graph.d
    dec1 = float(T.delta1) - 1 / d if dec1 is None else float(dec1)
    dec2 = float(T.delta2) - 1 / d if dec2 is None else float(dec2)
    K1 = max_list_size(T.c1, dec1) if K1 is None else int(K1)
    K2 = max_list_size(T.c2, dec2) if K2 is None else int(K2)
    gamma = eps**2 / (14 * K1 * K2) if gamma is None else float(gamma)
    radius = min(float(T.delta1) * dec2, dec1 * float(T.delta2)) - eps
    return {"K1": K1, "K2": K2, "dec1": dec1, "dec2": dec2, "gamma": gamma, "radius": radius, "eps": eps}


def local_lists(code: LinearCode, rows: np.ndarray, radius: float, K: int) -> np.ndarray:
    """n×K canonical codeword indices: each row's list at ``radius`` padded to K."""
    out = np.empty((rows.shape[0], K), dtype=np.int64)
    for v, row in enumerate(rows):
        lst = brute_force_list_decode(code, row, radius)
        if lst.size > K:
            raise AssertionError(f"local list of size {lst.size} at vertex {v} exceeds the bound K={K}")
        out[v] = lst.padded(K).indices
    return out


def agreement_graph_tanner(T: TannerCode, left: np.ndarray, right: np.ndarray, i: int, j: int) -> Subgraph:
    """Edges where the i-th left candidate and the j-th right candidate agree."""
    g = T.graph
    lsym = T.c1.codewords[left[:, i]].ravel()
    rsym = np.empty(g.num_edges, dtype=np.int64)
    rsym[g.right_edges] = T.c2.codewords[right[:, j]]
    return Subgraph(g, lsym == rsym)


def list_decode_tanner(
    T: TannerCode,
    g,
    eps: float,
    oracle: CutNormOracle | None = None,
    *,
    K1: int | None = None,
    K2: int | None = None,
    dec1: float | None = None,
    dec2: float | None = None,
    gamma: float | None = None,
    eta: float | str | None = None,
    family_mode: str = "decomposition",
    net_cap: float = DEFAULT_NET_CAP,
    lam: float | None = None,
    exact_net: bool | None = None,
) -> ListDecodeResult:
    """All Tanner codewords h with Δ(g, h) ≤ min(δ₁·dec₂, dec₁·δ₂) − eps.

    Soundness is checked on every returned word. Completeness additionally
    needs λ ≤ min(gamma, eps·δ₁/64, eps·δ₂/64) and a family that is
    (eta, gamma)-regular for every agreement graph and for G; the outcome of
    each check is in ``preconditions`` and any failure sets ``best_effort``.
    """
    started = time.perf_counter()
    g = _check_edge_word(T, g)
    if np.any((g < 0) | (g >= T.q)):
        raise ValueError("received word must be erasure-free field symbols")
    gr = T.graph
    lam = gr.spectrum.lam if lam is None else lam
    p = tanner_list_params(T, eps, K1, K2, dec1, dec2, gamma)
    radius = p["radius"]
    left = local_lists(T.c1, T.left_view(g), p["dec1"], p["K1"])
    right = local_lists(T.c2, T.right_view(g), p["dec2"], p["K2"])
    graphs = [agreement_graph_tanner(T, left, right, i, j) for i in range(p["K1"]) for j in range(p["K2"])]
    bundle = build_family(graphs, p["gamma"], oracle, eta, certify_against=[gr.full()], mode=family_mode)

    limit = radius_to_count(radius, gr.num_edges) if radius >= 0 else -1
    found: dict[bytes, np.ndarray] = {}
    stats: dict = {}
    attempted = 0
    exact = bundle.grid_aligned if exact_net is None else exact_net
    for sets in candidate_placements(bundle.family, p["K1"], bundle.eta, cap=net_cap, stats=stats, exact=exact):
        idx = np.full(gr.n, ERASED, dtype=np.int64)
        for i in range(p["K1"]):
            idx[sets[i]] = left[sets[i], i]
        attempted += 1
        res = unique_decode_errors_erasures(T, LeftAssignment(T.c1, idx), eps / 8, lam=lam, check_radius=False)
        h = res.word
        if h is None:
            continue
        if np.count_nonzero(h != g) <= limit:
            found.setdefault(h.tobytes(), h)

    words = tuple(found[k] for k in sorted(found))
    for h in words:
        certify(tanner_membership(T, h) and np.count_nonzero(h != g) <= limit, "list_decode_tanner soundness")
    pre = {
        "lambda<=gamma": lam <= p["gamma"] + 1e-12,
        "lambda<=eps*delta1/64": lam <= eps * float(T.delta1) / 64 + 1e-12,
        "lambda<=eps*delta2/64": lam <= eps * float(T.delta2) / 64 + 1e-12,
        "family_regular": bool(bundle.regular_certified),
        "radius_nonnegative": radius >= 0,
    }
    stats.update(
        params=p,
        eta=bundle.eta,
        eta_source=bundle.eta_source,
        family_size=len(bundle.family),
        decoder_calls=attempted,
        exact_net=exact,
        wall_s=time.perf_counter() - started,
    )
    return ListDecodeResult(words, not all(pre.values()), pre, stats)
