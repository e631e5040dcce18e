"""Distance amplification of an outer code by an inner code along an expander.

An outer codeword assigns to every left vertex a message of the inner code.
Each left vertex encodes its message with ``c_in`` and sends the i-th symbol
along its i-th edge; each right vertex then collects its d incoming symbols
into one block. Codewords are stored folded: an n×d array of right blocks,
block r listing the symbols of the edges at r by increasing left endpoint.

The outer code is GF(q)-linear of length n·k_in, read as n symbols over the
alphabet of inner messages (``k_in`` consecutive coordinates per symbol).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .expander import BipartiteGraph, Subgraph
from .factors import DEFAULT_NET_CAP
from .gf_linear import (
    ERASED,
    LinearCode,
    LocalList,
    brute_force_list_decode,
    brute_force_list_recover,
    max_list_size,
    max_recovery_list_size,
    min_distance,
    nearest_indices,
    radius_to_count,
)
from .netsearch import build_family, candidate_placements
from .regularity import CutNormOracle
from .soundness import ListDecodeResult, certify
from .tanner import LeftAssignment, unique_decode_errors_erasures

__all__ = [
    "OuterCode",
    "AELCode",
    "RecoveryInput",
    "ParameterReport",
    "fold",
    "unfold",
    "ael_encode",
    "ael_membership",
    "ael_codewords",
    "right_distance",
    "ael_distance_bound",
    "local_lists_left",
    "agreement_graph_ael",
    "local_lists_recovery",
    "agreement_graphs_recovery",
    "list_decode_ael",
    "list_recover_ael",
    "parameter_check",
    "tanner_outer_decoder",
]

OuterDecoder = Callable[[np.ndarray], "np.ndarray | None"]


@dataclass(frozen=True, eq=False)
class OuterCode:
    """A linear code over GF(q) of length n·symbol_k, viewed as n symbols.

    ``decoder`` maps an n×symbol_k received array to an n×symbol_k codeword or
    None. The default is exhaustive nearest-codeword search that succeeds only
    within ``dec_radius`` (a fraction of symbols), which defaults to the unique
    decoding radius ⌊(D−1)/2⌋/n.
    """

    base: LinearCode
    symbol_k: int
    decoder: OuterDecoder | None = None
    dec_radius: float | None = None

    def __post_init__(self) -> None:
        if self.symbol_k <= 0 or self.base.n % self.symbol_k:
            raise ValueError("outer length must be a multiple of the symbol width")
        if self.dec_radius is None:
            object.__setattr__(self, "dec_radius", ((self.min_symbol_distance - 1) // 2) / self.n)

    @property
    def n(self) -> int:
        return self.base.n // self.symbol_k

    @property
    def size(self) -> int:
        return self.base.size

    @cached_property
    def codewords(self) -> np.ndarray:
        """size × n × symbol_k, canonically ordered."""
        return self.base.codewords.reshape(-1, self.n, self.symbol_k)

    @cached_property
    def min_symbol_distance(self) -> int:
        cw = self.codewords
        nonzero = np.any(cw != 0, axis=2).sum(axis=1)
        nonzero = nonzero[nonzero > 0]
        return int(nonzero.min()) if nonzero.size else self.n

    @property
    def delta(self) -> Fraction:
        return Fraction(self.min_symbol_distance, self.n)

    def is_codeword(self, word: np.ndarray) -> bool:
        w = np.asarray(word)
        return w.shape == (self.n, self.symbol_k) and self.base.is_codeword(w.ravel())

    def decode(self, received: np.ndarray) -> np.ndarray | None:
        received = np.asarray(received, dtype=np.int64)
        if self.decoder is not None:
            return self.decoder(received)
        diff = np.any(self.codewords != received[None], axis=2).sum(axis=1)
        best = int(np.argmin(diff))
        if diff[best] > radius_to_count(self.dec_radius, self.n):
            return None
        return self.codewords[best].copy()


@dataclass(frozen=True, eq=False)
class AELCode:
    graph: BipartiteGraph
    c_in: LinearCode
    c_out: OuterCode

    def __post_init__(self) -> None:
        if self.c_in.n != self.graph.d:
            raise ValueError("inner code length must equal the degree")
        if self.c_out.n != self.graph.n:
            raise ValueError("outer code length must equal the number of left vertices")
        if self.c_out.symbol_k != self.c_in.k or self.c_out.base.q != self.c_in.q:
            raise ValueError("outer symbols must be inner messages over the same field")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def d(self) -> int:
        return self.graph.d

    @cached_property
    def delta_in(self) -> Fraction:
        return min_distance(self.c_in)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.c_out.base.k, self.n * self.d)


def fold(G: BipartiteGraph, edge_word: np.ndarray) -> np.ndarray:
    return np.asarray(edge_word)[G.right_edges]


def unfold(G: BipartiteGraph, folded: np.ndarray) -> np.ndarray:
    folded = np.asarray(folded)
    if folded.shape != (G.n, G.d):
        raise ValueError(f"folded word of shape {folded.shape}, expected ({G.n}, {G.d})")
    out = np.empty(G.num_edges, dtype=folded.dtype)
    out[G.right_edges] = folded
    return out


def _left_words(A: AELCode, msgs: np.ndarray) -> np.ndarray:
    return (np.asarray(msgs, dtype=np.int64) @ A.c_in.generator) % A.c_in.q


def ael_encode(A: AELCode, outer_word: np.ndarray) -> np.ndarray:
    outer_word = np.asarray(outer_word, dtype=np.int64)
    if not A.c_out.is_codeword(outer_word):
        raise ValueError("input is not an outer codeword")
    return fold(A.graph, _left_words(A, outer_word).ravel())


def ael_membership(A: AELCode, folded: np.ndarray) -> bool:
    folded = np.asarray(folded, dtype=np.int64)
    if folded.shape != (A.n, A.d):
        return False
    rows = unfold(A.graph, folded).reshape(A.n, A.d)
    if np.any((rows < 0) | (rows >= A.c_in.q)):
        return False
    if np.any((rows @ A.c_in.parity.T) % A.c_in.q):
        return False
    idx = np.array([A.c_in.index_of(r) for r in rows])
    return A.c_out.is_codeword(A.c_in.messages[idx])


def ael_codewords(A: AELCode) -> np.ndarray:
    """All codewords (size × n × d) in outer canonical order."""
    outer = A.c_out.codewords
    left = (outer @ A.c_in.generator) % A.c_in.q  # size × n × d
    return left.reshape(outer.shape[0], -1)[:, A.graph.right_edges]


def right_distance(a: np.ndarray, b: np.ndarray) -> Fraction:
    a, b = np.asarray(a), np.asarray(b)
    return Fraction(int(np.any(a != b, axis=1).sum()), a.shape[0])


def ael_distance_bound(delta_in: float, delta_out: float, lam: float) -> float:
    if delta_out <= 0:
        raise ValueError("outer distance must be positive")
    return max(0.0, float(delta_in) - float(lam) / float(delta_out))


# ---------------------------------------------------------------------------
# local lists and agreement graphs


def local_lists_left(A: AELCode, g: np.ndarray, radius: float, K: int | None) -> np.ndarray:
    """n×K inner-codeword indices: the list of each left view at ``radius``, padded.

    ``K=None`` pads to the largest list that actually occurs.
    """
    rows = unfold(A.graph, g).reshape(A.n, A.d)
    return _pad_lists([brute_force_list_decode(A.c_in, row, radius) for row in rows], K)


def _pad_lists(found: list, K: int | None) -> np.ndarray:
    if K is None:
        K = max(1, max(lst.size for lst in found))
    out = np.empty((len(found), K), dtype=np.int64)
    for v, lst in enumerate(found):
        if lst.size > K:
            raise AssertionError(f"local list of size {lst.size} at vertex {v} exceeds the bound K={K}")
        out[v] = lst.padded(K).indices
    return out


def agreement_graph_ael(A: AELCode, g: np.ndarray, lists: np.ndarray, i: int) -> Subgraph:
    """Edges on which the i-th candidate of the left endpoint matches g."""
    sym = A.c_in.codewords[lists[:, i]].ravel()
    return Subgraph(A.graph, sym == unfold(A.graph, g))


@dataclass(frozen=True, eq=False)
class RecoveryInput:
    """Per right vertex an ordered list of exactly k blocks; ``sizes`` counts the genuine ones.

    Short lists are padded with ERASED blocks, which agree with nothing, so
    the sets {r : h_r = L_r[j]} stay disjoint across j.
    """

    blocks: np.ndarray  # n × k × d
    sizes: np.ndarray

    @classmethod
    def from_lists(cls, lists: Sequence[Sequence[Sequence[int]]], k: int, d: int) -> "RecoveryInput":
        n = len(lists)
        blocks = np.full((n, k, d), ERASED, dtype=np.int64)
        sizes = np.zeros(n, dtype=np.int64)
        for r, lst in enumerate(lists):
            uniq: list[tuple[int, ...]] = []
            for b in lst:
                t = tuple(int(x) for x in b)
                if len(t) != d:
                    raise ValueError(f"block of length {len(t)} at right vertex {r}, expected {d}")
                if t not in uniq:
                    uniq.append(t)
            if len(uniq) > k:
                raise ValueError(f"right vertex {r} has {len(uniq)} > k = {k} distinct blocks")
            sizes[r] = len(uniq)
            for j, b in enumerate(uniq):
                blocks[r, j] = b
        return cls(blocks, sizes)

    @property
    def k(self) -> int:
        return int(self.blocks.shape[1])

    def misses(self, folded: np.ndarray) -> int:
        """Right vertices whose block of ``folded`` is not in their list."""
        hit = np.all(self.blocks == np.asarray(folded)[:, None, :], axis=2).any(axis=1)
        return int((~hit).sum())


def local_lists_recovery(A: AELCode, inp: RecoveryInput, radius: float, K: int | None) -> np.ndarray:
    """n×K padded inner lists: codewords missing the offered edge symbols on at most ``radius`` of edges.

    ``K=None`` pads to the largest list that actually occurs.
    """
    G = A.graph
    edge_syms = np.empty((G.num_edges, inp.k), dtype=np.int64)
    edge_syms[G.right_edges] = np.transpose(inp.blocks, (0, 2, 1))
    found = []
    for v in range(A.n):
        offered = [[int(s) for s in set(edge_syms[e]) if s != ERASED] or [ERASED] for e in range(v * A.d, (v + 1) * A.d)]
        if any(o == [ERASED] for o in offered):
            found.append(_recover_with_gaps(A.c_in, offered, radius))
        else:
            found.append(brute_force_list_recover(A.c_in, offered, radius))
    return _pad_lists(found, K)


def agreement_graphs_recovery(A: AELCode, inp: RecoveryInput, lists: np.ndarray) -> list[Subgraph]:
    """H_ij for i < K, j < k (row-major): edges where left candidate i matches right block j."""
    G = A.graph
    right_sym = np.empty((inp.k, G.num_edges), dtype=np.int64)
    for j in range(inp.k):
        right_sym[j, G.right_edges] = inp.blocks[:, j, :]
    graphs = []
    for i in range(lists.shape[1]):
        lsym = A.c_in.codewords[lists[:, i]].ravel()
        graphs.extend(Subgraph(G, lsym == right_sym[j]) for j in range(inp.k))
    return graphs


# ---------------------------------------------------------------------------
# the list decoder and the list-recovery decoder


def _fill_and_decode(A: AELCode, lists: np.ndarray, sets: np.ndarray) -> np.ndarray | None:
    """Outer-decode the left assignment given by the placement sets; None on failure."""
    idx = np.zeros(A.n, dtype=np.int64)  # canonically-first inner codeword off the sets
    for i in range(sets.shape[0]):
        idx[sets[i]] = lists[sets[i], i]
    outer = A.c_out.decode(A.c_in.messages[idx])
    if outer is None or not A.c_out.is_codeword(outer):
        return None
    return fold(A.graph, _left_words(A, outer).ravel())


def _run_net(A, lists, graphs, gamma, K, oracle, eta, family_mode, net_cap, accept, exact_net):
    bundle = build_family(graphs, gamma, oracle, eta, mode=family_mode)
    exact = bundle.grid_aligned if exact_net is None else exact_net
    found: dict[bytes, np.ndarray] = {}
    stats: dict = {}
    calls = 0
    for sets in candidate_placements(bundle.family, K, bundle.eta, cap=net_cap, stats=stats, exact=exact):
        calls += 1
        h = _fill_and_decode(A, lists, sets)
        if h is not None and accept(h):
            found.setdefault(h.tobytes(), h)
    stats.update(eta=bundle.eta, eta_source=bundle.eta_source, family_size=len(bundle.family), decoder_calls=calls,
                 exact_net=exact)
    return tuple(found[k] for k in sorted(found)), bundle, stats


def list_decode_ael(
    A: AELCode,
    g: np.ndarray,
    beta: float,
    eps: float,
    oracle: CutNormOracle | None = None,
    *,
    K: int | str | None = None,
    gamma: float | None = None,
    eta: float | str | None = None,
    family_mode: str = "decomposition",
    net_cap: float = DEFAULT_NET_CAP,
    lam: float | None = None,
    exact_net: bool | None = None,
) -> ListDecodeResult:
    """All AEL codewords within right distance beta of the folded word g.

    Requires beta ≤ δ_in − eps. K defaults to the exhaustive list-size bound
    of c_in at beta + eps (``"observed"``: the largest local list of this g)
    and gamma to eps·δ_dec/(4K). Completeness holds
    under λ ≤ gamma and a regular family; failures set ``best_effort``.
    """
    started = time.perf_counter()
    g = np.asarray(g, dtype=np.int64)
    if g.shape != (A.n, A.d) or np.any((g < 0) | (g >= A.c_in.q)):
        raise ValueError("received word must be an n×d array of field symbols")
    if beta > float(A.delta_in) - eps + 1e-12:
        raise ValueError("need beta ≤ delta_in − eps")
    lam = A.graph.spectrum.lam if lam is None else lam
    local_radius = beta + eps
    if K == "observed":
        lists = local_lists_left(A, g, local_radius, None)
        K = lists.shape[1]
    else:
        K = max_list_size(A.c_in, local_radius) if K is None else int(K)
        lists = local_lists_left(A, g, local_radius, K)
    gamma = eps * A.c_out.dec_radius / (4 * K) if gamma is None else float(gamma)
    graphs = [agreement_graph_ael(A, g, lists, i) for i in range(K)]
    limit = radius_to_count(beta, A.n)

    def accept(h: np.ndarray) -> bool:
        return int(np.any(h != g, axis=1).sum()) <= limit

    words, bundle, stats = _run_net(A, lists, graphs, gamma, K, oracle, eta, family_mode, net_cap, accept, exact_net)
    for h in words:
        certify(ael_membership(A, h) and accept(h), "list_decode_ael soundness")
    pre = {
        "beta<=delta_in-eps": True,
        "lambda<=gamma": lam <= gamma + 1e-12,
        "family_regular": bool(bundle.regular_certified),
        "gamma_positive": gamma > 0,
    }
    stats.update(K=K, gamma=gamma, beta=beta, eps=eps, wall_s=time.perf_counter() - started)
    return ListDecodeResult(words, not all(pre.values()), pre, stats)


def list_recover_ael(
    A: AELCode,
    inp: RecoveryInput,
    beta: float,
    eps: float,
    oracle: CutNormOracle | None = None,
    *,
    K: int | str | None = None,
    gamma: float | None = None,
    eta: float | str | None = None,
    family_mode: str = "decomposition",
    net_cap: float = DEFAULT_NET_CAP,
    lam: float | None = None,
    exact_net: bool | None = None,
) -> ListDecodeResult:
    """All AEL codewords h whose block h_r lies outside L_r for at most a beta fraction of r.

    K defaults to the exhaustive list-recovery bound of c_in for input size k
    at beta + eps (``"observed"``: the largest local list of this input), and
    gamma to eps·δ_dec/(5kK).
    """
    started = time.perf_counter()
    G = A.graph
    if inp.blocks.shape[0] != A.n or inp.blocks.shape[2] != A.d:
        raise ValueError("recovery input must hold n lists of length-d blocks")
    if beta > float(A.delta_in) - eps + 1e-12:
        raise ValueError("need beta ≤ delta_in − eps")
    lam = G.spectrum.lam if lam is None else lam
    k = inp.k
    local_radius = beta + eps
    if K == "observed":
        lists = local_lists_recovery(A, inp, local_radius, None)
        K = lists.shape[1]
    else:
        K = max_recovery_list_size(A.c_in, k, local_radius) if K is None else int(K)
        lists = local_lists_recovery(A, inp, local_radius, K)
    gamma = eps * A.c_out.dec_radius / (5 * k * K) if gamma is None else float(gamma)

    graphs = agreement_graphs_recovery(A, inp, lists)
    limit = radius_to_count(beta, A.n)

    def accept(h: np.ndarray) -> bool:
        return inp.misses(h) <= limit

    words, bundle, stats = _run_net(A, lists, graphs, gamma, K, oracle, eta, family_mode, net_cap, accept, exact_net)
    for h in words:
        certify(ael_membership(A, h) and accept(h), "list_recover_ael soundness")
    pre = {
        "beta<=delta_in-eps": True,
        "lambda<=gamma": lam <= gamma + 1e-12,
        "family_regular": bool(bundle.regular_certified),
        "gamma_positive": gamma > 0,
    }
    stats.update(K=K, k=k, gamma=gamma, beta=beta, eps=eps, wall_s=time.perf_counter() - started)
    return ListDecodeResult(words, not all(pre.values()), pre, stats)


def _recover_with_gaps(code: LinearCode, offered: list[list[int]], radius: float):
    """List recovery where some coordinates offer nothing (they always miss)."""
    allowed = np.zeros((code.n, code.q), dtype=bool)
    for i, s in enumerate(offered):
        for x in s:
            if x != ERASED:
                allowed[i, x] = True
    cw = code.codewords
    misses = np.count_nonzero(~allowed[np.arange(code.n), cw], axis=1)
    hits = np.nonzero(misses <= radius_to_count(radius, code.n))[0]
    return LocalList(code, tuple(int(t) for t in hits), int(hits.size))


# ---------------------------------------------------------------------------
# outer decoding by a Tanner code


def tanner_outer_decoder(T, symbol_k: int, eps: float) -> OuterDecoder:
    """Outer decoder for an outer code that is the Tanner code ``T`` regrouped into symbols.

    Each left vertex of T takes its nearest c1 codeword, then the
    errors-and-erasures decoder runs from that assignment.
    """
    def decode(received: np.ndarray) -> np.ndarray | None:
        word = np.asarray(received, dtype=np.int64).ravel()
        rows = T.left_view(word)
        idx = nearest_indices(T.c1.codewords, rows)
        res = unique_decode_errors_erasures(T, LeftAssignment(T.c1, idx), eps)
        return None if res.word is None else res.word.reshape(-1, symbol_k)

    return decode


# ---------------------------------------------------------------------------
# parameter arithmetic


@dataclass(frozen=True)
class ParameterReport:
    mode: str
    gamma: float
    eta: float
    family_size_bound: float
    net_log10_bound: float
    thresholds: dict[str, tuple[float, bool]] = field(default_factory=dict)  # name → (bound on λ, λ ≤ bound)

    @property
    def all_pass(self) -> bool:
        return all(ok for _, ok in self.thresholds.values())

    def table(self) -> str:
        lines = [
            f"mode            {self.mode}",
            f"gamma           {self.gamma:.6g}",
            f"eta             {self.eta:.6g}",
            f"|F| bound       {self.family_size_bound:.6g}",
            f"log10 net bound {self.net_log10_bound:.6g}",
        ]
        for name, (bound, ok) in self.thresholds.items():
            lines.append(f"{name:<40}{bound:<14.6g}{'pass' if ok else 'FAIL'}")
        return "\n".join(lines)


PARAMETER_MODES = ("ael-decode", "ael-recover", "tanner-decode")


def parameter_check(
    eps: float,
    delta_dec: float | None,
    K: int,
    k: int = 1,
    lam: float = 0.0,
    mode: str = "ael-decode",
    *,
    K2: int | None = None,
    delta1: float | None = None,
    delta2: float | None = None,
    alpha: float = 1.0,
) -> ParameterReport:
    """gamma, eta, net size and every λ threshold for a decoder configuration.

    Family size uses one decomposition per agreement graph, each of at most
    16/(alpha·gamma)² steps at gamma/4, plus the full set.
    """
    if mode not in PARAMETER_MODES:
        raise ValueError(f"mode must be one of {PARAMETER_MODES}")
    th: dict[str, float] = {}
    if mode == "tanner-decode":
        K2 = K if K2 is None else K2
        gamma = eps**2 / (14 * K * K2)
        graphs = K * K2
        th["lambda<=gamma"] = gamma
        if delta1 is not None:
            th["lambda<=eps*delta1/64"] = eps * delta1 / 64
        if delta2 is not None:
            th["lambda<=eps*delta2/64"] = eps * delta2 / 64
    else:
        if delta_dec is None:
            raise ValueError("AEL modes need delta_dec")
        if mode == "ael-decode":
            gamma = eps * delta_dec / (4 * K)
            graphs = K
        else:
            gamma = eps * delta_dec / (5 * k * K)
            graphs = k * K
        th["lambda<=gamma"] = gamma
        th["lambda<=gamma*eps (local membership)"] = gamma * eps
    th["lambda<=gamma^2/2500 (regular family)"] = gamma**2 / 2500
    eta = alpha * gamma**2 / 16
    fam = 1 + graphs * 16 / (alpha * gamma) ** 2
    net_log10 = K * fam * math.log10(4 / eta + 1) if eta > 0 else math.inf
    thresholds = {name: (b, lam <= b + 1e-15) for name, b in th.items()}
    return ParameterReport(mode, gamma, eta, fam, net_log10, thresholds)
