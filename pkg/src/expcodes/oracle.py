"""Brute-force ground truth, planted channel instances, and lemma audits.

The list oracle re-derives every codeword from generator matrices and
adjacency lists with plain Python loops, and measures distances with its own
code, so nothing here shares a path with the decoders it is used to check.
The audits do reuse the decoder's local lists and agreement graphs: they are
the objects whose properties are being measured.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .ael import (
    AELCode,
    RecoveryInput,
    agreement_graph_ael,
    agreement_graphs_recovery,
    ael_encode,
    local_lists_left,
    local_lists_recovery,
    unfold,
)
from .expander import Subgraph
from .factors import NetTooLarge, family_distance, signature_of
from .gf_linear import ERASED, LinearCode, max_list_size, max_recovery_list_size
from .netsearch import build_family, candidate_placements
from .tanner import LeftAssignment, TannerCode, agreement_graph_tanner, local_lists, tanner_list_params

__all__ = [
    "ORACLE_CAP",
    "METRICS",
    "CHANNELS",
    "LEMMA_IDS",
    "OracleTooLarge",
    "global_list_oracle",
    "ChannelSpec",
    "PlantedInstance",
    "plant",
    "LemmaReport",
    "AuditConfig",
    "lemma_audit",
]

ORACLE_CAP = 1 << 20
METRICS = ("hamming", "right", "recovery")
CHANNELS = ("edge", "block", "erasure", "recovery")
LEMMA_IDS = (
    "clm:local-membership",
    "clm:local-membership-lr",
    "prop:local_presence",
    "lem:ael-rigidity",
    "lem:ael-rigidity-lr",
    "lem:tanner-rigidity",
)
_TOL = 1e-9


class OracleTooLarge(ValueError):
    """The code has more codewords (or search nodes) than the oracle cap."""


# ---------------------------------------------------------------------------
# independent enumeration


def _span(generator: np.ndarray, q: int, cap: int) -> list[tuple[int, ...]]:
    """All codewords as tuples, in lexicographic message order."""
    rows = [[int(x) for x in row] for row in np.asarray(generator)]
    k = len(rows)
    n = len(rows[0]) if rows else 0
    if q**k > cap:
        raise OracleTooLarge(f"{q}^{k} codewords exceed the oracle cap {cap}")
    out = []
    for msg in itertools.product(range(q), repeat=k):
        word = [0] * n
        for coef, row in zip(msg, rows):
            if coef:
                for j in range(n):
                    word[j] = (word[j] + coef * row[j]) % q
        out.append(tuple(word))
    return out


def _right_slots(left_adj: np.ndarray) -> list[list[tuple[int, int]]]:
    """For every right vertex its (left, slot) pairs, ordered by edge index."""
    n = len(left_adj)
    at: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for v in range(n):
        for s, r in enumerate(left_adj[v]):
            at[int(r)].append((v, s))
    return at


def _tanner_words(T: TannerCode, cap: int) -> list[tuple[int, ...]]:
    """Tanner codewords by backtracking over left vertices, checking each right
    vertex as soon as its last left neighbour is assigned."""
    adj = [[int(r) for r in row] for row in T.graph.left_adj]
    n = len(adj)
    left_words = _span(T.c1.generator, T.q, cap)
    right_ok = set(_span(T.c2.generator, T.q, cap))
    slots = _right_slots(adj)
    closes: list[list[int]] = [[] for _ in range(n)]
    for r, pairs in enumerate(slots):
        closes[max(v for v, _ in pairs)].append(r)
    choice: list[tuple[int, ...]] = [()] * n
    out: list[tuple[int, ...]] = []
    nodes = 0

    def extend(v: int) -> None:
        nonlocal nodes
        if v == n:
            out.append(tuple(x for w in choice for x in w))
            return
        for w in left_words:
            nodes += 1
            if nodes > cap:
                raise OracleTooLarge(f"Tanner enumeration visited more than {cap} nodes")
            choice[v] = w
            if all(tuple(choice[u][s] for u, s in slots[r]) in right_ok for r in closes[v]):
                extend(v + 1)

    extend(0)
    out.sort()
    return out


def _ael_words(A: AELCode, cap: int) -> list[tuple[tuple[int, ...], ...]]:
    """Folded AEL codewords: right block r lists the symbols of its edges by edge index."""
    q = A.c_in.q
    k = A.c_out.symbol_k
    inner_rows = [[int(x) for x in row] for row in A.c_in.generator]
    adj = [[int(r) for r in row] for row in A.graph.left_adj]
    slots = _right_slots(adj)
    out = []
    for outer in _span(A.c_out.base.generator, q, cap):
        left = []
        for v in range(A.n):
            msg = outer[v * k : (v + 1) * k]
            left.append([sum(c * row[j] for c, row in zip(msg, inner_rows)) % q for j in range(A.d)])
        out.append(tuple(tuple(left[v][s] for v, s in slots[r]) for r in range(A.n)))
    out.sort()
    return out


def _within(count: int, total: int, radius: float) -> bool:
    return count <= float(radius) * total + _TOL


def global_list_oracle(code, received, radius: float, metric: str = "hamming", cap: int = ORACLE_CAP) -> list[np.ndarray]:
    """Every codeword within ``radius`` of ``received``, by exhaustive scan.

    ``code`` is a LinearCode, TannerCode or AELCode. Metrics: ``hamming``
    (fraction of differing symbols), ``right`` (fraction of differing right
    blocks of a folded AEL word) and ``recovery`` (fraction of right vertices
    whose block is not offered; ``received`` is a RecoveryInput or per-vertex
    block lists). Words come back in lexicographic order in the code's
    native shape.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    if isinstance(code, AELCode):
        words = _ael_words(code, cap)
        if metric == "recovery":
            offered = _offered_blocks(received)
            n = len(words[0]) if words else code.n
            keep = [w for w in words if _within(sum(w[r] not in offered[r] for r in range(n)), n, radius)]
        else:
            g = tuple(tuple(int(x) for x in row) for row in np.asarray(received))
            if metric == "right":
                keep = [w for w in words if _within(sum(a != b for a, b in zip(w, g)), len(g), radius)]
            else:
                total = code.n * code.d
                keep = [w for w in words if _within(_hamming(_flat(w), _flat(g)), total, radius)]
        return [np.array(w, dtype=np.int64) for w in keep]
    if metric != "hamming":
        raise ValueError(f"metric {metric!r} only applies to AEL codes")
    if isinstance(code, TannerCode):
        words = _tanner_words(code, cap)
    elif isinstance(code, LinearCode):
        words = _span(code.generator, code.q, cap)
    else:
        raise TypeError(f"cannot enumerate {type(code).__name__}")
    g = tuple(int(x) for x in np.asarray(received).ravel())
    return [np.array(w, dtype=np.int64) for w in words if _within(_hamming(w, g), len(g), radius)]


def _flat(w) -> tuple[int, ...]:
    return tuple(x for block in w for x in block)


def _hamming(a: Sequence[int], b: Sequence[int]) -> int:
    if len(a) != len(b):
        raise ValueError("length mismatch")
    return sum(x != y for x, y in zip(a, b))


def _offered_blocks(received) -> list[set[tuple[int, ...]]]:
    if isinstance(received, RecoveryInput):
        return [
            {tuple(int(x) for x in b) for b in received.blocks[r] if not np.any(b == ERASED)}
            for r in range(received.blocks.shape[0])
        ]
    return [{tuple(int(x) for x in b) for b in lst} for lst in received]


# ---------------------------------------------------------------------------
# planted instances


@dataclass(frozen=True)
class ChannelSpec:
    """How a planted codeword is corrupted.

    ``edge``: ⌊beta·N⌋ symbols of a LinearCode or Tanner word are replaced.
    ``block``: ⌊beta·n⌋ right blocks of a folded AEL word are replaced.
    ``erasure``: a Tanner left assignment with ⌊erasure·n⌋ erased vertices and
    ⌊beta·n⌋ further vertices given a wrong c1 codeword.
    ``recovery``: per right vertex a list of at most k blocks; each of the
    ``planted`` codewords is offered at exactly ⌈(1−beta)·n⌉ right vertices and
    the remaining slots hold random filler blocks.
    """

    kind: str
    beta: float = 0.0
    erasure: float = 0.0
    k: int = 1
    planted: int = 1

    def __post_init__(self) -> None:
        if self.kind not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}")
        if not 0 <= self.beta <= 1 or not 0 <= self.erasure <= 1 or self.beta + self.erasure > 1:
            raise ValueError("need 0 ≤ beta, erasure and beta + erasure ≤ 1")
        if self.k < 1 or not 1 <= self.planted <= self.k:
            raise ValueError("need 1 ≤ planted ≤ k")


@dataclass(frozen=True, eq=False)
class PlantedInstance:
    code: Any  # LinearCode, TannerCode or AELCode
    h: np.ndarray  # the (first) planted codeword in native shape
    received: Any  # word, LeftAssignment or RecoveryInput
    channel: ChannelSpec
    seed: int
    planted: tuple[np.ndarray, ...] = ()  # all planted codewords, h first

    def placement_sets(self, left_lists: np.ndarray, left_code: LinearCode, left_rows: np.ndarray) -> np.ndarray:
        """K×n masks A_i = {ℓ : L_ℓ[i] = h_ℓ}, given index lists and h's left views."""
        cw = left_code.codewords[left_lists]  # n × K × len
        return np.all(cw == left_rows[:, None, :], axis=2).T

    def right_sets(self, blocks: np.ndarray, right_rows: np.ndarray) -> np.ndarray:
        """k×n masks B_j = {r : L_r[j] = h_r}, given n×k×d blocks and h's right views."""
        return np.all(blocks == right_rows[:, None, :], axis=2).T


def _random_codeword(code, rng: np.random.Generator) -> np.ndarray:
    if isinstance(code, LinearCode):
        return (rng.integers(0, code.q, code.k) @ code.generator) % code.q
    if isinstance(code, TannerCode):
        base = code.linear_code
        return (rng.integers(0, base.q, base.k) @ base.generator) % base.q
    if isinstance(code, AELCode):
        base = code.c_out.base
        outer = ((rng.integers(0, base.q, base.k) @ base.generator) % base.q).reshape(code.n, -1)
        return ael_encode(code, outer)
    raise TypeError(f"cannot plant into {type(code).__name__}")


def _different_block(rng: np.random.Generator, q: int, avoid: Sequence[np.ndarray], d: int) -> np.ndarray:
    while True:
        b = rng.integers(0, q, d)
        if not any(np.array_equal(b, a) for a in avoid):
            return b


def plant(code, channel: ChannelSpec, seed: int) -> PlantedInstance:
    """A random codeword of ``code`` pushed through ``channel``; deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    kind = channel.kind
    if kind == "edge" and not isinstance(code, (LinearCode, TannerCode)):
        raise ValueError("edge channel needs a LinearCode or TannerCode")
    if kind == "erasure" and not isinstance(code, TannerCode):
        raise ValueError("erasure channel needs a TannerCode")
    if kind in ("block", "recovery") and not isinstance(code, AELCode):
        raise ValueError(f"{kind} channel needs an AELCode")

    h = _random_codeword(code, rng)
    q = code.c_in.q if isinstance(code, AELCode) else code.q
    if kind == "edge":
        g = h.copy()
        pos = rng.choice(h.size, size=math.floor(channel.beta * h.size), replace=False)
        g[pos] = (h[pos] + rng.integers(1, q, pos.size)) % q
        return PlantedInstance(code, h, g, channel, seed, (h,))
    if kind == "block":
        g = h.copy()
        pos = rng.choice(code.n, size=math.floor(channel.beta * code.n), replace=False)
        for r in np.sort(pos):
            g[r] = _different_block(rng, q, [h[r]], code.d)
        return PlantedInstance(code, h, g, channel, seed, (h,))
    if kind == "erasure":
        T = code
        n = T.graph.n
        idx = np.array(LeftAssignment.from_codeword(T, h).indices)
        perm = rng.permutation(n)
        n_erase = math.floor(channel.erasure * n)
        n_err = math.floor(channel.beta * n)
        idx[perm[:n_erase]] = ERASED
        for v in perm[n_erase : n_erase + n_err]:
            idx[v] = (idx[v] + rng.integers(1, T.c1.size)) % T.c1.size
        return PlantedInstance(T, h, LeftAssignment(T.c1, idx), channel, seed, (h,))

    # recovery
    A = code
    words = [h] + [_random_codeword(A, rng) for _ in range(channel.planted - 1)]
    hits = math.ceil((1 - channel.beta) * A.n - _TOL)
    lists: list[list[np.ndarray]] = [[] for _ in range(A.n)]
    for w in words:
        for r in np.sort(rng.choice(A.n, size=hits, replace=False)):
            if not any(np.array_equal(w[r], b) for b in lists[r]):
                lists[r].append(w[r])
    for r in range(A.n):
        avoid = [w[r] for w in words]
        while len(lists[r]) < channel.k:
            lists[r].append(_different_block(rng, q, avoid + lists[r], A.d))
        lists[r] = [lists[r][j] for j in rng.permutation(len(lists[r]))]
    inp = RecoveryInput.from_lists(lists, channel.k, A.d)
    return PlantedInstance(A, h, inp, channel, seed, tuple(words))


# ---------------------------------------------------------------------------
# lemma audits


@dataclass(frozen=True)
class AuditConfig:
    """Decoder parameters under which a lemma is evaluated; None means the decoder default."""

    eps: float
    beta: float | None = None  # defaults to the channel's beta
    gamma: float | None = None
    eta: float | None = None
    lam: float | None = None  # defaults to the measured λ
    K: int | str | None = None  # "observed": largest local list that occurs (AEL only)
    K2: int | None = None
    dec1: float | None = None
    dec2: float | None = None
    family_mode: str = "partition"
    max_points: int = 5000
    net_cap: float = 1e7


@dataclass(frozen=True)
class LemmaReport:
    lemma: str
    status: str  # "pass", "fail" or "precondition unmet"
    lhs: float
    rhs: float
    preconditions: dict[str, bool] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def _report(lemma: str, lhs: float, rhs: float, pre: dict[str, bool], **details) -> LemmaReport:
    pre = {name: bool(ok) for name, ok in pre.items()}
    if not all(pre.values()):
        status = "precondition unmet"
    else:
        status = "pass" if lhs <= rhs + _TOL else "fail"
    return LemmaReport(lemma, status, float(lhs), float(rhs), pre, details)


def _need(inst: PlantedInstance, kinds: tuple[str, ...], code_type: type, lemma: str) -> None:
    if not isinstance(inst.code, code_type) or inst.channel.kind not in kinds:
        raise ValueError(f"{lemma} needs a {code_type.__name__} instance with channel in {kinds}")


def _ael_setup(inst: PlantedInstance, cfg: AuditConfig, recovery: bool) -> dict:
    A: AELCode = inst.code
    beta = inst.channel.beta if cfg.beta is None else cfg.beta
    eps = cfg.eps
    lam = A.graph.spectrum.lam if cfg.lam is None else cfg.lam
    radius = beta + eps
    h_left = unfold(A.graph, inst.h).reshape(A.n, A.d)
    observed = cfg.K == "observed"
    if recovery:
        inp: RecoveryInput = inst.received
        k = inp.k
        if observed:
            lists = local_lists_recovery(A, inp, radius, None)
        else:
            K = max_recovery_list_size(A.c_in, k, radius) if cfg.K is None else int(cfg.K)
            lists = local_lists_recovery(A, inp, radius, K)
        K = lists.shape[1]
        gamma = eps * A.c_out.dec_radius / (5 * k * K) if cfg.gamma is None else cfg.gamma
        graphs = agreement_graphs_recovery(A, inp, lists)
        miss = inp.misses(inst.h)
    else:
        k = 1
        if observed:
            lists = local_lists_left(A, inst.received, radius, None)
        else:
            K = max_list_size(A.c_in, radius) if cfg.K is None else int(cfg.K)
            lists = local_lists_left(A, inst.received, radius, K)
        K = lists.shape[1]
        gamma = eps * A.c_out.dec_radius / (4 * K) if cfg.gamma is None else cfg.gamma
        graphs = [agreement_graph_ael(A, inst.received, lists, i) for i in range(K)]
        miss = int(np.any(inst.received != inst.h, axis=1).sum())
    A_sets = inst.placement_sets(lists, A.c_in, h_left)
    return dict(A=A, beta=beta, eps=eps, lam=lam, K=K, k=k, gamma=gamma, lists=lists, graphs=graphs,
                miss=miss, A_sets=A_sets)


def _tanner_setup(inst: PlantedInstance, cfg: AuditConfig) -> dict:
    T: TannerCode = inst.code
    g = np.asarray(inst.received)
    p = tanner_list_params(T, cfg.eps, cfg.K, cfg.K2, cfg.dec1, cfg.dec2, cfg.gamma)
    left = local_lists(T.c1, T.left_view(g), p["dec1"], p["K1"])
    right = local_lists(T.c2, T.right_view(g), p["dec2"], p["K2"])
    A_sets = inst.placement_sets(left, T.c1, T.left_view(inst.h))
    B_sets = inst.right_sets(T.c2.codewords[right], T.right_view(inst.h))
    lam = T.graph.spectrum.lam if cfg.lam is None else cfg.lam
    dist = np.count_nonzero(g != inst.h) / g.size
    return dict(T=T, g=g, p=p, left=left, right=right, A_sets=A_sets, B_sets=B_sets, lam=lam, dist=dist)


def _rigidity_scan(graphs: list[Subgraph], A_sets: np.ndarray, gamma: float, cfg: AuditConfig, certify_against=()):
    """Largest Σ|S_i \\ A_i| over examined disjoint placements S that are eta-close to A in the family norm."""
    bundle = build_family(graphs, gamma, eta=cfg.eta, certify_against=certify_against, mode=cfg.family_mode)
    fam, eta = bundle.family, bundle.eta
    K = A_sets.shape[0]

    def close(S: np.ndarray) -> bool:
        return all(family_distance(A_sets[i].astype(float), S[i].astype(float), fam) <= eta + _TOL for i in range(K))

    worst = 0  # S = A itself is always eta-close
    examined = 1
    truncated = False
    # net points farther than eta from A's signature cannot realize an eta-close placement
    center = np.array([signature_of(A_sets[i].astype(float), fam) for i in range(K)])
    try:
        for S in candidate_placements(fam, K, eta, cap=cfg.net_cap, exact=bundle.grid_aligned, center=center):
            if examined >= cfg.max_points:
                truncated = True
                break
            if close(S):
                examined += 1
                worst = max(worst, int(np.count_nonzero(S & ~A_sets)))
    except NetTooLarge:
        truncated = True
    return worst, examined, truncated, bundle


def lemma_audit(instance: PlantedInstance, lemma_id: str, config: AuditConfig | None = None) -> LemmaReport:
    """Evaluate both sides of a lemma's inequality on a planted instance.

    Preconditions are measured, not assumed; when one fails the report says
    "precondition unmet" and nothing is asserted. Rigidity audits scan the
    covering net for placements eta-close to the planted sets and report the
    worst Σ|S_i \\ A_i| found.
    """
    if lemma_id not in LEMMA_IDS:
        raise ValueError(f"unknown lemma id {lemma_id!r}; expected one of {LEMMA_IDS}")
    cfg = config or AuditConfig(eps=0.1)

    if lemma_id in ("clm:local-membership", "lem:ael-rigidity"):
        _need(instance, ("block",), AELCode, lemma_id)
        s = _ael_setup(instance, cfg, recovery=False)
    elif lemma_id in ("clm:local-membership-lr", "lem:ael-rigidity-lr"):
        _need(instance, ("recovery",), AELCode, lemma_id)
        s = _ael_setup(instance, cfg, recovery=True)
    else:
        _need(instance, ("edge",), TannerCode, lemma_id)
        s = _tanner_setup(instance, cfg)

    if lemma_id in ("clm:local-membership", "clm:local-membership-lr"):
        A = s["A"]
        outside = 1 - s["A_sets"].any(axis=0).mean()
        pre = {
            "distance<=beta": s["miss"] <= s["beta"] * A.n + _TOL,
            "lambda<=gamma*eps": s["lam"] <= s["gamma"] * s["eps"] + _TOL,
        }
        return _report(lemma_id, outside, s["gamma"], pre, lam=s["lam"], K=s["K"], gamma=s["gamma"])

    if lemma_id == "prop:local_presence":
        T, p = s["T"], s["p"]
        left_out = 1 - s["A_sets"].any(axis=0).mean()
        right_out = 1 - s["B_sets"].any(axis=0).mean()
        rhs_left = float(T.delta2) - cfg.eps
        rhs_right = float(T.delta1) - cfg.eps
        pre = {"distance<=radius": s["dist"] <= p["radius"] + _TOL}
        # report the tighter side
        if rhs_left - left_out <= rhs_right - right_out:
            lhs, rhs = left_out, rhs_left
        else:
            lhs, rhs = right_out, rhs_right
        return _report(lemma_id, lhs, rhs, pre, left=(left_out, rhs_left), right=(right_out, rhs_right))

    if lemma_id in ("lem:ael-rigidity", "lem:ael-rigidity-lr"):
        A = s["A"]
        gamma, K, k = s["gamma"], s["K"], s["k"]
        factor = 2 * K if lemma_id == "lem:ael-rigidity" else 3 * k * K
        rhs = factor * gamma / s["eps"] * A.n
        worst, examined, truncated, bundle = _rigidity_scan(s["graphs"], s["A_sets"], gamma, cfg)
        pre = {
            "beta<=delta_in-eps": s["beta"] <= float(A.delta_in) - s["eps"] + _TOL,
            "distance<=beta": s["miss"] <= s["beta"] * A.n + _TOL,
            "lambda<=gamma": s["lam"] <= gamma + _TOL,
            "local_membership_holds": s["A_sets"].any(axis=0).mean() >= 1 - gamma - _TOL,
            "family_regular": bool(bundle.regular_certified),
        }
        return _report(lemma_id, worst, rhs, pre, examined=examined, truncated=truncated, eta=bundle.eta,
                       family_size=len(bundle.family), gamma=gamma, K=K)

    # lem:tanner-rigidity
    T, p = s["T"], s["p"]
    gamma = p["gamma"]
    graphs = [agreement_graph_tanner(T, s["left"], s["right"], i, j) for i in range(p["K1"]) for j in range(p["K2"])]
    rhs = 3 * p["K1"] * p["K2"] * gamma / cfg.eps * T.graph.n
    worst, examined, truncated, bundle = _rigidity_scan(graphs, s["A_sets"], gamma, cfg, [T.graph.full()])
    pre = {
        "distance<=radius": s["dist"] <= p["radius"] + _TOL,
        "lambda<=gamma": s["lam"] <= gamma + _TOL,
        "family_regular": bool(bundle.regular_certified),
    }
    return _report(lemma_id, worst, rhs, pre, examined=examined, truncated=truncated, eta=bundle.eta,
                   family_size=len(bundle.family), gamma=gamma, K1=p["K1"], K2=p["K2"])
