"""Shared steps of the regularity-based list decoders.

Every decoder builds agreement subgraphs, takes a family that is regular for
all of them, and then walks the covering net over left K-tuples, turning each
realizable signature into disjoint candidate placement sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .expander import Subgraph
from .factors import DEFAULT_NET_CAP, Factor, build_factor, enumerate_net, round_to_sets, signature_of
from .regularity import (
    CutNormOracle,
    FunctionFamily,
    exact_oracle,
    family_union,
    regular_family,
    regularity_threshold,
    row_partition_family,
)

__all__ = [
    "EXHAUSTIVE_SIDE_CAP",
    "FAMILY_MODES",
    "FamilyBundle",
    "build_family",
    "choose_eta",
    "candidate_placements",
]

EXHAUSTIVE_SIDE_CAP = 12
FAMILY_MODES = ("decomposition", "partition")


@dataclass(frozen=True)
class FamilyBundle:
    family: FunctionFamily
    eta: float
    eta_source: str  # "lemma", "override", "certified" or "partition"
    regular_certified: bool | None  # exhaustive check result; None when n is too large to check
    grid_aligned: bool = False  # eta/4 divides 1/n, so set signatures lie on the net grid


def _threshold(family: FunctionFamily, graphs: Sequence[Subgraph], gamma: float) -> float:
    return min(regularity_threshold(family, H, gamma, side_cap=EXHAUSTIVE_SIDE_CAP) for H in graphs)


def choose_eta(threshold: float, n: int) -> float:
    """Largest eta = 4/(k·n), k ≥ 1, strictly below ``threshold``.

    The grid step eta/4 = 1/(k·n) then divides 1/n, so signatures of actual
    vertex sets lie exactly on the grid.
    """
    k = 1
    if math.isfinite(threshold):
        if threshold <= 0:
            raise ValueError("no positive eta makes the family regular")
        k = max(1, math.floor(4 / (threshold * n)) + 1)
        while 4 / (k * n) >= threshold:
            k += 1
    return 4 / (k * n)


def build_family(
    graphs: Sequence[Subgraph],
    gamma: float,
    oracle: CutNormOracle | None = None,
    eta: float | str | None = None,
    certify_against: Sequence[Subgraph] = (),
    mode: str = "decomposition",
) -> FamilyBundle:
    """A family regular for every graph in ``graphs``, and the eta used for the net.

    ``mode="decomposition"`` unions the regular families of gamma/4
    decompositions. ``eta`` is then None (the value those families come
    with), a number, or ``"certified"``: the largest grid-aligned value for
    which an exhaustive scan proves the union regular for every graph and for
    ``certify_against``.

    ``mode="partition"`` uses the row-class family, which is regular for any
    gamma once eta < 1/n; eta defaults to the largest grid-aligned value below
    the exhaustive threshold (or below 1/n when n is too large to scan).
    """
    if mode not in FAMILY_MODES:
        raise ValueError(f"unknown family mode {mode!r}; expected one of {FAMILY_MODES}")
    checked = list(graphs) + list(certify_against)
    n = checked[0].parent.n
    if mode == "partition":
        family = row_partition_family(checked)
        if eta is not None and eta != "certified":
            value = float(eta)
            ok = value < (_threshold(family, checked, gamma) if n <= EXHAUSTIVE_SIDE_CAP else 1 / n)
            return FamilyBundle(family, value, "override", ok, _aligned(value, n))
        limit = _threshold(family, checked, gamma) if n <= EXHAUSTIVE_SIDE_CAP else 1 / n
        return FamilyBundle(family, choose_eta(limit, n), "partition", True, True)

    oracle = oracle or exact_oracle()
    fams = []
    lemma_eta = math.inf
    for H in graphs:
        fam, e = regular_family(H, gamma, oracle)
        fams.append(fam)
        lemma_eta = min(lemma_eta, e)
    family = family_union(*fams)
    if eta == "certified":
        if n > EXHAUSTIVE_SIDE_CAP:
            raise ValueError("certified eta needs an exhaustive scan; n is too large")
        return FamilyBundle(family, choose_eta(_threshold(family, checked, gamma), n), "certified", True, True)
    value = lemma_eta if eta is None else float(eta)
    source = "lemma" if eta is None else "override"
    certified = None
    if n <= EXHAUSTIVE_SIDE_CAP:
        certified = value < _threshold(family, checked, gamma)
    return FamilyBundle(family, value, source, certified, _aligned(value, n))


def _aligned(eta: float, n: int) -> bool:
    k = 4 / (eta * n)
    return abs(k - round(k)) < 1e-9 and round(k) >= 1


def _nearest_round(fbar: np.ndarray, B: Factor) -> np.ndarray:
    """Like ``round_to_sets`` but with per-atom counts rounded to the nearest integer."""
    K = fbar.shape[0]
    out = np.zeros((K, B.n), dtype=bool)
    for atom in range(B.num_atoms):
        members = B.members(atom)
        start = 0
        for i in range(K):
            take = min(int(np.floor(members.size * fbar[i, atom] + 0.5)), members.size - start)
            if take > 0:
                out[i, members[start : start + take]] = True
                start += take
    return out


def candidate_placements(
    family: FunctionFamily,
    K: int,
    eta: float,
    cap: float = DEFAULT_NET_CAP,
    stats: dict | None = None,
    exact: bool = False,
    center: np.ndarray | None = None,
) -> Iterator[np.ndarray]:
    """Distinct K-tuples of disjoint left sets (K × n masks) drawn from the net N_{eta/4}.

    With ``exact`` only grid points that are multiples of 1/n and realized
    exactly by some K-tuple of functions are visited. When eta/4 divides 1/n
    every K-tuple of sets has its signature there, so this sub-net still
    contains the signature of every placement the decoder is looking for, at
    distance 0.

    ``center`` (K × |F|) limits the search to net points within eta of it.

    Each net witness is rounded twice: the floor rounding of ``round_to_sets``
    and a nearest-count rounding. Both are disjoint; the second stays exact on
    small atoms where flooring a value just below an integer drops a vertex.
    ``stats`` (if given) receives the number of net points, distinct
    placements, and how many placements met the eta/2 signature condition.
    """
    B = build_factor(family)
    seen: set[bytes] = set()
    counters = {"net_points": 0, "placements": 0, "within_half_eta": 0}
    bounds = None if center is None else (np.asarray(center) - eta, np.asarray(center) + eta)
    for sigma, witness in enumerate_net(
        family,
        K,
        eta / 4,
        cap=cap,
        factor=B,
        tolerance=1e-9 if exact else None,
        lattice=1 / B.n if exact else None,
        bounds=bounds,
    ):
        counters["net_points"] += 1
        for sets in (round_to_sets(witness, B), _nearest_round(witness, B)):
            key = np.packbits(sets).tobytes()
            if key in seen:
                continue
            seen.add(key)
            counters["placements"] += 1
            drift = max(float(np.abs(signature_of(s, family) - sigma[i]).max()) for i, s in enumerate(sets))
            counters["within_half_eta"] += int(drift <= eta / 2 + 1e-12)
            if stats is not None:
                stats.update(counters)
            yield sets
    if stats is not None:
        stats.update(counters)
