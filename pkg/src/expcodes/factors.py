"""Factors generated by set families, signatures, covering nets and rounding.

A family of indicators on X partitions X into atoms (maximal sets on which
every indicator is constant). Functions constant on atoms are stored as one
value per atom. The signature of a function is its vector of correlations
with the family; the covering net is the set of grid points in signature
space that some K-tuple of atom-measurable functions with pointwise sum ≤ 1
comes close to, which is decided by a small LP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .expander import as_mask
from .lp import find_feasible_point
from .regularity import FunctionFamily

__all__ = [
    "MAX_FAMILY_SIZE",
    "DEFAULT_NET_CAP",
    "NetTooLarge",
    "Factor",
    "MeasurableFunction",
    "build_factor",
    "conditional_average",
    "signature_of",
    "family_distance",
    "factor_distance",
    "realize_signature",
    "grid_values",
    "net_size_bound",
    "enumerate_net",
    "round_to_sets",
]

MAX_FAMILY_SIZE = 24
DEFAULT_NET_CAP = 10**8


class NetTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Factor:
    family: FunctionFamily
    atom_id: np.ndarray  # per element of X
    atom_sizes: np.ndarray
    atom_values: np.ndarray  # |F| × atoms, value of each generator on each atom

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def num_atoms(self) -> int:
        return int(self.atom_sizes.size)

    def members(self, atom: int) -> np.ndarray:
        return np.flatnonzero(self.atom_id == atom)


@dataclass(frozen=True, eq=False)
class MeasurableFunction:
    factor: Factor
    values: np.ndarray  # one value per atom

    def on_ground_set(self) -> np.ndarray:
        return self.values[self.factor.atom_id]


def build_factor(family: FunctionFamily) -> Factor:
    p = len(family)
    if p > MAX_FAMILY_SIZE:
        raise ValueError(f"family of size {p} exceeds {MAX_FAMILY_SIZE}")
    weights = 1 << np.arange(p, dtype=np.int64)
    patterns = (family.indicators.T.astype(np.int64) * weights).sum(axis=1)
    codes, atom_id, sizes = np.unique(patterns, return_inverse=True, return_counts=True)
    atom_values = ((codes[None, :] >> np.arange(p)[:, None]) & 1).astype(float)
    return Factor(family, atom_id.ravel(), sizes, atom_values)


def _as_function(f, n: int) -> np.ndarray:
    """Function values on X from a measurable function, a float vector, a mask or an index set."""
    if isinstance(f, MeasurableFunction):
        return f.on_ground_set()
    if isinstance(f, np.ndarray) and f.dtype.kind == "f":
        if f.shape != (n,):
            raise ValueError(f"function of shape {f.shape}, expected ({n},)")
        return f
    if isinstance(f, np.ndarray) and f.dtype == bool:
        return as_mask(f, n).astype(float)
    return as_mask(np.fromiter(f, dtype=np.int64), n).astype(float)


def conditional_average(f, B: Factor) -> MeasurableFunction:
    vals = _as_function(f, B.n)
    sums = np.bincount(B.atom_id, weights=vals, minlength=B.num_atoms)
    return MeasurableFunction(B, sums / B.atom_sizes)


def signature_of(f, family: FunctionFamily) -> np.ndarray:
    """⟨f, f_j⟩ for every member f_j, under the uniform measure on X."""
    return family.indicators.astype(float) @ _as_function(f, family.n) / family.n


def family_distance(f1, f2, family: FunctionFamily) -> float:
    n = family.n
    return float(np.abs(signature_of(_as_function(f1, n) - _as_function(f2, n), family)).max())


def factor_distance(f1, f2, B: Factor) -> float:
    """‖E[f1|B] − E[f2|B]‖₁ under the uniform measure."""
    diff = conditional_average(_as_function(f1, B.n) - _as_function(f2, B.n), B).values
    return float(np.abs(diff) @ B.atom_sizes / B.n)


def _weights(B: Factor) -> np.ndarray:
    """w[j, P] = (|P|/|X|) · f_j(P)."""
    return B.atom_values * (B.atom_sizes / B.n)[None, :]


def _lp_rows(
    W: np.ndarray, sigma: np.ndarray, K: int, eta: float, active: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Constraint rows ±(W x_i) ≤ ±σ_i + eta for the active (i, j) entries, plus per-atom Σ_i x_i ≤ 1."""
    p, a = W.shape
    if active is None:
        active = np.ones((K, p), dtype=bool)
    rows = []
    rhs = []
    for i in range(K):
        js = np.flatnonzero(active[i])
        if js.size == 0:
            continue
        block = np.zeros((js.size, K * a))
        block[:, i * a : (i + 1) * a] = W[js]
        rows += [block, -block]
        rhs += [sigma[i, js] + eta, -(sigma[i, js] - eta)]
    cap = np.zeros((a, K * a))
    for i in range(K):
        cap[np.arange(a), i * a + np.arange(a)] = 1.0
    rows.append(cap)
    rhs.append(np.ones(a))
    return np.vstack(rows), np.concatenate(rhs)


def realize_signature(sigma: np.ndarray, B: Factor, eta: float) -> np.ndarray | None:
    """Per-atom values f̄ (K × atoms) in [0,1] with Σ_i f̄_i ≤ 1 and signatures within eta of sigma."""
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    K, p = sigma.shape
    if p != len(B.family):
        raise ValueError("signature width must equal the family size")
    A, b = _lp_rows(_weights(B), sigma, K, eta)
    x = find_feasible_point(A, b)
    if x is None:
        return None
    return np.clip(x.reshape(K, B.num_atoms), 0.0, 1.0)


def grid_values(eta: float) -> np.ndarray:
    """D_eta = {0, eta, 2·eta, …} ∩ [0, 1]."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    top = math.floor(1 / eta + 1e-9)
    return np.arange(top + 1) * eta


def net_size_bound(num_functions: int, K: int, eta: float) -> float:
    return (1 / eta + 1) ** (K * num_functions)


def enumerate_net(
    family: FunctionFamily,
    K: int,
    eta: float,
    cap: float = DEFAULT_NET_CAP,
    factor: Factor | None = None,
    tolerance: float | None = None,
    lattice: float | None = None,
    bounds: tuple[np.ndarray, np.ndarray] | None = None,
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Realizable grid points of D_eta^{K×|F|} in lexicographic order, with LP witnesses.

    A grid point is kept when some K-tuple of functions has signatures within
    ``tolerance`` of it (default eta). A tolerance near zero keeps only exactly
    realizable points; this still covers every K-tuple of sets when their
    signatures lie on the grid. ``lattice`` (a multiple of eta, e.g. 1/|X|)
    further restricts coordinates to its multiples, where set signatures live.
    ``bounds`` = (lo, hi), both K × |F|, keeps only grid points inside that box.

    Coordinates are swept row by row. A value is skipped early when it cannot
    be within the tolerance of any realizable signature: it exceeds the
    member's density by more than the tolerance, or the column sum over rows
    exceeds the density by more than K times it. After every
    coordinate the LP restricted to the coordinates fixed so far must be
    feasible; since the feasible values of one coordinate form an interval,
    the scan of that coordinate stops at the first infeasible value after a
    feasible one. The LP is skipped when the parent's witness already lands
    within the tolerance of the new value.
    """
    p = len(family)
    if tolerance is None and net_size_bound(p, K, eta) > cap:
        raise NetTooLarge(
            f"net bound (1/{eta:g}+1)^{K * p} exceeds cap {cap:g}; use a smaller K·|F| or a coarser eta"
        )
    tol = eta if tolerance is None else float(tolerance)
    lp_calls = 0
    B = factor or build_factor(family)
    W = _weights(B)
    density = family.indicators.mean(axis=1)
    grid = grid_values(eta)
    if lattice is not None:
        ratio = np.round(grid / lattice, 9)
        grid = grid[ratio == np.round(ratio)]
    if bounds is None:
        lo, hi = np.full((K, p), -np.inf), np.full((K, p), np.inf)
    else:
        lo, hi = (np.broadcast_to(np.asarray(b, dtype=float), (K, p)) for b in bounds)
    sigma = np.zeros((K, p))
    colsum = np.zeros(p)

    active = np.zeros((K, p), dtype=bool)

    def feasible(i: int) -> np.ndarray | None:
        nonlocal lp_calls
        lp_calls += 1
        if lp_calls > cap:  # with a custom tolerance the cap bounds the work instead
            raise NetTooLarge(f"net search exceeded {cap:g} LP calls")
        A, b = _lp_rows(W, sigma[: i + 1], i + 1, tol, active[: i + 1])
        x = find_feasible_point(A, b)
        return None if x is None else np.clip(x.reshape(i + 1, B.num_atoms), 0.0, 1.0)

    def sweep(pos: int, parent: np.ndarray) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        i, j = divmod(pos, p)
        if j == 0:  # a fresh row starts at the zero function, which meets the atom caps
            parent = np.vstack([parent, np.zeros((1, B.num_atoms))])
        reached = float(W[j] @ parent[i])
        active[i, j] = True
        seen_feasible = False
        for v in grid:
            if v < lo[i, j] - 1e-12:
                continue
            if v > density[j] + tol + 1e-12 or v > hi[i, j] + 1e-12:
                break
            if colsum[j] + v > density[j] + K * tol + 1e-12:
                break
            sigma[i, j] = v
            witness = parent if abs(v - reached) <= tol else feasible(i)
            if witness is None:
                if seen_feasible:  # feasible values of one coordinate form an interval
                    break
                continue
            seen_feasible = True
            colsum[j] += v
            if pos == K * p - 1:
                yield sigma.copy(), witness.copy()
            else:
                yield from sweep(pos + 1, witness)
            colsum[j] -= v
        sigma[i, j] = 0.0
        active[i, j] = False

    yield from sweep(0, np.zeros((0, B.num_atoms)))


def round_to_sets(fbar: np.ndarray, B: Factor) -> np.ndarray:
    """Disjoint sets (K × |X| mask) taking ⌊|P|·f̄_i(P)⌋ consecutive members of each atom P."""
    fbar = np.atleast_2d(np.asarray(fbar, dtype=float))
    K = fbar.shape[0]
    out = np.zeros((K, B.n), dtype=bool)
    for atom in range(B.num_atoms):
        members = B.members(atom)
        size = members.size
        start = 0
        for i in range(K):
            take = min(math.floor(size * fbar[i, atom] + 1e-9), size - start)
            if take > 0:
                out[i, members[start : start + take]] = True
                start += take
    return out
