"""Dense phase-1 simplex for small feasibility problems ``A x ≤ b, x ≥ 0``."""

from __future__ import annotations

import numpy as np

__all__ = ["LPTooLarge", "find_feasible_point"]

DEFAULT_SIZE_CAP = 4_000_000  # tableau entries


class LPTooLarge(ValueError):
    pass


def find_feasible_point(
    A: np.ndarray, b: np.ndarray, tol: float = 1e-9, size_cap: int = DEFAULT_SIZE_CAP
) -> np.ndarray | None:
    """A point of {x ≥ 0 : A x ≤ b + tol}, or None when the system is infeasible.

    Rows with a negative right-hand side get an artificial variable; the sum
    of artificials is minimised with Dantzig's rule (most negative reduced
    cost), switching to Bland's rule after a run of degenerate pivots so the
    method terminates without cycling.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    m, nx = A.shape
    if b.shape != (m,):
        raise ValueError("A and b disagree on the number of rows")
    if m == 0:
        return np.zeros(nx)
    b = b + tol  # the tolerance is granted to every constraint up front
    neg = b < 0
    na = int(neg.sum())
    ncols = nx + m + na
    if m * (ncols + 1) > size_cap:
        raise LPTooLarge(f"LP tableau {m}×{ncols} exceeds the size cap")
    sign = np.where(neg, -1.0, 1.0)
    T = np.zeros((m, ncols + 1))
    T[:, :nx] = A * sign[:, None]
    T[np.arange(m), nx + np.arange(m)] = sign
    neg_rows = np.flatnonzero(neg)
    art_cols = nx + m + np.arange(na)
    T[neg_rows, art_cols] = 1.0
    T[:, -1] = b * sign
    basis = nx + np.arange(m)
    basis[neg_rows] = art_cols
    if na == 0:
        return np.zeros(nx)
    obj = np.zeros(ncols + 1)
    obj[art_cols] = 1.0
    obj -= T[neg_rows].sum(axis=0)

    eps = 1e-12
    degenerate = 0
    for _ in range(50 * (m + ncols)):
        reduced = obj[:-1]
        if degenerate < m:
            j = int(np.argmin(reduced))
            if reduced[j] >= -eps:
                break
        else:
            entering = np.flatnonzero(reduced < -eps)
            if entering.size == 0:
                break
            j = int(entering[0])
        col = T[:, j]
        rows = np.flatnonzero(col > eps)
        if rows.size == 0:  # cannot happen for a bounded phase-1 objective
            break
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + eps]
        r = int(tied[np.argmin(basis[tied])])
        degenerate = degenerate + 1 if best <= eps else 0
        T[r] /= T[r, j]
        others = T[:, j].copy()
        others[r] = 0.0
        T -= np.outer(others, T[r])
        obj -= obj[j] * T[r]
        basis[r] = j
    if -obj[-1] > tol:
        return None
    x = np.zeros(nx)
    in_x = basis < nx
    x[basis[in_x]] = T[in_x, -1]
    return np.maximum(x, 0.0)
