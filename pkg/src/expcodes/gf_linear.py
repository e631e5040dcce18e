"""Prime-field arithmetic and small linear codes.

Codes here are short (the local codes of a Tanner or AEL construction), so
every decoder is exhaustive: the full codeword table is materialised once and
cached on the code object. Codewords are indexed by the lexicographic rank of
their message vector; that index is the canonical order used for tie-breaking
and for padding local lists.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

ERASED = -1  # erasure mark; never a field element
DEFAULT_ENUM_CAP = 1 << 20
MAX_PRIME = 65521

__all__ = [
    "ERASED",
    "DEFAULT_ENUM_CAP",
    "EnumerationTooLarge",
    "Field",
    "LinearCode",
    "LocalList",
    "field_arithmetic",
    "rref",
    "matrix_rank",
    "nullspace",
    "encode",
    "enumerate_codewords",
    "fractional_distance",
    "radius_to_count",
    "brute_force_list_decode",
    "brute_force_list_recover",
    "nearest_codeword_with_erasures",
    "nearest_indices",
    "min_distance",
    "max_list_size",
    "max_recovery_list_size",
    "random_linear_code",
    "repetition_code",
    "parity_code",
    "save_code",
    "load_code",
]


class EnumerationTooLarge(ValueError):
    """Raised when an exhaustive scan would exceed its configured cap."""


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    for p in range(2, math.isqrt(q) + 1):
        if q % p == 0:
            return False
    return True


@dataclass(frozen=True)
class Field:
    """The prime field GF(q)."""

    q: int

    def __post_init__(self) -> None:
        if not (2 <= self.q <= MAX_PRIME) or not _is_prime(self.q):
            raise ValueError(f"q={self.q} is not a prime in [2, {MAX_PRIME}]")

    def _check(self, *xs: int) -> None:
        for x in xs:
            if not (0 <= x < self.q):
                raise ValueError(f"{x} is not an element of GF({self.q})")

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        self._check(a, b)
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        return (a * b) % self.q

    def inv(self, b: int) -> int:
        self._check(b)
        if b == 0:
            raise ZeroDivisionError("division by zero")
        return pow(b, self.q - 2, self.q)


def field_arithmetic(field: Field, a: int, b: int, op: str) -> int:
    """Apply ``op`` in {add, sub, mul, inv}; ``inv`` ignores ``a``."""
    if op == "add":
        return field.add(a, b)
    if op == "sub":
        return field.sub(a, b)
    if op == "mul":
        return field.mul(a, b)
    if op == "inv":
        return field.inv(b)
    raise ValueError(f"unknown field operation {op!r}")


# ---------------------------------------------------------------------------
# dense linear algebra mod q


def rref(mat: np.ndarray, q: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod q and the pivot columns."""
    a = np.array(mat, dtype=np.int64) % q
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] = (a[r] * pow(int(a[r, c]), q - 2, q)) % q
        factors = a[:, c].copy()
        factors[r] = 0
        hit = np.nonzero(factors)[0]
        if hit.size:
            a[hit] = (a[hit] - np.outer(factors[hit], a[r])) % q
        pivots.append(c)
        r += 1
    return a, pivots


def matrix_rank(mat: np.ndarray, q: int) -> int:
    if np.size(mat) == 0:
        return 0
    return len(rref(mat, q)[1])


def nullspace(mat: np.ndarray, q: int, ncols: int | None = None) -> np.ndarray:
    """Basis (as rows) of {x : mat·x = 0} over GF(q)."""
    mat = np.asarray(mat, dtype=np.int64)
    if ncols is None:
        ncols = mat.shape[1]
    if mat.size == 0:
        return np.eye(ncols, dtype=np.int64)
    red, pivots = rref(mat, q)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for t, fcol in enumerate(free):
        basis[t, fcol] = 1
        for row, pcol in enumerate(pivots):
            basis[t, pcol] = (-red[row, fcol]) % q
    return basis


# ---------------------------------------------------------------------------
# codes


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LinearCode:
    """A k-dimensional subspace of GF(q)^n given by generator and parity matrices."""

    field: Field
    generator: np.ndarray
    parity: np.ndarray
    enum_cap: int = dc_field(default=DEFAULT_ENUM_CAP, compare=False)

    @classmethod
    def from_generator(
        cls, field: Field, generator: Sequence[Sequence[int]] | np.ndarray, enum_cap: int = DEFAULT_ENUM_CAP
    ) -> "LinearCode":
        gen = np.array(generator, dtype=np.int64) % field.q
        if gen.ndim != 2 or gen.shape[0] == 0:
            raise ValueError("generator must be a non-empty k×n matrix")
        if matrix_rank(gen, field.q) != gen.shape[0]:
            raise ValueError("generator rows are linearly dependent")
        par = nullspace(gen, field.q)
        return cls(field, _readonly(gen), _readonly(par), enum_cap)

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def n(self) -> int:
        return int(self.generator.shape[1])

    @property
    def k(self) -> int:
        return int(self.generator.shape[0])

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n)

    @property
    def size(self) -> int:
        return self.q**self.k

    def __repr__(self) -> str:
        return f"LinearCode(q={self.q}, n={self.n}, k={self.k})"

    @cached_property
    def messages(self) -> np.ndarray:
        if self.size > self.enum_cap:
            raise EnumerationTooLarge(f"enumeration too large: {self.size} codewords > cap {self.enum_cap}")
        msgs = np.array(list(itertools.product(range(self.q), repeat=self.k)), dtype=np.int64)
        msgs.setflags(write=False)
        return msgs

    @cached_property
    def codewords(self) -> np.ndarray:
        """All codewords, row t being the encoding of the t-th message in lexicographic order."""
        words = (self.messages @ self.generator) % self.q
        words.setflags(write=False)
        return words

    @cached_property
    def _index(self) -> dict[bytes, int]:
        return {row.tobytes(): t for t, row in enumerate(self.codewords)}

    def index_of(self, word: np.ndarray) -> int:
        """Canonical index of a codeword; raises KeyError for non-codewords."""
        return self._index[np.asarray(word, dtype=np.int64).tobytes()]

    def is_codeword(self, word: Sequence[int] | np.ndarray) -> bool:
        w = np.asarray(word, dtype=np.int64)
        if w.shape != (self.n,) or np.any((w < 0) | (w >= self.q)):
            return False
        return not np.any((self.parity @ w) % self.q)

    def encode(self, message: Sequence[int] | np.ndarray) -> np.ndarray:
        return encode(self, message)


@dataclass(frozen=True)
class LocalList:
    """Ordered codeword indices; the first ``size`` are genuine, the rest padding."""

    code: LinearCode
    indices: tuple[int, ...]
    size: int

    @property
    def entries(self) -> np.ndarray:
        return self.code.codewords[list(self.indices)]

    def __len__(self) -> int:
        return len(self.indices)

    def padded(self, K: int) -> "LocalList":
        """Extend to exactly K entries with the canonically-first unused codewords."""
        if self.size > K:
            raise ValueError(f"local list of size {self.size} exceeds the bound K={K}")
        if K > self.code.size:
            raise ValueError(f"cannot pad to K={K}: code has only {self.code.size} codewords")
        have = set(self.indices[: self.size])
        extra = (t for t in range(self.code.size) if t not in have)
        fill = tuple(itertools.islice(extra, K - self.size))
        return LocalList(self.code, self.indices[: self.size] + fill, self.size)


def encode(code: LinearCode, message: Sequence[int] | np.ndarray) -> np.ndarray:
    msg = np.asarray(message, dtype=np.int64)
    if msg.shape != (code.k,):
        raise ValueError(f"message length {msg.shape} does not match k={code.k}")
    if np.any((msg < 0) | (msg >= code.q)):
        raise ValueError("message contains non-field symbols")
    return (msg @ code.generator) % code.q


def enumerate_codewords(code: LinearCode) -> np.ndarray:
    return code.codewords


def fractional_distance(a: Sequence[int] | np.ndarray, b: Sequence[int] | np.ndarray) -> Fraction:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    if a.size == 0:
        return Fraction(0)
    return Fraction(int(np.count_nonzero(a != b)), a.size)


def radius_to_count(radius: float | Fraction, n: int) -> int:
    """Largest integer t with t/n ≤ radius (robust to float round-off)."""
    if isinstance(radius, Fraction):
        return math.floor(radius * n)
    return math.floor(float(radius) * n + 1e-9)


def _check_plain(code: LinearCode, g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=np.int64)
    if g.shape != (code.n,):
        raise ValueError(f"word length {g.shape} does not match n={code.n}")
    return g


def brute_force_list_decode(code: LinearCode, g: Sequence[int] | np.ndarray, radius: float | Fraction) -> LocalList:
    """All codewords within fractional distance ``radius`` of g, canonically ordered."""
    g = _check_plain(code, g)
    if np.any(g == ERASED):
        raise ValueError("list decoding input must be erasure-free")
    dist = np.count_nonzero(code.codewords != g, axis=1)
    hits = np.nonzero(dist <= radius_to_count(radius, code.n))[0]
    return LocalList(code, tuple(int(t) for t in hits), int(hits.size))


def brute_force_list_recover(
    code: LinearCode, lists: Sequence[Iterable[int]], radius: float | Fraction
) -> LocalList:
    """Codewords whose symbol falls outside the coordinate's set on at most a ``radius`` fraction."""
    if len(lists) != code.n:
        raise ValueError("need one symbol set per coordinate")
    allowed = np.zeros((code.n, code.q), dtype=bool)
    for i, s in enumerate(lists):
        s = list(s)
        if not s:
            raise ValueError(f"coordinate {i} has an empty symbol set")
        allowed[i, s] = True
    cw = code.codewords
    misses = np.count_nonzero(~allowed[np.arange(code.n), cw], axis=1)
    hits = np.nonzero(misses <= radius_to_count(radius, code.n))[0]
    return LocalList(code, tuple(int(t) for t in hits), int(hits.size))


def nearest_indices(codewords: np.ndarray, received: np.ndarray) -> np.ndarray:
    """Per row of ``received``, the first codeword index minimising non-erased disagreements."""
    received = np.atleast_2d(received)
    live = received != ERASED
    diff = (codewords[None, :, :] != received[:, None, :]) & live[:, None, :]
    return np.argmin(diff.sum(axis=2), axis=1)


def nearest_codeword_with_erasures(code: LinearCode, g: Sequence[int] | np.ndarray) -> np.ndarray:
    g = _check_plain(code, g)
    return code.codewords[int(nearest_indices(code.codewords, g)[0])].copy()


def min_distance(code: LinearCode) -> Fraction:
    if code.k == 0:
        raise ValueError("zero-dimensional code has no distance")
    weights = np.count_nonzero(code.codewords[1:], axis=1)
    return Fraction(int(weights.min()), code.n)


def _all_words(q: int, n: int) -> np.ndarray:
    return np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64)


def max_list_size(code: LinearCode, radius: float | Fraction, cap: int = 1 << 24) -> int:
    """Worst-case list size at ``radius`` over every received word in GF(q)^n."""
    if code.q**code.n * code.size > cap:
        raise EnumerationTooLarge("exhaustive list-size scan exceeds cap; supply K explicitly")
    t = radius_to_count(radius, code.n)
    words = _all_words(code.q, code.n)
    best = 0
    for chunk in np.array_split(words, max(1, words.shape[0] // 4096)):
        dist = np.count_nonzero(chunk[:, None, :] != code.codewords[None, :, :], axis=2)
        best = max(best, int((dist <= t).sum(axis=1).max()))
    return best


def max_recovery_list_size(code: LinearCode, k: int, radius: float | Fraction, cap: int = 1 << 24) -> int:
    """Worst-case list-recovery output size with input sets of size ≤ k.

    Larger sets only admit more codewords, so it suffices to scan sets of size
    exactly min(k, q) at every coordinate.
    """
    size = min(k, code.q)
    subsets = list(itertools.combinations(range(code.q), size))
    if len(subsets) ** code.n * code.size > cap:
        raise EnumerationTooLarge("exhaustive list-recovery scan exceeds cap; supply K explicitly")
    masks = np.zeros((len(subsets), code.q), dtype=bool)
    for s, sub in enumerate(subsets):
        masks[s, list(sub)] = True
    # inside[c, i, s]: codeword c's symbol at i lies in subset s
    inside = masks[:, code.codewords].transpose(1, 2, 0)
    t = radius_to_count(radius, code.n)
    best = 0
    for choice in itertools.product(range(len(subsets)), repeat=code.n):
        hit = inside[:, np.arange(code.n), list(choice)]
        best = max(best, int(((code.n - hit.sum(axis=1)) <= t).sum()))
    return best


def random_linear_code(field: Field, n: int, k: int, seed: int, attempts: int = 1000) -> LinearCode:
    """Uniform full-rank k×n generator, resampled on rank deficiency."""
    if not (1 <= k <= n):
        raise ValueError("need 1 ≤ k ≤ n")
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        gen = rng.integers(0, field.q, size=(k, n))
        if matrix_rank(gen, field.q) == k:
            return LinearCode.from_generator(field, gen)
    raise RuntimeError("could not sample a full-rank generator")


def repetition_code(field: Field, n: int) -> LinearCode:
    return LinearCode.from_generator(field, np.ones((1, n), dtype=np.int64))


def parity_code(field: Field, n: int) -> LinearCode:
    """The [n, n-1, 2] code of words whose symbols sum to zero."""
    gen = np.zeros((n - 1, n), dtype=np.int64)
    gen[:, : n - 1] = np.eye(n - 1, dtype=np.int64)
    gen[:, n - 1] = field.q - 1
    return LinearCode.from_generator(field, gen)


def save_code(code: LinearCode, path: str | Path) -> None:
    lines = [f"{code.q} {code.n} {code.k}"]
    lines += [" ".join(str(int(x)) for x in row) for row in code.generator]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_code(path: str | Path) -> LinearCode:
    rows = [ln.split() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 3:
        raise ValueError(f"{path}: header must be 'q n k'")
    q, n, k = (int(x) for x in rows[0])
    gen = np.array([[int(x) for x in r] for r in rows[1:]], dtype=np.int64)
    if gen.shape != (k, n):
        raise ValueError(f"{path}: expected {k} generator rows of length {n}")
    return LinearCode.from_generator(Field(q), gen)
