"""Exact integer lattice linear algebra.

Everything here works on Python ints, so nothing overflows. Matrices act on
row vectors: a lattice is the row span of a matrix, and a solution of
``x M = b`` is a row vector ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Optional, Sequence

__all__ = [
    "IntMatrix",
    "xgcd",
    "hnf",
    "snf",
    "kernel_mod",
    "solve_mod",
    "hnf_rows",
    "lattice_reduce",
    "lattice_contains",
    "lattice_intersection",
    "integer_kernel",
    "solve_integer",
]


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix stored row-major."""

    nrows: int
    ncols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.nrows * self.ncols:
            raise ValueError("entries length must equal rows * cols")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], ncols: Optional[int] = None) -> "IntMatrix":
        rows = [tuple(int(v) for v in r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix")
        return cls(len(rows), ncols, tuple(v for r in rows for v in r))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.from_rows(_identity(n), n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "IntMatrix":
        return cls(nrows, ncols, (0,) * (nrows * ncols))

    def row(self, i: int) -> tuple:
        return self.entries[i * self.ncols:(i + 1) * self.ncols]

    def rows(self) -> list:
        return [list(self.row(i)) for i in range(self.nrows)]

    def tolist(self) -> list:
        return self.rows()

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.ncols + j]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        return IntMatrix.from_rows(_matmul(self.rows(), other.rows(), other.ncols), other.ncols)

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_rows([[self[i, j] for i in range(self.nrows)] for j in range(self.ncols)],
                                   self.nrows)

    def det(self) -> int:
        if self.nrows != self.ncols:
            raise ValueError("determinant of a non-square matrix")
        return bareiss_det(self.rows())

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __repr__(self):
        return f"IntMatrix({self.rows()})"


def _as_rows(M) -> tuple[list, int]:
    if isinstance(M, IntMatrix):
        return M.rows(), M.ncols
    rows = [list(map(int, r)) for r in M]
    ncols = len(rows[0]) if rows else 0
    return rows, ncols


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _matmul(A, B, ncols):
    return [[sum(a * B[k][j] for k, a in enumerate(row) if a) for j in range(ncols)] for row in A]


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, s, t)`` with ``s*a + t*b == g == gcd(a, b) >= 0``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


def bareiss_det(rows) -> int:
    """Fraction-free determinant."""
    A = [list(r) for r in rows]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k]), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def _hnf_core(rows, ncols, track=True):
    A = [r[:] for r in rows]
    m = len(A)
    U = _identity(m) if track else None
    pr = 0
    for c in range(ncols):
        if pr == m:
            break
        for i in range(pr + 1, m):
            b = A[i][c]
            if not b:
                continue
            a = A[pr][c]
            g, s, t = xgcd(a, b)
            u, v = a // g, b // g
            rp, ri = A[pr], A[i]
            A[pr] = [s * x + t * y for x, y in zip(rp, ri)]
            A[i] = [u * y - v * x for x, y in zip(rp, ri)]
            if track:
                up, ui = U[pr], U[i]
                U[pr] = [s * x + t * y for x, y in zip(up, ui)]
                U[i] = [u * y - v * x for x, y in zip(up, ui)]
        p = A[pr][c]
        if not p:
            continue
        if p < 0:
            A[pr] = [-x for x in A[pr]]
            if track:
                U[pr] = [-x for x in U[pr]]
            p = -p
        for i in range(pr):
            q = A[i][c] // p
            if q:
                A[i] = [x - q * y for x, y in zip(A[i], A[pr])]
                if track:
                    U[i] = [x - q * y for x, y in zip(U[i], U[pr])]
        pr += 1
    return A, U, pr


def hnf(M) -> tuple[IntMatrix, IntMatrix]:
    """Row Hermite normal form ``H = U M`` with ``U`` unimodular.

    Pivots are positive, entries above a pivot lie in ``[0, pivot)`` and zero
    rows come last, so equal row lattices give identical ``H``.
    """
    rows, ncols = _as_rows(M)
    A, U, _ = _hnf_core(rows, ncols)
    return IntMatrix.from_rows(A, ncols), IntMatrix.from_rows(U, len(rows))


def hnf_rows(rows, ncols: Optional[int] = None) -> tuple:
    """Nonzero HNF rows of the lattice spanned by ``rows``, as a tuple of tuples."""
    rows = [list(map(int, r)) for r in rows]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    A, _, rank = _hnf_core(rows, ncols, track=False)
    return tuple(tuple(r) for r in A[:rank])


def snf(M) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form ``S = U M V`` with ``d1 | d2 | ...`` all nonnegative."""
    rows, ncols = _as_rows(M)
    m = len(rows)
    A = [r[:] for r in rows]
    U = _identity(m)
    V = _identity(ncols)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row dst += q * row src
        A[dst] = [x + q * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x + q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for r in A:
            r[dst] += q * r[src]
        for r in V:
            r[dst] += q * r[src]

    t = 0
    while t < min(m, ncols):
        best = None
        for i in range(t, m):
            for j in range(t, ncols):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, ncols):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    if A[t][j]:
                        dirty = True
            if dirty:
                best = None
                for i in range(t, m):
                    for j in range(t, ncols):
                        if (i == t or j == t) and A[i][j] and (
                                best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                            best = (i, j)
                swap_rows(t, best[0])
                swap_cols(t, best[1])
                continue
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, ncols):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return (IntMatrix.from_rows(A, ncols), IntMatrix.from_rows(U, m),
            IntMatrix.from_rows(V, ncols))


def lattice_reduce(vec, basis) -> list:
    """Reduce ``vec`` against HNF rows: pivot coordinates land in ``[0, pivot)``."""
    v = list(vec)
    for row in basis:
        c = next(j for j, x in enumerate(row) if x)
        q = v[c] // row[c]
        if q:
            v = [x - q * y for x, y in zip(v, row)]
    return v


def lattice_contains(basis, vec) -> bool:
    """Membership of ``vec`` in the lattice with HNF rows ``basis``."""
    v = list(vec)
    for row in basis:
        c = next(j for j, x in enumerate(row) if x)
        if any(v[:c]):
            return False
        q, r = divmod(v[c], row[c])
        if r:
            return False
        if q:
            v = [x - q * y for x, y in zip(v, row)]
    return not any(v)


def integer_kernel(rows, ncols: Optional[int] = None) -> tuple:
    """HNF basis of ``{x in Z^m : x M = 0}``."""
    rows = [list(map(int, r)) for r in rows]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    A, U, rank = _hnf_core(rows, ncols)
    return hnf_rows(U[rank:], len(rows))


def _stacked(rows, ncols, n):
    if n == 0:
        return [list(map(int, r)) for r in rows]
    return [list(map(int, r)) for r in rows] + [[n if i == j else 0 for j in range(ncols)]
                                                  for i in range(ncols)]


def _kernel_lattice(rows, ncols, n):
    m = len(rows)
    K = integer_kernel(_stacked(rows, ncols, n), ncols)
    gens = [list(r[:m]) for r in K]
    if n:
        gens += [[n if i == j else 0 for j in range(m)] for i in range(m)]
    return hnf_rows(gens, m)


def kernel_mod(M, n: int) -> IntMatrix:
    """Generators of ``{x : x M = 0 (mod n)}``; ``n = 0`` means over Z.

    Over Z the rows are a lattice basis in HNF. Modulo ``n`` the rows are the
    HNF of the solution lattice reduced mod ``n`` with zero rows dropped.
    """
    if n < 0:
        raise ValueError("modulus must be >= 0")
    rows, ncols = _as_rows(M)
    m = len(rows)
    K = _kernel_lattice(rows, ncols, n)
    if n:
        K = [[x % n for x in r] for r in K]
        K = [r for r in K if any(r)]
    return IntMatrix.from_rows(K, m)


def solve_integer(rows, b, ncols: Optional[int] = None) -> Optional[list]:
    """Some integer ``x`` with ``x M = b`` or ``None``; no normalization."""
    rows = [list(map(int, r)) for r in rows]
    if ncols is None:
        ncols = len(b)
    m = len(rows)
    A, U, rank = _hnf_core(rows, ncols)
    z = [0] * rank
    t = 0
    for j in range(ncols):
        acc = b[j] - sum(z[i] * A[i][j] for i in range(t))
        if t < rank and A[t][j] and all(A[t][jj] == 0 for jj in range(j)):
            q, r = divmod(acc, A[t][j])
            if r:
                return None
            z[t] = q
            t += 1
        elif acc:
            return None
    return [sum(z[i] * U[i][k] for i in range(rank)) for k in range(m)]


def solve_mod(M, b, n: int) -> Optional[list]:
    """Solve ``x M = b (mod n)`` (``n = 0``: over Z).

    Returns the solution reduced against the HNF of the solution kernel, which
    is the lexicographically smallest nonnegative representative in the pivot
    coordinates, or ``None`` when no solution exists.
    """
    rows, ncols = _as_rows(M)
    b = [int(v) for v in b]
    if len(b) != ncols:
        raise ValueError("dimension mismatch")
    m = len(rows)
    x = solve_integer(_stacked(rows, ncols, n), b, ncols)
    if x is None:
        return None
    x = x[:m]
    K = _kernel_lattice(rows, ncols, n)
    return lattice_reduce(x, K)


def lattice_intersection(B1, B2, dim: int) -> tuple:
    """HNF basis of the intersection of two integer row lattices in ``Z^dim``."""
    B1 = [list(r) for r in B1]
    B2 = [list(r) for r in B2]
    if not B1 or not B2:
        return ()
    stacked = B1 + [[-x for x in r] for r in B2]
    K = integer_kernel(stacked, dim)
    k1 = len(B1)
    gens = [[sum(c * B1[i][j] for i, c in enumerate(r[:k1])) for j in range(dim)] for r in K]
    return hnf_rows(gens, dim)


def det_hnf(basis) -> int:
    """Product of pivots of a square HNF basis (the lattice index in ``Z^n``)."""
    d = 1
    for row in basis:
        d *= next(x for x in row if x)
    return d


def content(values) -> int:
    g = 0
    for v in values:
        g = gcd(g, v)
    return g
