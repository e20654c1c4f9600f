"""The two computable ring families.

* Imaginary quadratic fields and their orders ``O_D = Z + wZ`` with
  ``w = (D + sqrt(D)) / 2``. Elements of the field are :class:`QuadElt`.
* Rings given by structure constants on an additive group
  ``Z/d_1 + ... + Z/d_r`` (``d_i = 0`` means a free ``Z`` summand). Finite
  rings are the case where every ``d_i >= 2``; free summands let the same
  machinery hold idealizations and polynomial quotients over quadratic orders.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd, isqrt, lcm, prod
from typing import Optional, Sequence

import numpy as np

from .errors import (
    InconsistentPresentation,
    InvalidDiscriminant,
    InvalidMorphism,
    SizeBoundExceeded,
    UnsupportedRing,
)
from .intlat import hnf_rows, integer_kernel, lattice_contains, snf, solve_integer

DEFAULT_ENUM_BOUND = 512
DEFAULT_SCAN_BOUND = 4096


def enum_bound() -> int:
    """Ambient size bound for exhaustive enumeration of invertible ideals."""
    env = os.environ.get("CLASSEXT_MAX_ENUM")
    return int(env) if env else DEFAULT_ENUM_BOUND


def scan_bound() -> int:
    """Size bound for ring-structure scans (units, nilpotents, idempotents)."""
    return max(DEFAULT_SCAN_BOUND, enum_bound())


# ---------------------------------------------------------------------------
# quadratic fields and orders


def _squarefree_kernel(n: int) -> tuple[int, int]:
    """Write ``n = s**2 * k`` with ``k`` squarefree; return ``(k, s)``."""
    sign = -1 if n < 0 else 1
    m = abs(n)
    k, s = 1, 1
    p = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            k *= p
        p += 1
    k *= m
    return sign * k, s


class QuadElt:
    """The number ``(u + v*sqrt(d)) / w`` in lowest terms, ``d`` squarefree."""

    __slots__ = ("d", "u", "v", "w")

    def __init__(self, d: int, u: int, v: int = 0, w: int = 1):
        if w == 0:
            raise ZeroDivisionError("zero denominator")
        if w < 0:
            u, v, w = -u, -v, -w
        g = gcd(gcd(u, v), w)
        self.d, self.u, self.v, self.w = d, u // g, v // g, w // g

    @classmethod
    def from_fractions(cls, d: int, a: Fraction, b: Fraction) -> "QuadElt":
        """``a + b*sqrt(d)`` with rational ``a, b``."""
        a, b = Fraction(a), Fraction(b)
        w = lcm(a.denominator, b.denominator)
        return cls(d, a.numerator * (w // a.denominator), b.numerator * (w // b.denominator), w)

    def _coerce(self, other) -> "QuadElt":
        if isinstance(other, QuadElt):
            if other.d != self.d:
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, Fraction):
            return QuadElt(self.d, other.numerator, 0, other.denominator)
        if isinstance(other, int):
            return QuadElt(self.d, other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElt(self.d, self.u * o.w + o.u * self.w, self.v * o.w + o.v * self.w, self.w * o.w)

    __radd__ = __add__

    def __neg__(self):
        return QuadElt(self.d, -self.u, -self.v, self.w)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElt(self.d, self.u * o.u + self.d * self.v * o.v, self.u * o.v + self.v * o.u,
                       self.w * o.w)

    __rmul__ = __mul__

    def conj(self) -> "QuadElt":
        return QuadElt(self.d, self.u, -self.v, self.w)

    def norm(self) -> Fraction:
        return Fraction(self.u * self.u - self.d * self.v * self.v, self.w * self.w)

    def trace(self) -> Fraction:
        return Fraction(2 * self.u, self.w)

    def inverse(self) -> "QuadElt":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conj()
        return QuadElt(self.d, c.u * n.denominator, c.v * n.denominator, c.w * n.numerator)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        r, b = QuadElt(self.d, 1), self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, QuadElt):
            return NotImplemented
        return (self.d, self.u, self.v, self.w) == (other.d, other.u, other.v, other.w)

    def __hash__(self):
        return hash((self.d, self.u, self.v, self.w))

    def __str__(self):
        root = f"√{self.d}"
        if self.v == 0:
            num = str(self.u)
        else:
            coef = "" if abs(self.v) == 1 else str(abs(self.v))
            if self.u == 0:
                num = ("-" if self.v < 0 else "") + coef + root
            else:
                num = f"{self.u}{'-' if self.v < 0 else '+'}{coef}{root}"
        if self.w == 1:
            return num
        if self.u != 0 and self.v != 0 or self.u < 0 or self.v < 0:
            return f"({num})/{self.w}"
        return f"{num}/{self.w}"

    def __repr__(self):
        return f"QuadElt({self})"

    def to_json(self) -> list:
        return [str(self.u), str(self.v), str(self.w)]


class QuadField:
    """``Q(sqrt(d))`` for squarefree ``d < 0`` with basis ``(1, w0)`` of its maximal order."""

    def __init__(self, d: int):
        if d >= 0:
            raise InvalidDiscriminant("only imaginary quadratic fields are supported")
        if _squarefree_kernel(d)[1] != 1:
            raise InvalidDiscriminant(f"{d} is not squarefree")
        self.d = d
        self.D0 = d if d % 4 == 1 else 4 * d
        # w0^2 = tr * w0 - nm
        self.tr = self.D0
        self.nm = (self.D0 * self.D0 - self.D0) // 4

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.d == self.d

    def __hash__(self):
        return hash(("field", self.d))

    def __repr__(self):
        return f"QuadField(√{self.d})"

    def elt(self, x, y=0) -> QuadElt:
        """The element ``x + y*w0``."""
        x, y = Fraction(x), Fraction(y)
        if self.D0 == self.d:
            return QuadElt.from_fractions(self.d, x + y * Fraction(self.d, 2), y / 2)
        return QuadElt.from_fractions(self.d, x + 2 * self.d * y, y)

    def coords(self, e: QuadElt) -> tuple[Fraction, Fraction]:
        if e.d != self.d:
            raise ValueError("element of another field")
        if self.D0 == self.d:
            return Fraction(e.u - e.v * self.d, e.w), Fraction(2 * e.v, e.w)
        return Fraction(e.u - 2 * self.d * e.v, e.w), Fraction(e.v, e.w)

    def mul_coords(self, p, q):
        x1, y1 = p
        x2, y2 = q
        yy = y1 * y2
        return (x1 * x2 - self.nm * yy, x1 * y2 + x2 * y1 + self.tr * yy)

    def mul_matrix(self, p):
        """Rows are the coordinates of ``p*1`` and ``p*w0``."""
        return [list(p), list(self.mul_coords(p, (0, 1)))]


@lru_cache(maxsize=None)
def quad_field(d: int) -> QuadField:
    return QuadField(d)


@dataclass(frozen=True)
class QuadOrder:
    """Descriptor of the order ``O_D = Z + wZ`` with ``w = (D + sqrt(D))/2``."""

    D: int

    def __post_init__(self):
        D = self.D
        if not isinstance(D, int) or D >= 0:
            raise InvalidDiscriminant(f"discriminant must be a negative integer, got {D!r}")
        if D % 4 not in (0, 1):
            raise InvalidDiscriminant(f"{D} is not 0 or 1 mod 4")
        # D < 0 is never a perfect square.

    @cached_property
    def _split(self):
        k, s = _squarefree_kernel(self.D)
        D0 = k if k % 4 == 1 else 4 * k
        f2, r = divmod(self.D, D0)
        f = isqrt(f2)
        assert r == 0 and f * f == f2
        return k, D0, f

    @property
    def d(self) -> int:
        return self._split[0]

    @property
    def D0(self) -> int:
        return self._split[1]

    @property
    def conductor(self) -> int:
        return self._split[2]

    @property
    def field(self) -> QuadField:
        return quad_field(self.d)

    @property
    def is_maximal(self) -> bool:
        return self.conductor == 1

    @property
    def omega(self) -> QuadElt:
        # w = (D + sqrt(D))/2 and sqrt(D) = s*sqrt(d)
        s = isqrt(self.D // self.d)
        return QuadElt(self.d, self.D, s, 2)

    @property
    def omega_shift(self) -> int:
        """``t`` with ``w = t + f*w0``."""
        f = self.conductor
        return f * self.D0 * (f - 1) // 2

    def basis(self) -> tuple[QuadElt, QuadElt]:
        return QuadElt(self.d, 1), self.omega

    def lattice(self) -> tuple:
        """HNF rows of the order in the field coordinates ``(1, w0)``."""
        return ((1, 0), (0, self.conductor))

    def contains(self, e: QuadElt) -> bool:
        x, y = self.field.coords(e)
        if x.denominator != 1 or y.denominator != 1:
            return False
        return y.numerator % self.conductor == 0

    def units(self) -> list[QuadElt]:
        d = self.d
        if self.D == -4:
            return [QuadElt(d, 1), QuadElt(d, -1), QuadElt(d, 0, 1), QuadElt(d, 0, -1)]
        if self.D == -3:
            return [QuadElt(d, 1), QuadElt(d, -1), QuadElt(d, 1, 1, 2), QuadElt(d, -1, -1, 2),
                    QuadElt(d, -1, 1, 2), QuadElt(d, 1, -1, 2)]
        return [QuadElt(d, 1), QuadElt(d, -1)]

    def is_unit(self, e: QuadElt) -> tuple[bool, Optional[QuadElt]]:
        if not self.contains(e) or e.is_zero():
            return False, None
        inv = e.inverse()
        return (True, inv) if self.contains(inv) else (False, None)

    def element_coords(self, e: QuadElt) -> tuple[Fraction, Fraction]:
        """Coordinates in the order's own basis ``(1, w)``."""
        x, y = self.field.coords(e)
        f, t = self.conductor, self.omega_shift
        b = y / f
        return x - b * t, b

    def from_coords(self, a, b) -> QuadElt:
        return QuadElt(self.d, 1) * Fraction(a) + self.omega * Fraction(b)

    def algebra(self) -> "StructAlgebra":
        """The order as a ring on ``Z + Z`` with basis ``(1, w)``."""
        D = self.D
        mul = [[[1, 0], [0, 1]], [[0, 1], [-(D * D - D) // 4, D]]]
        return StructAlgebra((0, 0), mul, (1, 0), tags={"kind": "quad_order", "D": D},
                             name=f"O({D})")

    def __str__(self):
        return f"O({self.D})"

    def to_json(self) -> dict:
        return {"kind": "quad_order", "D": str(self.D)}


def make_quad_order(D: int) -> QuadOrder:
    return QuadOrder(int(D))


def order_embedding_rows(A: QuadOrder, B: QuadOrder) -> tuple:
    """HNF rows of ``A`` inside ``B``'s basis ``(1, w_B)``; requires ``A`` a suborder of ``B``."""
    if A.d != B.d or A.conductor % B.conductor:
        raise UnsupportedRing(f"{A} is not a suborder of {B}")
    k = A.conductor // B.conductor
    return hnf_rows([[1, 0], [A.omega_shift - k * B.omega_shift, k]], 2)


# ---------------------------------------------------------------------------
# rings given by structure constants


class StructAlgebra:
    """Commutative ring on ``Z/d_1 + ... + Z/d_r`` with ``e_i e_j = sum_k c[i][j][k] e_k``.

    ``orders[i] == 0`` marks a free summand. Constructors verify
    well-definedness, commutativity, associativity and the unity law.
    """

    def __init__(self, orders: Sequence[int], mul, one: Sequence[int], tags: Optional[dict] = None,
                 name: Optional[str] = None, check: bool = True):
        self.orders = tuple(int(d) for d in orders)
        r = len(self.orders)
        if r == 0:
            raise InconsistentPresentation("rank must be >= 1")
        if any(d < 0 or d == 1 for d in self.orders):
            raise InconsistentPresentation("orders must be 0 or >= 2")
        if len(mul) != r or any(len(row) != r or any(len(v) != r for v in row) for row in mul):
            raise InconsistentPresentation("structure tensor has the wrong shape")
        self.mul_tensor = tuple(tuple(tuple(self.reduce(v)) for v in row) for row in mul)
        self.one = tuple(self.reduce(one))
        self.tags = dict(tags or {})
        self.name = name
        if check:
            self.validate()

    # -- basic data ---------------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def is_finite(self) -> bool:
        return all(self.orders)

    @property
    def size(self) -> Optional[int]:
        return prod(self.orders) if self.is_finite else None

    @property
    def exponent(self) -> int:
        """Additive exponent (``0`` when there is a free summand)."""
        return lcm(*self.orders) if self.is_finite else 0

    def relation_rows(self) -> list:
        r = self.rank
        return [[d if i == j else 0 for j in range(r)] for i, d in enumerate(self.orders) if d]

    def reduce(self, v) -> tuple:
        return tuple(int(x) % d if d else int(x) for x, d in zip(v, self.orders))

    def zero(self) -> tuple:
        return (0,) * self.rank

    def basis_vector(self, i: int) -> tuple:
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def scalar(self, k: int) -> tuple:
        return self.reduce([k * x for x in self.one])

    def element(self, x) -> tuple:
        """Coerce an int (multiple of 1) or a coordinate list."""
        if isinstance(x, int):
            return self.scalar(x)
        x = tuple(int(v) for v in x)
        if len(x) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates, got {len(x)}")
        return self.reduce(x)

    # -- arithmetic ---------------------------------------------------------
    def add(self, x, y) -> tuple:
        return self.reduce([a + b for a, b in zip(x, y)])

    def sub(self, x, y) -> tuple:
        return self.reduce([a - b for a, b in zip(x, y)])

    def neg(self, x) -> tuple:
        return self.reduce([-a for a in x])

    def scale(self, k: int, x) -> tuple:
        return self.reduce([k * a for a in x])

    def mul_matrix(self, x) -> list:
        """Rows are ``x * e_j``."""
        r = self.rank
        rows = [[0] * r for _ in range(r)]
        c = self.mul_tensor
        for i, xi in enumerate(x):
            if not xi:
                continue
            ci = c[i]
            for j in range(r):
                row, cij = rows[j], ci[j]
                for k in range(r):
                    if cij[k]:
                        row[k] += xi * cij[k]
        return [list(self.reduce(row)) for row in rows]

    def mul(self, x, y) -> tuple:
        r = self.rank
        out = [0] * r
        c = self.mul_tensor
        for i, xi in enumerate(x):
            if not xi:
                continue
            ci = c[i]
            for j, yj in enumerate(y):
                if not yj:
                    continue
                s = xi * yj
                for k, v in enumerate(ci[j]):
                    if v:
                        out[k] += s * v
        return self.reduce(out)

    def power(self, x, e: int) -> tuple:
        out, b = self.one, tuple(x)
        while e:
            if e & 1:
                out = self.mul(out, b)
            b = self.mul(b, b)
            e >>= 1
        return out

    # -- verification -------------------------------------------------------
    def validate(self) -> None:
        r, c = self.rank, self.mul_tensor
        for i, d in enumerate(self.orders):
            if not d:
                continue
            for j in range(r):
                if any(v for v in self.reduce([d * v for v in c[i][j]])):
                    raise InconsistentPresentation(f"product e{i}*e{j} is not killed by {d}")
        for i in range(r):
            for j in range(i + 1, r):
                if c[i][j] != c[j][i]:
                    raise InconsistentPresentation(f"not commutative at ({i},{j})")
        basis = [self.basis_vector(i) for i in range(r)]
        for i in range(r):
            for j in range(r):
                ij = c[i][j]
                for k in range(r):
                    if self.mul(ij, basis[k]) != self.mul(basis[i], c[j][k]):
                        raise InconsistentPresentation(f"not associative at ({i},{j},{k})")
        for i in range(r):
            if self.mul(self.one, basis[i]) != basis[i]:
                raise InconsistentPresentation("unity law fails")

    # -- enumeration --------------------------------------------------------
    def check_size(self, bound: Optional[int] = None) -> int:
        if not self.is_finite:
            raise UnsupportedRing("ring is infinite")
        bound = scan_bound() if bound is None else bound
        if self.size > bound:
            raise SizeBoundExceeded(f"ring size {self.size} exceeds bound {bound}")
        return self.size

    @cached_property
    def strides(self) -> np.ndarray:
        s = [1]
        for d in self.orders[:-1]:
            s.append(s[-1] * d)
        return np.array(s, dtype=np.int64)

    @cached_property
    def elements_array(self) -> np.ndarray:
        """All elements as rows; row ``k`` is the element of index ``k``."""
        self.check_size()
        grids = np.indices(self.orders[::-1]).reshape(self.rank, -1)[::-1].T
        return np.ascontiguousarray(grids.astype(np.int64))

    def elements(self) -> list:
        return [tuple(int(v) for v in row) for row in self.elements_array]

    def index(self, x) -> int:
        return int(sum(int(a) * int(s) for a, s in zip(x, self.strides)))

    def indices(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X) % np.array(self.orders)) @ self.strides

    @cached_property
    def _tensor(self) -> np.ndarray:
        return np.array(self.mul_tensor, dtype=np.int64)

    def mul_rows(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Row-wise products of two element arrays."""
        Z = np.einsum("ai,aj,ijk->ak", X, Y, self._tensor, optimize=True)
        return Z % np.array(self.orders)

    @cached_property
    def mul_table(self) -> np.ndarray:
        """``T[a, b]`` is the index of ``element(a) * element(b)``."""
        self.check_size(max(enum_bound(), 1024))
        E = self.elements_array
        r = self.rank
        P = (E @ self._tensor.reshape(r, r * r)).reshape(len(E), r, r)
        Z = np.einsum("bj,ajk->abk", E, P, optimize=True) % np.array(self.orders)
        return (Z @ self.strides).astype(np.int64)

    @cached_property
    def unit_mask(self) -> np.ndarray:
        return (self.mul_table == self.index(self.one)).any(axis=1)

    def units(self) -> list:
        E = self.elements_array
        return [tuple(int(v) for v in E[k]) for k in np.flatnonzero(self.unit_mask)]

    # -- units and zero-divisors -------------------------------------------
    def is_unit(self, x) -> tuple[bool, Optional[tuple]]:
        """``(True, inverse)`` or ``(False, None)``; exact for every ring here."""
        M = self.mul_matrix(x)
        y = solve_integer(M + self.relation_rows(), list(self.one), self.rank)
        if y is None:
            return False, None
        return True, self.reduce(y[: self.rank])

    def annihilator(self, x) -> tuple:
        """HNF lattice of ``{y : xy = 0}`` (containing the relation lattice)."""
        r = self.rank
        M = self.mul_matrix(x)
        rel = self.relation_rows()
        K = integer_kernel(M + rel, r)
        return hnf_rows([row[:r] for row in K] + rel, r)

    def is_zero_divisor(self, x) -> bool:
        """True iff ``xy = 0`` for some ``y != 0`` (``0`` counts as a zero-divisor)."""
        return self.annihilator(x) != hnf_rows(self.relation_rows(), self.rank)

    # -- ideals -------------------------------------------------------------
    def ideal(self, gens) -> tuple:
        """HNF lattice of the ideal generated by ``gens`` (relations included)."""
        rows = []
        for g in gens:
            rows.extend(self.mul_matrix(self.element(g)))
        return hnf_rows(rows + self.relation_rows(), self.rank)

    def zero_lattice(self) -> tuple:
        return hnf_rows(self.relation_rows(), self.rank)

    def whole_lattice(self) -> tuple:
        return hnf_rows([self.basis_vector(i) for i in range(self.rank)], self.rank)

    def lattice_elements(self, lattice) -> np.ndarray:
        """Indices of the elements lying in a full-rank lattice (finite rings only)."""
        self.check_size()
        H = np.array(lattice, dtype=np.int64)
        ranges = [range(d // int(H[i, i])) for i, d in enumerate(self.orders)]
        C = np.array(list(itertools.product(*ranges)), dtype=np.int64).reshape(-1, self.rank)
        return np.unique(self.indices(C @ H))

    def _nilpotent_mask(self) -> np.ndarray:
        E = self.elements_array
        X = E.copy()
        steps = max(1, int(self.size - 1).bit_length()) + 1
        for _ in range(steps):
            X = self.mul_rows(X, X)
        return ~X.any(axis=1)

    def nilradical(self) -> tuple:
        """HNF lattice of the nilradical."""
        if not self.is_finite:
            return _infinite_nilradical(self)
        E = self.elements_array
        nil = E[self._nilpotent_mask()]
        return hnf_rows([list(map(int, row)) for row in nil] + self.relation_rows(), self.rank)

    def idempotents(self) -> list:
        E = self.elements_array
        mask = (self.mul_rows(E, E) == E).all(axis=1)
        return [tuple(int(v) for v in row) for row in E[mask]]

    def primitive_idempotents(self) -> list:
        ids = [e for e in self.idempotents() if any(e)]
        prim = []
        for e in ids:
            if not any(f != e and self.mul(f, e) == f for f in ids):
                prim.append(e)
        return prim

    def maximal_ideals(self) -> list:
        """All maximal ideals of a finite ring, as HNF lattices.

        Finite commutative rings are products of local rings; each primitive
        idempotent ``e`` cuts out the maximal ideal ``(1 - e)R + nil(R)``.
        """
        self.check_size()
        nil = self.nilradical()
        out = []
        for e in self.primitive_idempotents():
            comp = self.sub(self.one, e)
            rows = list(nil) + self.mul_matrix(comp)
            out.append(hnf_rows(rows, self.rank))
        return sorted(set(out))

    def lattice_contains(self, lattice, x) -> bool:
        return lattice_contains(lattice, self.reduce(x))

    def is_maximal_ideal(self, lattice) -> bool:
        if lattice == self.whole_lattice():
            return False
        Q, _ = quotient(self, lattice)
        Q.check_size()
        return bool(Q.unit_mask.sum() == Q.size - 1)

    def __repr__(self):
        return self.name or f"StructAlgebra(orders={self.orders})"

    def to_json(self) -> dict:
        return {"kind": "finite" if self.is_finite else "struct", "n": str(self.exponent),
                "orders": [str(d) for d in self.orders], "rank": str(self.rank),
                "mul": [[[str(v) for v in cell] for cell in row] for row in self.mul_tensor],
                "one": [str(v) for v in self.one]}


def _infinite_nilradical(R: StructAlgebra) -> tuple:
    kind = R.tags.get("kind")
    r = R.rank
    if kind == "quad_order":
        return R.zero_lattice()
    if kind == "idealization":
        base = R.tags["base"]
        k = base.rank
        nil_base = base.nilradical()
        rows = [list(row) + [0] * (r - k) for row in nil_base]
        rows += [R.basis_vector(i) for i in range(k, r)]
        return hnf_rows(rows + R.relation_rows(), r)
    if kind == "trunc_poly":
        base = R.tags["base"]
        k = base.rank
        rows = [list(row) + [0] * (r - k) for row in base.nilradical()]
        rows += [R.basis_vector(i) for i in range(k, r)]
        return hnf_rows(rows + R.relation_rows(), r)
    raise UnsupportedRing(f"nilradical of infinite ring {R!r} is not computable here")


# ---------------------------------------------------------------------------
# ring maps


@dataclass(frozen=True)
class RingMap:
    """A ring morphism given by images of the source basis vectors."""

    source: StructAlgebra
    target: StructAlgebra
    images: tuple

    def __call__(self, x) -> tuple:
        out = [0] * self.target.rank
        for xi, img in zip(x, self.images):
            if xi:
                for k, v in enumerate(img):
                    out[k] += xi * v
        return self.target.reduce(out)

    def validate(self) -> None:
        S, T = self.source, self.target
        if len(self.images) != S.rank or any(len(img) != T.rank for img in self.images):
            raise InvalidMorphism("image list has the wrong shape")
        for i, d in enumerate(S.orders):
            if d and any(T.scale(d, self.images[i])):
                raise InvalidMorphism(f"relation {d}*e{i} is not sent to zero")
        if self(S.one) != T.one:
            raise InvalidMorphism("unity is not preserved")
        for i in range(S.rank):
            for j in range(i, S.rank):
                if self(S.mul_tensor[i][j]) != T.mul(self.images[i], self.images[j]):
                    raise InvalidMorphism(f"not multiplicative on e{i}*e{j}")

    def compose(self, after: "RingMap") -> "RingMap":
        """``after o self``."""
        return RingMap(self.source, after.target, tuple(after(img) for img in self.images))

    def image_lattice(self, lattice) -> tuple:
        rows = [self(row) for row in lattice]
        return hnf_rows([list(r) for r in rows] + self.target.relation_rows(), self.target.rank)


def identity_map(R: StructAlgebra) -> RingMap:
    return RingMap(R, R, tuple(R.basis_vector(i) for i in range(R.rank)))


# ---------------------------------------------------------------------------
# constructions


def _quotient_data(m: int, relations):
    """SNF data for ``Z^m / span(relations)``.

    Returns ``(orders, proj, lift)``: ``proj`` is ``m x r'`` and sends ambient
    coordinates to quotient coordinates, ``lift`` is ``r' x m``.
    """
    G = [list(r) for r in hnf_rows(relations, m)] if relations else []
    if not G:
        ident = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
        return [0] * m, ident, ident
    S, _, V = snf(G)
    diag = [S[i, i] if i < S.nrows else 0 for i in range(m)]
    keep = [i for i in range(m) if diag[i] != 1]
    Vr = V.rows()
    Vinv = solve_unimodular_inverse(Vr)
    proj = [[Vr[a][i] for i in keep] for a in range(m)]
    lift = [Vinv[i] for i in keep]
    return [diag[i] for i in keep], proj, lift


def solve_unimodular_inverse(V) -> list:
    n = len(V)
    inv = []
    for i in range(n):
        e = [1 if j == i else 0 for j in range(n)]
        x = solve_integer(V, e, n)
        inv.append(x)
    return inv


def _build_quotient(m, relations, ambient_mul, ambient_one, tags=None, name=None):
    orders, proj, lift = _quotient_data(m, relations)
    r = len(orders)
    if r == 0:
        raise InconsistentPresentation("quotient is the zero ring")

    def project(v):
        return [sum(v[a] * proj[a][i] for a in range(m)) for i in range(r)]

    mul = [[project(ambient_mul(lift[i], lift[j])) for j in range(r)] for i in range(r)]
    Q = StructAlgebra(orders, mul, project(ambient_one), tags=tags, name=name)
    return Q, project, lift


def zmod(n: int) -> StructAlgebra:
    if n < 2:
        raise InconsistentPresentation("modulus must be >= 2")
    return StructAlgebra((n,), [[[1]]], (1,), tags={"kind": "zmod", "n": n}, name=f"Z/{n}")


def finite_algebra(n: int, mul, one, orders=None, name=None) -> StructAlgebra:
    rank = len(one)
    orders = tuple(orders) if orders is not None else (n,) * rank
    if any(n % d for d in orders):
        raise InconsistentPresentation("every order must divide the modulus")
    return StructAlgebra(orders, mul, one, tags={"kind": "finite", "n": n}, name=name)


def product_ring(R: StructAlgebra, S: StructAlgebra) -> StructAlgebra:
    r, s = R.rank, S.rank
    t = r + s
    mul = [[[0] * t for _ in range(t)] for _ in range(t)]
    for i in range(r):
        for j in range(r):
            mul[i][j][:r] = R.mul_tensor[i][j]
    for i in range(s):
        for j in range(s):
            mul[r + i][r + j][r:] = S.mul_tensor[i][j]
    return StructAlgebra(R.orders + S.orders, mul, R.one + S.one,
                         tags={"kind": "product", "factors": (R, S)}, name=f"({R!r} x {S!r})")


def poly_quotient(R: StructAlgebra, coeffs, kind: str = "poly_quotient", name=None) -> StructAlgebra:
    """``R[x]/(x^k + c_{k-1} x^{k-1} + ... + c_0)`` with ``coeffs = [c_0, ..., c_{k-1}]``.

    Coordinates are blocks ``j = 0..k-1`` of ``R``-coordinates for ``x^j``, so
    the base ring sits in the first ``R.rank`` coordinates.
    """
    k = len(coeffs)
    if k < 1:
        raise InconsistentPresentation("polynomial degree must be >= 1")
    r = R.rank
    cs = [R.element(c) for c in coeffs]
    zero = R.zero()
    # powers x^m, m < 2k - 1, as lists of k coefficients in R
    pw = []
    for m in range(2 * k - 1):
        if m < k:
            pw.append([R.one if j == m else zero for j in range(k)])
        else:
            prev = pw[-1]
            top = prev[k - 1]
            shifted = [zero] + prev[: k - 1]
            pw.append([R.sub(shifted[j], R.mul(top, cs[j])) for j in range(k)])
    t = r * k
    mul = [[[0] * t for _ in range(t)] for _ in range(t)]
    for a in range(k):
        for b in range(k):
            for i in range(r):
                for l in range(r):
                    eil = R.mul_tensor[i][l]
                    out = mul[a * r + i][b * r + l]
                    for j in range(k):
                        prod_j = R.mul(eil, pw[a + b][j])
                        out[j * r:(j + 1) * r] = prod_j
    one = list(R.one) + [0] * (t - r)
    tags = {"kind": kind, "base": R, "k": k, "coeffs": tuple(cs)}
    return StructAlgebra(R.orders * k, mul, one, tags=tags, name=name)


def trunc_poly(R: StructAlgebra, k: int) -> StructAlgebra:
    """``R[x]/(x^k)``."""
    if k < 1:
        raise InconsistentPresentation("k must be >= 1")
    return poly_quotient(R, [0] * k, kind="trunc_poly", name=f"{R!r}[x]/(x^{k})")


def group_ring(R: StructAlgebra, m: int) -> StructAlgebra:
    """``R[Z/m] = R[x]/(x^m - 1)``."""
    if m < 1:
        raise InconsistentPresentation("group order must be >= 1")
    coeffs = [R.neg(R.one)] + [0] * (m - 1)
    return poly_quotient(R, coeffs, kind="group_ring", name=f"{R!r}[Z/{m}]")


def galois_field(p: int, modulus_coeffs) -> StructAlgebra:
    """``F_p[x]/(f)`` for a monic irreducible ``f``; irreducibility is checked by scanning units."""
    F = poly_quotient(zmod(p), modulus_coeffs, kind="finite_field",
                      name=f"GF({p}^{len(modulus_coeffs)})")
    if F.unit_mask.sum() != F.size - 1:
        raise InconsistentPresentation("modulus polynomial is not irreducible")
    return F


def f4() -> StructAlgebra:
    return galois_field(2, [1, 1])


def make_idealization(R: StructAlgebra, gens: int, rels=()) -> StructAlgebra:
    """Idealization ``R + M`` with ``M = R^gens / (R-span of rels)``.

    Each relation is a list of ``gens`` elements of ``R`` (ints or coordinate
    lists). The module is brought to SNF coordinates before the structure
    constants are built; ``M`` occupies the coordinates after ``R``'s.
    """
    r = R.rank
    if gens < 0:
        raise InconsistentPresentation("number of generators must be >= 0")
    m = r * gens
    rel_rows = []
    for rel in rels:
        if len(rel) != gens:
            raise InconsistentPresentation("relation length differs from number of generators")
        vec = [R.element(x) for x in rel]
        for i in range(r):
            ei = R.basis_vector(i)
            rel_rows.append([v for x in vec for v in R.mul(ei, x)])
    for g in range(gens):
        for i, d in enumerate(R.orders):
            if d:
                row = [0] * m
                row[g * r + i] = d
                rel_rows.append(row)
    if m:
        morders, proj, lift = _quotient_data(m, rel_rows)
    else:
        morders, proj, lift = [], [], []
    s = len(morders)

    def act(a, mvec):  # a in R, mvec in R^gens, blockwise product
        return [v for g in range(gens) for v in R.mul(a, mvec[g * r:(g + 1) * r])]

    def project(v):
        return [sum(v[a] * proj[a][i] for a in range(m)) for i in range(s)]

    t = r + s
    mul = [[[0] * t for _ in range(t)] for _ in range(t)]
    for i in range(r):
        for j in range(r):
            mul[i][j][:r] = R.mul_tensor[i][j]
        ei = R.basis_vector(i)
        for a in range(s):
            img = project(act(ei, lift[a]))
            mul[i][r + a][r:] = img
            mul[r + a][i][r:] = img
    one = list(R.one) + [0] * s
    tags = {"kind": "idealization", "base": R, "module_orders": tuple(morders),
            "gens": gens, "rels": tuple(tuple(map(tuple, (R.element(x) for x in rel))) for rel in rels)}
    return StructAlgebra(tuple(R.orders) + tuple(morders), mul, one, tags=tags,
                         name=f"{R!r}+M{tuple(morders)}")


def quotient(R: StructAlgebra, ideal_lattice) -> tuple[StructAlgebra, RingMap]:
    """``R / I`` for an ideal lattice ``I`` (containing the relations)."""
    r = R.rank
    rels = [list(row) for row in ideal_lattice] + R.relation_rows()
    Q, project, _ = _build_quotient(r, rels, lambda x, y: list(R.mul(x, y)), list(R.one),
                                    tags={"kind": "quotient", "parent": R})
    images = tuple(Q.reduce(project(list(R.basis_vector(i)))) for i in range(r))
    return Q, RingMap(R, Q, images)


def reduce_ring(R: StructAlgebra) -> tuple[StructAlgebra, RingMap]:
    """``(R_red, R -> R_red)``."""
    nil = R.nilradical()
    if nil == R.zero_lattice():
        return R, identity_map(R)
    if R.tags.get("kind") == "idealization" and not R.is_finite:
        base = R.tags["base"]
        if base.nilradical() == base.zero_lattice():
            k = base.rank
            images = tuple(tuple(R.basis_vector(i)[:k]) if i < k else base.zero()
                           for i in range(R.rank))
            return base, RingMap(R, base, images)
    if not R.is_finite:
        raise UnsupportedRing("reduction of this infinite ring is not supported")
    Q, q = quotient(R, nil)
    Q.tags["kind"] = "reduction"
    return Q, q


def subring_algebra(R: StructAlgebra, lattice) -> tuple[StructAlgebra, RingMap]:
    """The subring with the given lattice as a ring in its own right, plus its inclusion."""
    r = R.rank
    S = [list(row) for row in lattice]
    k = len(S)
    rel = R.relation_rows()
    K = integer_kernel(S + [[-v for v in row] for row in rel], r)
    kern = [row[:k] for row in K]

    def to_R(z):
        return [sum(z[a] * S[a][j] for a in range(k)) for j in range(r)]

    def from_R(x):
        z = solve_integer(S + rel, list(x), r)
        if z is None:
            raise InconsistentPresentation("product left the subring")
        return z[:k]

    def amb_mul(z1, z2):
        return from_R(R.mul(R.reduce(to_R(z1)), R.reduce(to_R(z2))))

    one = from_R(R.one)
    Sub, project, lift = _build_quotient(k, kern, amb_mul, one,
                                         tags={"kind": "subring", "parent": R})
    images = tuple(R.reduce(to_R(lift[i])) for i in range(Sub.rank))
    incl = RingMap(Sub, R, images)
    incl.validate()
    return Sub, incl


def tensor_square(B: StructAlgebra, A_lattice) -> tuple:
    """``B (x)_A B`` for a subring ``A`` of ``B`` (given by its lattice).

    Returns ``(T, iota1, iota2, mult)`` where ``iota1(b) = b (x) 1``,
    ``iota2(b) = 1 (x) b`` and ``mult(b (x) b') = b b'``.
    """
    if B.is_finite:
        B.check_size()
    r = B.rank
    m = r * r

    def idx(i, j):
        return i * r + j

    def tens(x, y):
        v = [0] * m
        for i, xi in enumerate(x):
            if xi:
                for j, yj in enumerate(y):
                    if yj:
                        v[idx(i, j)] += xi * yj
        return v

    rels = []
    for i, di in enumerate(B.orders):
        for j, dj in enumerate(B.orders):
            g = gcd(di, dj)
            if g:
                row = [0] * m
                row[idx(i, j)] = g
                rels.append(row)
    for a in A_lattice:
        for i in range(r):
            for j in range(r):
                left = B.mul(a, B.basis_vector(i))
                right = B.mul(a, B.basis_vector(j))
                u = tens(left, B.basis_vector(j))
                w = tens(B.basis_vector(i), right)
                rels.append([p - q for p, q in zip(u, w)])

    def amb_mul(x, y):
        out = [0] * m
        for p, xp in enumerate(x):
            if not xp:
                continue
            i, j = divmod(p, r)
            for q, yq in enumerate(y):
                if not yq:
                    continue
                k, l = divmod(q, r)
                out = [o + xp * yq * t for o, t in zip(out, tens(B.mul_tensor[i][k], B.mul_tensor[j][l]))]
        return out

    T, project, lift = _build_quotient(m, rels, amb_mul, tens(B.one, B.one),
                                       tags={"kind": "tensor_square", "base": B},
                                       name=f"{B!r}(x){B!r}")
    iota1 = RingMap(B, T, tuple(T.reduce(project(tens(B.basis_vector(i), B.one))) for i in range(r)))
    iota2 = RingMap(B, T, tuple(T.reduce(project(tens(B.one, B.basis_vector(i)))) for i in range(r)))

    def mult_img(v):
        out = [0] * r
        for p, c in enumerate(v):
            if c:
                i, j = divmod(p, r)
                out = [o + c * t for o, t in zip(out, B.mul_tensor[i][j])]
        return B.reduce(out)

    mult = RingMap(T, B, tuple(mult_img(lift[a]) for a in range(T.rank)))
    for f in (iota1, iota2, mult):
        f.validate()
    return T, iota1, iota2, mult


def total_fraction_ring(R):
    """``(T(R), embedding)``.

    For a quadratic order this is its field. For a finite ring every
    non-zero-divisor is a unit (checked by scan), so ``T(R) = R``.
    """
    if isinstance(R, QuadOrder):
        return R.field, (lambda e: e)
    if isinstance(R, StructAlgebra) and R.tags.get("kind") == "quad_order":
        return make_quad_order(R.tags["D"]).field, None
    if isinstance(R, StructAlgebra) and R.is_finite:
        R.check_size()
        for x in R.elements():
            if not R.is_zero_divisor(x) and not R.is_unit(x)[0]:
                raise AssertionError(f"non-zero-divisor {x} is not a unit")
        return R, identity_map(R)
    raise UnsupportedRing("total ring of fractions is only available for orders and finite rings")


def base_embedding(R: StructAlgebra) -> tuple:
    """Lattice of the base ring inside a polynomial quotient or idealization of it."""
    base = R.tags["base"]
    k = base.rank
    rows = [list(row) + [0] * (R.rank - k) for row in base.whole_lattice()]
    return hnf_rows(rows + R.relation_rows(), R.rank)


def base_retraction(R: StructAlgebra) -> RingMap:
    """``R -> R`` killing ``x`` (truncated polynomials), ``x -> 1`` (group rings) or ``M``.

    The image is the embedded base ring and the map fixes it.
    """
    kind = R.tags.get("kind")
    base = R.tags.get("base")
    if kind not in ("trunc_poly", "group_ring", "idealization"):
        raise UnsupportedRing(f"no canonical retraction for {kind!r}")
    k = base.rank
    images = []
    for i in range(R.rank):
        block, pos = divmod(i, k)
        if kind == "idealization":
            img = list(R.basis_vector(i)) if i < k else [0] * R.rank
        elif kind == "trunc_poly":
            img = list(R.basis_vector(i)) if block == 0 else [0] * R.rank
        else:  # x -> 1
            img = [0] * R.rank
            img[pos] = 1
        images.append(R.reduce(img))
    f = RingMap(R, R, tuple(images))
    f.validate()
    return f
