"""Ring extensions ``A <= B`` and arithmetic of finitely generated ``A``-submodules of ``B``.

Two extension types share one interface:

* :class:`QuadExtension` -- a quadratic order ``A`` inside a larger order or
  inside its fraction field. Submodules are rational lattices written in ``A``'s
  basis ``(1, w_A)`` as ``(q, H)``: ``q*L`` has integral HNF basis ``H`` and
  ``q`` is minimal.
* :class:`AlgebraExtension` -- a subring ``A`` of a structure-constant ring
  ``B``. Submodules are integer lattices between the relation lattice and
  ``Z^r``, keyed by their HNF.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ElementNotInAmbient,
    InvalidMorphism,
    NotIntermediate,
    ParentMismatch,
    SizeBoundExceeded,
    UnsupportedExtension,
    ZeroModule,
)
from .intlat import (
    det_hnf,
    hnf_rows,
    integer_kernel,
    lattice_contains,
    lattice_intersection,
    solve_integer,
)
from .rings import (
    QuadElt,
    QuadOrder,
    RingMap,
    StructAlgebra,
    enum_bound,
    make_quad_order,
)

DEFAULT_SUBMODULE_CAP = 3000


@dataclass(frozen=True)
class Submodule:
    """An ``A``-submodule of ``B`` in canonical form; equality is key equality."""

    ext: object
    key: tuple

    def __post_init__(self):
        hash(self.key)

    def is_zero(self) -> bool:
        return self.ext.is_zero_key(self.key)

    def generators(self) -> list:
        """Ambient elements spanning the module over ``Z``."""
        return self.ext.key_generators(self.key)

    def contains(self, x) -> bool:
        return self.ext.contains(self, x)

    def __mul__(self, other: "Submodule") -> "Submodule":
        return mul(self, other)

    def __add__(self, other: "Submodule") -> "Submodule":
        return sum_modules(self, other)

    def __le__(self, other: "Submodule") -> bool:
        return is_contained(self, other)

    def to_json(self) -> dict:
        return self.ext.submodule_json(self)

    def __repr__(self):
        return f"Submodule({self.ext.describe_key(self.key)})"


def _check_parent(L: Submodule, M: Submodule) -> None:
    if L.ext != M.ext:
        raise ParentMismatch("submodules of different extensions")


# ---------------------------------------------------------------------------
# rational lattices in Q^2


def _qkey(vectors) -> tuple:
    """Canonical ``(q, H)`` for the Z-span of rational 2-vectors."""
    vecs = [tuple(Fraction(x) for x in v) for v in vectors]
    vecs = [v for v in vecs if any(v)]
    if not vecs:
        return (1, ())
    q0 = lcm(*(x.denominator for v in vecs for x in v))
    H = hnf_rows([[int(x * q0) for x in v] for v in vecs], 2)
    g = q0
    for row in H:
        for x in row:
            g = gcd(g, x)
    return (q0 // g, tuple(tuple(x // g for x in row) for row in H))


def _qkey_vectors(key) -> list:
    q, H = key
    return [tuple(Fraction(x, q) for x in row) for row in H]


def _qkey_intersection(k1, k2) -> tuple:
    (q1, H1), (q2, H2) = k1, k2
    if not H1 or not H2:
        return (1, ())
    Q = lcm(q1, q2)
    B1 = [[x * (Q // q1) for x in row] for row in H1]
    B2 = [[x * (Q // q2) for x in row] for row in H2]
    inter = lattice_intersection(B1, B2, 2)
    return _qkey([[Fraction(x, Q) for x in row] for row in inter])


def _qkey_contains(key, v) -> bool:
    q, H = key
    w = [Fraction(x) * q for x in v]
    if any(x.denominator != 1 for x in w):
        return False
    return lattice_contains(H, [int(x) for x in w]) if H else not any(w)


# ---------------------------------------------------------------------------
# quadratic family


class QuadExtension:
    """``A = O_D`` inside a larger order ``B`` of the same field, or inside the field (``B=None``)."""

    def __init__(self, A: QuadOrder, B: Optional[QuadOrder] = None):
        if isinstance(A, int):
            A = make_quad_order(A)
        if isinstance(B, int):
            B = make_quad_order(B)
        if B is not None and (B.d != A.d or A.conductor % B.conductor):
            raise UnsupportedExtension(f"{A} is not contained in {B}")
        self.A = A
        self.B = B
        self.D = A.D
        self._nm = (A.D * A.D - A.D) // 4

    # identity -------------------------------------------------------------
    def _ident(self):
        return ("quad", self.A.D, None if self.B is None else self.B.D)

    def __eq__(self, other):
        return isinstance(other, QuadExtension) and other._ident() == self._ident()

    def __hash__(self):
        return hash(self._ident())

    def __repr__(self):
        amb = f"Q(√{self.A.d})" if self.B is None else str(self.B)
        return f"{self.A} ⊆ {amb}"

    @property
    def is_field_ambient(self) -> bool:
        return self.B is None

    def to_json(self) -> dict:
        return {"A": self.A.to_json(),
                "B": {"kind": "quad_field", "d": str(self.A.d)} if self.B is None else self.B.to_json()}

    # coordinates ----------------------------------------------------------
    def coords(self, x) -> tuple:
        if isinstance(x, (int, Fraction)):
            return (Fraction(x), Fraction(0))
        if isinstance(x, QuadElt):
            return self.A.element_coords(x)
        if isinstance(x, (tuple, list)) and len(x) == 2:
            return (Fraction(x[0]), Fraction(x[1]))
        raise ElementNotInAmbient(f"cannot read {x!r} as an element of the field")

    def elt(self, v) -> QuadElt:
        return self.A.from_coords(v[0], v[1])

    def mul_vec(self, p, q) -> tuple:
        x1, y1 = p
        x2, y2 = q
        yy = y1 * y2
        return (x1 * x2 - self._nm * yy, x1 * y2 + x2 * y1 + self.D * yy)

    def in_ambient(self, x) -> bool:
        if self.B is None:
            return True
        return self.B.contains(x if isinstance(x, QuadElt) else self.elt(self.coords(x)))

    # keys -----------------------------------------------------------------
    def is_zero_key(self, key) -> bool:
        return not key[1]

    def key_generators(self, key) -> list:
        return [self.elt(v) for v in _qkey_vectors(key)]

    def describe_key(self, key) -> str:
        q, H = key
        return f"den={q}, hnf={[list(r) for r in H]}"

    def _closure_key(self, vecs) -> tuple:
        w = (Fraction(0), Fraction(1))
        return _qkey(list(vecs) + [self.mul_vec(v, w) for v in vecs])

    @cached_property
    def A_module(self) -> Submodule:
        return Submodule(self, _qkey([(1, 0), (0, 1)]))

    @cached_property
    def B_key(self) -> Optional[tuple]:
        if self.B is None:
            return None
        return self._closure_key([self.coords(e) for e in self.B.basis()])

    def whole(self) -> Submodule:
        if self.B is None:
            raise UnsupportedExtension("the field is not a finitely generated A-module")
        return Submodule(self, self.B_key)

    # operations -----------------------------------------------------------
    def submodule(self, gens) -> Submodule:
        vecs = []
        for g in gens:
            if not self.in_ambient(g):
                raise ElementNotInAmbient(f"{g} is not in {self.B}")
            vecs.append(self.coords(g))
        return Submodule(self, self._closure_key(vecs))

    def principal(self, x) -> Submodule:
        return self.submodule([x])

    def mul(self, L: Submodule, M: Submodule) -> Submodule:
        vl, vm = _qkey_vectors(L.key), _qkey_vectors(M.key)
        return Submodule(self, _qkey([self.mul_vec(a, b) for a in vl for b in vm]))

    def sum(self, L: Submodule, M: Submodule) -> Submodule:
        return Submodule(self, _qkey(_qkey_vectors(L.key) + _qkey_vectors(M.key)))

    def contains(self, L: Submodule, x) -> bool:
        return _qkey_contains(L.key, self.coords(x))

    def is_contained(self, L: Submodule, M: Submodule) -> bool:
        return all(_qkey_contains(M.key, v) for v in _qkey_vectors(L.key))

    def scale(self, L: Submodule, x) -> Submodule:
        v = self.coords(x)
        return Submodule(self, _qkey([self.mul_vec(a, v) for a in _qkey_vectors(L.key)]))

    def colon_into_A(self, L: Submodule) -> Submodule:
        if L.is_zero():
            raise ZeroModule("colon of the zero module")
        result = None
        for v in _qkey_vectors(L.key):
            inv = self.elt(v).inverse()
            k = self._closure_key([self.coords(inv)])
            result = k if result is None else _qkey_intersection(result, k)
        if self.B is not None:
            result = _qkey_intersection(result, self.B_key)
        return Submodule(self, result)

    def norm(self, L: Submodule) -> Fraction:
        """Index-style norm ``det(H) / q^2`` relative to ``A``."""
        q, H = L.key
        if not H:
            return Fraction(0)
        return Fraction(det_hnf(H), q * q)

    def solve_combination(self, elements, target) -> Optional[list]:
        """Integers ``z`` with ``sum z_i * elements[i] = target``, or ``None``."""
        vecs = [self.coords(e) for e in elements]
        t = self.coords(target)
        Q = lcm(*(x.denominator for v in vecs + [t] for x in v))
        rows = [[int(x * Q) for x in v] for v in vecs]
        return solve_integer(rows, [int(x * Q) for x in t], 2)

    def multiply(self, x, y):
        return self.elt(self.mul_vec(self.coords(x), self.coords(y)))

    def one(self):
        return QuadElt(self.A.d, 1)

    def is_unit_B(self, x) -> tuple[bool, Optional[QuadElt]]:
        e = x if isinstance(x, QuadElt) else self.elt(self.coords(x))
        if e.is_zero():
            return False, None
        if self.B is None:
            return True, e.inverse()
        return self.B.is_unit(e)

    def submodule_json(self, L: Submodule) -> dict:
        q, H = L.key
        return {"ext": self.to_json(), "den": str(q), "hnf": [[str(x) for x in row] for row in H]}

    def submodule_from_json(self, doc: dict) -> Submodule:
        q = int(doc["den"])
        vecs = [[Fraction(int(x), q) for x in row] for row in doc["hnf"]]
        return self.submodule([self.elt(v) for v in vecs])

    def extension_to(self, B0) -> "QuadExtension":
        """The extension ``B0 <= B`` for an intermediate order ``B0``."""
        if isinstance(B0, int):
            B0 = make_quad_order(B0)
        if B0.d != self.A.d or self.A.conductor % B0.conductor:
            raise NotIntermediate(f"{B0} does not contain {self.A}")
        if self.B is not None and B0.conductor % self.B.conductor:
            raise NotIntermediate(f"{B0} is not inside {self.B}")
        return QuadExtension(B0, self.B)


# ---------------------------------------------------------------------------
# structure-constant family


class AlgebraExtension:
    """A subring ``A`` (given by a lattice) of a structure-constant ring ``B``.

    ``retraction`` is an optional ring map ``B -> B`` with image in ``A`` that
    fixes ``A`` pointwise.
    """

    def __init__(self, B: StructAlgebra, A_lattice=None, retraction: Optional[RingMap] = None,
                 name: Optional[str] = None):
        self.B = B
        r = B.rank
        if A_lattice is None:
            A_lattice = B.whole_lattice()
        self.A_key = hnf_rows([list(row) for row in A_lattice] + B.relation_rows(), r)
        self.name = name
        if not lattice_contains(self.A_key, B.one):
            raise UnsupportedExtension("subring does not contain 1")
        for a in self.A_key:
            for b in self.A_key:
                if not lattice_contains(self.A_key, B.mul(a, b)):
                    raise UnsupportedExtension("subring lattice is not closed under multiplication")
        self.retraction = retraction
        if retraction is not None:
            self._check_retraction(retraction)

    def _check_retraction(self, f: RingMap) -> None:
        if f.source is not self.B or f.target is not self.B:
            raise InvalidMorphism("retraction must be a map B -> B")
        f.validate()
        for a in self.A_key:
            if f(a) != self.B.reduce(a):
                raise InvalidMorphism("retraction does not fix A")
        for i in range(self.B.rank):
            if not lattice_contains(self.A_key, f(self.B.basis_vector(i))):
                raise InvalidMorphism("retraction image is not inside A")

    def _ident(self):
        return ("alg", id(self.B), self.A_key)

    def __eq__(self, other):
        return isinstance(other, AlgebraExtension) and other._ident() == self._ident()

    def __hash__(self):
        return hash(self._ident())

    def __repr__(self):
        return self.name or f"A ⊆ {self.B!r}"

    def to_json(self) -> dict:
        return {"B": self.B.to_json(), "A": [[str(x) for x in row] for row in self.A_key]}

    @property
    def is_finite(self) -> bool:
        return self.B.is_finite

    # keys -----------------------------------------------------------------
    @cached_property
    def zero_key(self) -> tuple:
        return self.B.zero_lattice()

    def is_zero_key(self, key) -> bool:
        return key == self.zero_key

    def key_generators(self, key) -> list:
        gens = [self.B.reduce(row) for row in key]
        return [g for g in gens if any(g)] or [self.B.zero()]

    def describe_key(self, key) -> str:
        return f"rows={[list(r) for r in key]}"

    def _closure_key(self, vecs) -> tuple:
        B = self.B
        rows = []
        for v in vecs:
            v = B.reduce(v)
            if any(v):
                rows.extend(B.mul(a, v) for a in self.A_key)
        return hnf_rows([list(r) for r in rows] + B.relation_rows(), B.rank)

    @cached_property
    def A_module(self) -> Submodule:
        return Submodule(self, self.A_key)

    def whole(self) -> Submodule:
        return Submodule(self, self.B.whole_lattice())

    # operations -----------------------------------------------------------
    def coords(self, x) -> tuple:
        try:
            return self.B.element(x)
        except (TypeError, ValueError) as exc:
            raise ElementNotInAmbient(str(exc)) from exc

    def submodule(self, gens) -> Submodule:
        return Submodule(self, self._closure_key([self.coords(g) for g in gens]))

    def principal(self, x) -> Submodule:
        return self.submodule([x])

    def mul(self, L: Submodule, M: Submodule) -> Submodule:
        B = self.B
        rows = [B.mul(a, b) for a in L.generators() for b in M.generators()]
        return Submodule(self, hnf_rows([list(r) for r in rows] + B.relation_rows(), B.rank))

    def sum(self, L: Submodule, M: Submodule) -> Submodule:
        return Submodule(self, hnf_rows([list(r) for r in L.key + M.key], self.B.rank))

    def contains(self, L: Submodule, x) -> bool:
        return lattice_contains(L.key, self.coords(x))

    def is_contained(self, L: Submodule, M: Submodule) -> bool:
        return all(lattice_contains(M.key, row) for row in L.key)

    def scale(self, L: Submodule, x) -> Submodule:
        B = self.B
        x = self.coords(x)
        rows = [B.mul(a, x) for a in L.generators()]
        return Submodule(self, hnf_rows([list(r) for r in rows] + B.relation_rows(), B.rank))

    def colon_into_A(self, L: Submodule) -> Submodule:
        """``{b in B : L b <= A}`` via an integer kernel (exact for infinite ``B`` too)."""
        if L.is_zero():
            raise ZeroModule("colon of the zero module")
        if self.is_finite and self.B.size <= enum_bound():
            return self._colon_finite(L)
        B = self.B
        r = B.rank
        gens = L.generators()
        HA = [list(row) for row in self.A_key]
        s = len(gens)
        ncols = s * r
        rows = []
        mats = [B.mul_matrix(g) for g in gens]
        for j in range(r):
            rows.append([v for M in mats for v in M[j]])
        for k in range(s):
            for h in HA:
                row = [0] * ncols
                row[k * r:(k + 1) * r] = [-v for v in h]
                rows.append(row)
        K = integer_kernel(rows, ncols)
        sol = [list(row[:r]) for row in K]
        return Submodule(self, hnf_rows(sol + B.relation_rows(), r))

    def _colon_finite(self, L: Submodule) -> Submodule:
        B = self.B
        T = B.mul_table
        ok = np.ones(B.size, dtype=bool)
        amask = self.mask(self.A_key)
        for g in L.generators():
            ok &= amask[T[B.index(g)]]
        return Submodule(self, self.lattice_from_indices(np.flatnonzero(ok)))

    def solve_combination(self, elements, target) -> Optional[list]:
        B = self.B
        rows = [list(self.coords(e)) for e in elements]
        z = solve_integer(rows + B.relation_rows(), list(self.coords(target)), B.rank)
        return None if z is None else z[: len(rows)]

    def multiply(self, x, y):
        return self.B.mul(self.coords(x), self.coords(y))

    def one(self):
        return self.B.one

    def is_unit_B(self, x):
        return self.B.is_unit(self.coords(x))

    def submodule_json(self, L: Submodule) -> dict:
        return {"ext": self.to_json(), "rows": [[str(x) for x in row] for row in L.key]}

    def submodule_from_json(self, doc: dict) -> Submodule:
        return self.submodule([[int(x) for x in row] for row in doc["rows"]])

    def extension_to(self, lattice) -> "AlgebraExtension":
        """The extension ``B0 <= B`` for an intermediate subring lattice ``B0``."""
        if isinstance(lattice, AlgebraExtension):
            if lattice.B is not self.B:
                raise NotIntermediate("different ambient ring")
            other = lattice
        else:
            other = AlgebraExtension(self.B, lattice)
        if not all(lattice_contains(other.A_key, row) for row in self.A_key):
            raise NotIntermediate("intermediate ring does not contain A")
        return other

    # finite enumeration ----------------------------------------------------
    def mask(self, key) -> np.ndarray:
        """Boolean membership mask over the elements of a finite ``B``."""
        B = self.B
        m = np.zeros(B.size, dtype=bool)
        m[B.lattice_elements(key)] = True
        return m

    def size_of(self, L: Submodule) -> int:
        return self.B.size // det_hnf(L.key)

    def lattice_from_indices(self, idx) -> tuple:
        """HNF lattice spanned by a set of element indices (plus relations)."""
        B = self.B
        E = B.elements_array
        H = self.zero_key
        for k in idx:
            v = [int(x) for x in E[k]]
            if not lattice_contains(H, v):
                H = hnf_rows([list(r) for r in H] + [v], B.rank)
        return H

    @cached_property
    def units_B(self) -> list:
        return self.B.units()

    @cached_property
    def units_A(self) -> list:
        amask = self.mask(self.A_key)
        E = self.B.elements_array
        return [tuple(int(v) for v in E[k]) for k in np.flatnonzero(self.B.unit_mask & amask)]

    def all_submodules(self, cap: Optional[int] = None) -> list:
        """Every ``A``-submodule of a finite ``B`` (including zero), sorted by key."""
        cached = self.__dict__.get("_submodules")
        if cached is not None:
            return list(cached)
        B = self.B
        B.check_size(enum_bound())
        cap = DEFAULT_SUBMODULE_CAP if cap is None else cap
        cyc = {}
        for x in B.elements():
            k = self._closure_key([x])
            if k not in cyc:
                cyc[k] = self.mask(k)
        cyc_items = sorted(cyc.items())
        start = self.zero_key
        seen = {start: self.mask(start)}
        frontier = [start]
        while frontier:
            nxt = []
            for S in frontier:
                smask = seen[S]
                for ck, cmask in cyc_items:
                    if not (cmask & ~smask).any():
                        continue
                    T = hnf_rows([list(r) for r in S + ck], B.rank)
                    if T not in seen:
                        seen[T] = self.mask(T)
                        nxt.append(T)
                        if len(seen) > cap:
                            raise SizeBoundExceeded(f"more than {cap} submodules")
            frontier = nxt
        self._submodules = [Submodule(self, k) for k in sorted(seen)]
        return list(self._submodules)


# ---------------------------------------------------------------------------
# morphisms and towers


@dataclass(frozen=True)
class RingMorphismWitness:
    """A morphism of extensions ``(A, B) -> (A', B')``: a ring map sending ``A`` into ``A'``."""

    source: AlgebraExtension
    target: AlgebraExtension
    ring_map: RingMap

    def __post_init__(self):
        f = self.ring_map
        if f.source is not self.source.B or f.target is not self.target.B:
            raise InvalidMorphism("ring map does not match the extensions")
        f.validate()
        for a in self.source.A_key:
            if not lattice_contains(self.target.A_key, f(a)):
                raise InvalidMorphism("A is not sent into A'")

    def __call__(self, x):
        return self.ring_map(x)


def identity_witness(ext) -> "RingMorphismWitness | None":
    if isinstance(ext, AlgebraExtension):
        from .rings import identity_map
        return RingMorphismWitness(ext, ext, identity_map(ext.B))
    return None


@dataclass(frozen=True)
class TowerExtension:
    """``A <= B <= C`` for quadratic orders; ``C = None`` means the field."""

    A: QuadOrder
    B: QuadOrder
    C: Optional[QuadOrder] = None

    def __post_init__(self):
        QuadExtension(self.A, self.B)
        QuadExtension(self.B, self.C)

    @property
    def AB(self) -> QuadExtension:
        return QuadExtension(self.A, self.B)

    @property
    def AC(self) -> QuadExtension:
        return QuadExtension(self.A, self.C)

    @property
    def BC(self) -> QuadExtension:
        return QuadExtension(self.B, self.C)

    def to_json(self) -> dict:
        return {"A": self.A.to_json(), "B": self.B.to_json(),
                "C": {"kind": "quad_field", "d": str(self.A.d)} if self.C is None else self.C.to_json()}


# ---------------------------------------------------------------------------
# module-level operations


def submodule(ext, generators) -> Submodule:
    return ext.submodule(list(generators))


def mul(L: Submodule, M: Submodule) -> Submodule:
    _check_parent(L, M)
    return L.ext.mul(L, M)


def sum_modules(L: Submodule, M: Submodule) -> Submodule:
    _check_parent(L, M)
    return L.ext.sum(L, M)


def contains(L: Submodule, x) -> bool:
    return L.ext.contains(L, x)


def equals(L: Submodule, M: Submodule) -> bool:
    _check_parent(L, M)
    return L.key == M.key


def is_contained(L: Submodule, M: Submodule) -> bool:
    _check_parent(L, M)
    return L.ext.is_contained(L, M)


def colon_into_A(L: Submodule) -> Submodule:
    return L.ext.colon_into_A(L)


def power(L: Submodule, n: int) -> Submodule:
    """``L^n`` for ``n >= 0`` (``L^0 = A``)."""
    out = L.ext.A_module
    for _ in range(n):
        out = mul(out, L)
    return out


def extend_scalars(L: Submodule, target_ext) -> Submodule:
    """The module generated by ``L`` over a bigger subring.

    ``target_ext`` is an extension with the same ambient ring whose subring
    contains ``A`` (an order or subring lattice is accepted and converted).
    """
    ext = L.ext
    if not isinstance(target_ext, (QuadExtension, AlgebraExtension)):
        target_ext = ext.extension_to(target_ext)
    if isinstance(ext, QuadExtension):
        if not isinstance(target_ext, QuadExtension) or target_ext.B != ext.B:
            raise NotIntermediate("different ambient ring")
        if ext.A.conductor % target_ext.A.conductor or ext.A.d != target_ext.A.d:
            raise NotIntermediate(f"{target_ext.A} does not contain {ext.A}")
    else:
        ext.extension_to(target_ext)
    return target_ext.submodule(L.generators())


def pushforward(L: Submodule, phi: RingMorphismWitness) -> Submodule:
    if L.ext != phi.source:
        raise ParentMismatch("module is not over the source extension")
    return phi.target.submodule([phi(x) for x in L.generators()])
