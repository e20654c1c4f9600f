"""Invertible ideals, principality, class groups and the verifiers built on them.

Every verifier returns a :class:`Report` whose JSON form is
``{"theorem", "instance", "status", "witnesses"}`` with witnesses in a
deterministic order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import (
    EnumerationImpossible,
    MaximalIdealListInvalid,
    NoRetraction,
    NotInvertible,
    ParentMismatch,
    SizeBoundExceeded,
    UnsupportedExtension,
    UnsupportedShape,
    ZeroModule,
)
from .extensions import (
    AlgebraExtension,
    QuadExtension,
    RingMorphismWitness,
    Submodule,
    TowerExtension,
    _qkey,
    _qkey_intersection,
    _qkey_vectors,
    colon_into_A,
    extend_scalars,
    mul,
    pushforward,
)
from .intlat import hnf_rows, lattice_contains, lattice_reduce, lattice_intersection, snf, solve_integer
from .quadforms import (
    BQF,
    compose,
    form_to_ideal,
    ideal_to_form,
    principal_form,
    principal_generator,
    reduce_form,
    reduced_forms,
)
from .rings import (
    QuadElt,
    QuadOrder,
    RingMap,
    StructAlgebra,
    enum_bound,
    make_quad_order,
    reduce_ring,
    subring_algebra,
    tensor_square,
)


# ---------------------------------------------------------------------------
# reports


def canonical(obj) -> object:
    """Recursively turn a value into JSON-ready data with integers as decimal strings."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, QuadElt):
        return str(obj)
    if isinstance(obj, BQF):
        return obj.to_json()
    if isinstance(obj, Submodule):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(canonical(obj), sort_keys=True, ensure_ascii=False)


@dataclass
class Report:
    theorem: str
    instance: object
    status: str = "pass"
    witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def fail(self, **witness) -> None:
        self.status = "fail"
        self.witnesses.append(dict(witness, violation=True))

    def add(self, **witness) -> None:
        self.witnesses.append(witness)

    def to_json(self) -> dict:
        wit = sorted((canonical(w) for w in self.witnesses),
                     key=lambda w: json.dumps(w, sort_keys=True, ensure_ascii=False))
        return {"theorem": self.theorem, "instance": canonical(self.instance),
                "status": self.status, "witnesses": wit}


# ---------------------------------------------------------------------------
# finite abelian groups


@dataclass
class AbelianStructure:
    factors: tuple
    generators: list
    dlog: dict


def abelian_structure(elements, op: Callable, identity) -> AbelianStructure:
    """Invariant factors, generators and discrete logs of a finite abelian group.

    Greedy generators with Schreier relations, then SNF of the relation matrix.
    """
    elements = sorted(set(elements))
    gens = []
    table = {identity: ()}
    rels = []
    for x in elements:
        if x in table:
            continue
        gens.append(x)
        old = {e: v + (0,) for e, v in table.items()}
        table = dict(old)
        cur, n = x, 1
        while cur not in old:
            for e, v in old.items():
                table[op(e, cur)] = v[:-1] + (n,)
            cur = op(cur, x)
            n += 1
        rel = [-c for c in old[cur][:-1]] + [n]
        rels.append(rel)
    k = len(gens)
    if k == 0:
        return AbelianStructure((), [], {identity: ()})
    R = [r + [0] * (k - len(r)) for r in rels]
    S, _, V = snf(R)
    Vr = V.rows()
    d = [S[i, i] for i in range(k)]
    Vinv = [solve_integer(Vr, [1 if j == i else 0 for j in range(k)], k) for i in range(k)]
    keep = [i for i in range(k) if d[i] != 1]

    def power(x, e):
        out = identity
        for _ in range(e):
            out = op(out, x)
        return out

    orders = []
    for g in gens:
        n, cur = 1, g
        while cur != identity:
            cur = op(cur, g)
            n += 1
        orders.append(n)
    new_gens = []
    for j in keep:
        el = identity
        for i in range(k):
            el = op(el, power(gens[i], Vinv[j][i] % orders[i]))
        new_gens.append(el)
    dlog = {}
    for e, v in table.items():
        w = [sum(v[i] * Vr[i][j] for i in range(k)) for j in range(k)]
        dlog[e] = tuple(w[j] % d[j] for j in keep)
    return AbelianStructure(tuple(d[j] for j in keep), new_gens, dlog)


# ---------------------------------------------------------------------------
# invertible ideals


@dataclass(frozen=True)
class InvertibleIdeal:
    """``L`` with ``L * L^{-1} = A`` and a certificate ``1 = sum x_k y_k``."""

    L: Submodule
    inverse: Submodule
    xs: tuple
    ys: tuple
    extends_to_B: bool

    @property
    def ext(self):
        return self.L.ext

    def check(self) -> bool:
        ext = self.ext
        total = None
        for x, y in zip(self.xs, self.ys):
            p = ext.multiply(x, y)
            total = p if total is None else _add(ext, total, p)
        return (mul(self.L, self.inverse) == ext.A_module and total is not None
                and _same(ext, total, ext.one()) and colon_into_A(self.L) == self.inverse)

    def to_json(self) -> dict:
        return {"L": self.L.to_json(), "inverse": self.inverse.to_json(),
                "certificate": [[canonical(_elt_json(x)), canonical(_elt_json(y))]
                                for x, y in zip(self.xs, self.ys)]}


def _elt_json(x):
    return str(x) if isinstance(x, QuadElt) else list(x)


def _add(ext, x, y):
    if isinstance(ext, QuadExtension):
        return x + y
    return ext.B.add(x, y)


def _same(ext, x, y) -> bool:
    return tuple(ext.coords(x)) == tuple(ext.coords(y))


def _lincomb(ext, coeffs, elements):
    if isinstance(ext, QuadExtension):
        vec = [Fraction(0), Fraction(0)]
        for c, e in zip(coeffs, elements):
            v = ext.coords(e)
            vec = [a + c * b for a, b in zip(vec, v)]
        return ext.elt(vec)
    r = ext.B.rank
    vec = [0] * r
    for c, e in zip(coeffs, elements):
        vec = [a + c * b for a, b in zip(vec, e)]
    return ext.B.reduce(vec)


def _extends_to_B(L: Submodule) -> bool:
    ext = L.ext
    if isinstance(ext, QuadExtension):
        if ext.B is None:
            return not L.is_zero()
        big = QuadExtension(ext.B, ext.B)
        return big.submodule(L.generators()) == big.A_module
    return ext.B.ideal(L.generators()) == ext.B.whole_lattice()


def try_invertible(L: Submodule) -> Optional[InvertibleIdeal]:
    """The invertible ideal structure on ``L`` or ``None`` when ``L * (A : L) != A``."""
    if L.is_zero():
        raise ZeroModule("the zero module is never invertible")
    ext = L.ext
    C = colon_into_A(L)
    if C.is_zero() or mul(L, C) != ext.A_module:
        return None
    xs = L.generators()
    cs = C.generators()
    products = [ext.multiply(x, c) for x in xs for c in cs]
    z = ext.solve_combination(products, ext.one())
    if z is None:
        raise AssertionError("1 lies in L*L^{-1} but no certificate was found")
    ys = []
    for i in range(len(xs)):
        ys.append(_lincomb(ext, z[i * len(cs):(i + 1) * len(cs)], cs))
    lb = _extends_to_B(L)
    if not lb:
        raise AssertionError("invertible ideal with LB != B")
    inv = InvertibleIdeal(L, C, tuple(xs), tuple(ys), lb)
    return inv


def _as_invertible(L) -> InvertibleIdeal:
    if isinstance(L, InvertibleIdeal):
        return L
    inv = try_invertible(L)
    if inv is None:
        raise NotInvertible(f"{L} is not invertible")
    return inv


def _is_finite_alg(ext) -> bool:
    return isinstance(ext, AlgebraExtension) and ext.is_finite


def _idealization_units(B: StructAlgebra) -> Optional[list]:
    """Units ``R* + M`` of an idealization over a quadratic order with finite module."""
    if B.tags.get("kind") != "idealization":
        return None
    base = B.tags["base"]
    if base.tags.get("kind") != "quad_order":
        return None
    O = make_quad_order(base.tags["D"])
    k = base.rank
    morders = B.orders[k:]
    if any(d == 0 for d in morders):
        return None
    units = []
    for u in O.units():
        a, b = O.element_coords(u)
        for m in itertools.product(*(range(d) for d in morders)):
            units.append(B.reduce([int(a), int(b)] + list(m)))
    return units


def is_principal(L) -> Optional[object]:
    """A unit ``g`` of ``B`` with ``A g = L`` or ``None``."""
    inv = _as_invertible(L)
    L = inv.L
    ext = L.ext
    g = None
    if isinstance(ext, QuadExtension):
        if ext.B is None:
            _, g = principal_generator(L)
        else:
            for u in ext.B.units():
                if ext.principal(u) == L:
                    g = u
                    break
    elif ext.is_finite:
        if ext.size_of(L) != ext.size_of(ext.A_module):
            return None
        cand = np.flatnonzero(ext.mask(L.key) & ext.B.unit_mask)
        if len(cand):
            g = tuple(int(v) for v in ext.B.elements_array[cand[0]])
    elif ext.retraction is not None:
        g = _principal_by_retraction(ext, L)
    else:
        units = _idealization_units(ext.B)
        if units is None:
            raise UnsupportedExtension("principality is not decidable for this extension")
        for u in units:
            if ext.principal(u) == L:
                g = u
                break
    if g is None:
        return None
    if ext.principal(g) != L or not ext.is_unit_B(g)[0]:
        raise AssertionError("principal generator failed validation")
    return g


def _principal_by_retraction(ext: AlgebraExtension, L: Submodule):
    """Any ``x`` in ``L`` with ``f(x) = 1`` generates ``L`` when ``L`` is principal."""
    f = ext.retraction
    B = ext.B
    gens = L.generators()
    imgs = [list(f(g)) for g in gens]
    z = solve_integer(imgs + B.relation_rows(), list(B.one), B.rank)
    if z is None:
        return None
    x = _lincomb(ext, z[: len(gens)], gens)
    if ext.principal(x) == L and B.is_unit(x)[0]:
        return x
    return None


# ---------------------------------------------------------------------------
# semi-local principalization


def maximal_ideals_of_A(ext: AlgebraExtension) -> list:
    """Maximal ideals of the subring ``A`` as lattices in ``B``'s coordinates."""
    if not ext.is_finite:
        raise UnsupportedExtension("maximal ideals are only enumerated for finite rings")
    A_alg, incl = subring_algebra(ext.B, ext.A_key)
    return [incl.image_lattice(M) for M in A_alg.maximal_ideals()]


def validate_maximal_ideals(ext: AlgebraExtension, maxideals) -> None:
    B = ext.B
    B.check_size()
    amask = ext.mask(ext.A_key)
    E = B.elements_array
    union = np.zeros(B.size, dtype=bool)
    keys = []
    for M in maxideals:
        M = hnf_rows([list(r) for r in M] + B.relation_rows(), B.rank)
        keys.append(M)
        if not all(lattice_contains(ext.A_key, r) for r in M):
            raise MaximalIdealListInvalid("listed ideal is not inside A")
        if any(not lattice_contains(M, B.mul(a, m)) for a in ext.A_key for m in M):
            raise MaximalIdealListInvalid("listed lattice is not an ideal of A")
        if M == ext.A_key:
            raise MaximalIdealListInvalid("listed ideal is all of A")
        mmask = ext.mask(M)
        for k in np.flatnonzero(amask & ~mmask):
            a = [int(v) for v in E[k]]
            if hnf_rows([list(r) for r in M] + [B.mul(a, x) for x in ext.A_key], B.rank) != ext.A_key:
                raise MaximalIdealListInvalid("listed ideal is not maximal")
        union |= mmask
    if len(set(keys)) != len(keys):
        raise MaximalIdealListInvalid("duplicate maximal ideals")
    nonunits = amask & ~B.unit_mask
    if (nonunits & ~union).any():
        raise MaximalIdealListInvalid("some non-unit of A lies in no listed ideal")


def principalize_semilocal(L, maxideals=None) -> dict:
    """Unit generator of an invertible ideal over a semi-local base, following the CRT argument.

    Returns ``{"g", "y", "x", "ys", "a"}`` with ``L = A g`` and ``g = y^{-1}``.
    """
    inv = _as_invertible(L)
    L = inv.L
    ext = L.ext
    if not isinstance(ext, AlgebraExtension) or not ext.is_finite:
        raise UnsupportedExtension("semi-local principalization needs a finite extension")
    B = ext.B
    if maxideals is None:
        maxideals = maximal_ideals_of_A(ext)
    else:
        validate_maximal_ideals(ext, maxideals)
    Ms = [hnf_rows([list(r) for r in M] + B.relation_rows(), B.rank) for M in maxideals]
    xs_all, cs_all = L.generators(), inv.inverse.generators()
    xk, yk = [], []
    for M in Ms:
        for x, c in itertools.product(xs_all, cs_all):
            if not lattice_contains(M, B.mul(x, c)):
                xk.append(x)
                yk.append(c)
                break
        else:
            raise MaximalIdealListInvalid("L * L^{-1} lies in a listed maximal ideal")
    ak = []
    for k, Mk in enumerate(Ms):
        others = ext.A_key
        for i, Mi in enumerate(Ms):
            if i != k:
                others = lattice_intersection(others, Mi, B.rank)
        rows = [list(r) for r in others] + [[-v for v in r] for r in Mk]
        z = solve_integer(rows, list(B.one), B.rank)
        if z is None:
            raise MaximalIdealListInvalid("no CRT element; listed ideals are not comaximal")
        a = _lincomb(ext, z[: len(others)], [tuple(r) for r in others])
        a = tuple(lattice_reduce(list(a), lattice_intersection(others, Mk, B.rank)))
        a = B.reduce(a)
        ak.append(a)
    y = B.zero()
    for a, c in zip(ak, yk):
        y = B.add(y, B.mul(a, c))
    if mul(L, ext.principal(y)) != ext.A_module:
        raise AssertionError("L * A y != A")
    ok, g = B.is_unit(y)
    if not ok or ext.principal(g) != L:
        raise AssertionError("principalization failed validation")
    return {"g": g, "y": y, "x": xk, "ys": yk, "a": ak}


# ---------------------------------------------------------------------------
# class groups


@dataclass(frozen=True)
class IdealClass:
    key: object
    representative: object

    def to_json(self):
        rep = self.representative
        return canonical(rep)


@dataclass
class ClassGroup:
    """Finite abelian group of ideal classes with invariant factors and discrete logs."""

    factors: tuple
    classes: list
    generators: list
    dlog: dict
    identity: object
    op: Callable = field(repr=False)
    class_of: Callable = field(repr=False)
    members: list = field(default_factory=list)
    principal: list = field(default_factory=list)
    label: str = ""

    @property
    def order(self) -> int:
        n = 1
        for d in self.factors:
            n *= d
        return n

    def __len__(self):
        return len(self.classes)

    def is_trivial(self) -> bool:
        return self.order == 1

    def to_json(self) -> dict:
        doc = {"order": self.order, "factors": list(self.factors),
               "classes": [c.to_json() for c in self.classes]}
        if self.members:
            doc["invertible_count"] = len(self.members)
        return canonical(doc)


def _group_from(keys_reps: dict, op, identity, class_of, members=(), principal=(), label="") -> ClassGroup:
    st = abelian_structure(list(keys_reps), op, identity)
    classes = [IdealClass(k, keys_reps[k]) for k in sorted(keys_reps)]
    gens = [IdealClass(k, keys_reps[k]) for k in st.generators]
    cg = ClassGroup(st.factors, classes, gens, st.dlog, identity, op, class_of,
                    list(members), list(principal), label)
    if cg.order != len(classes):
        raise AssertionError("group order does not match the number of classes")
    return cg


@lru_cache(maxsize=None)
def class_group_quad(D: int) -> ClassGroup:
    """Form class group of discriminant ``D`` (also the class group of ``O_D`` in its field)."""
    forms = reduced_forms(D)
    O = make_quad_order(D)
    ext = QuadExtension(O)
    reps = {f: form_to_ideal(f, ext) for f in forms}

    def class_of(L):
        return reduce_form(ideal_to_form(L if isinstance(L, Submodule) else L.L))

    return _group_from(reps, compose, principal_form(D), class_of, label=f"Cl({D})")


def _units_of_B(ext) -> list:
    if isinstance(ext, QuadExtension):
        return ext.B.units()
    return ext.units_B


def _principal_modules(ext) -> list:
    seen = {}
    for u in _units_of_B(ext):
        P = ext.principal(u)
        seen.setdefault(P.key, P)
    return [seen[k] for k in sorted(seen)]


def invertible_ideals(ext) -> list:
    """The finite group ``G(A, B)`` of invertible ideals, as a sorted list of certified ideals."""
    if isinstance(ext, QuadExtension):
        if ext.B is None:
            raise EnumerationImpossible("G(A, K) is infinite")
        cands = _between_conductor_and_B(ext)
    elif ext.is_finite:
        cands = [L for L in ext.all_submodules() if not L.is_zero()]
    else:
        raise EnumerationImpossible("invertible ideals of an infinite ring are not enumerable")
    out = []
    for L in cands:
        inv = try_invertible(L)
        if inv is not None:
            out.append(inv)
    return out


def _between_conductor_and_B(ext: QuadExtension) -> list:
    """``A``-submodules ``L`` with ``k B <= L <= B`` where ``A = Z + k B``."""
    k = ext.A.conductor // ext.B.conductor
    b1, b2 = [ext.elt(v) for v in _qkey_vectors(ext.B_key)]
    out = {}
    for a in range(1, k + 1):
        if k % a:
            continue
        for c in range(1, k + 1):
            if k % c:
                continue
            for b in range(c):
                if ((k // a) * b) % c:
                    continue
                gens = [b1 * a + b2 * b, b2 * c]
                exact = _qkey([ext.coords(g) for g in gens])
                L = ext.submodule(gens)
                if L.key == exact:
                    out[L.key] = L
    return [out[key] for key in sorted(out)]


def _enumerated_class_group(ext) -> ClassGroup:
    members = invertible_ideals(ext)
    units = _units_of_B(ext)
    prin = _principal_modules(ext)

    def class_key(L: Submodule):
        return min(ext.scale(L, u).key for u in units)

    reps = {}
    for inv in members:
        key = class_key(inv.L)
        if key not in reps:
            reps[key] = inv.L
    by_key = dict(reps)

    def op(k1, k2):
        return class_key(mul(by_key[k1], by_key[k2]))

    identity = class_key(ext.A_module)
    canonical_reps = {k: Submodule(ext, k) for k in reps}
    return _group_from(canonical_reps, op, identity, lambda L: class_key(
        L if isinstance(L, Submodule) else L.L), members=members, principal=prin, label=repr(ext))


def class_group_extension(ext) -> ClassGroup:
    """``C(A, B)`` with an explicit member list.

    Quadratic ``A`` in its field gives the form class group; an order inside a
    larger order or a finite extension is enumerated exhaustively.
    """
    if isinstance(ext, QuadExtension) and ext.B is None:
        return class_group_quad(ext.A.D)
    if isinstance(ext, QuadExtension) or (isinstance(ext, AlgebraExtension) and ext.is_finite):
        return _enumerated_class_group(ext)
    raise UnsupportedExtension("class group of this extension is not computable here")


# ---------------------------------------------------------------------------
# exact sequence verifiers


def _pic_map(L_A: Submodule, B: Optional[QuadOrder]) -> BQF:
    """Class in ``Pic(B)`` of ``L B`` for an invertible ideal ``L`` of ``A`` in the field."""
    if B is None:
        return BQF(1, 0, 1)
    big = QuadExtension(B)
    LB = extend_scalars(L_A, big)
    return reduce_form(ideal_to_form(LB))


def verify_pic_sequence(A, B=None) -> Report:
    """``0 -> C(A,B) -> Pic(A) -> Pic(B)``: injectivity and image equal to the kernel."""
    A = make_quad_order(A) if isinstance(A, int) else A
    B = make_quad_order(B) if isinstance(B, int) else B
    ext = QuadExtension(A, B)
    rep = Report("pic-seq", ext.to_json())
    picA = class_group_quad(A.D)
    cAB = class_group_extension(ext)
    field_ext = QuadExtension(A)

    def to_pic(L: Submodule) -> BQF:
        return reduce_form(ideal_to_form(field_ext.submodule(L.generators())))

    princ_B = principal_form(B.D) if B is not None else None
    images = {}
    for c in cAB.classes:
        f = to_pic(c.representative)
        if f in images.values():
            rep.fail(reason="two classes of C(A,B) collide in Pic(A)", cls=c.representative, form=f)
        images[c.key] = f
    for c1 in cAB.classes:
        for c2 in cAB.classes:
            if images[cAB.op(c1.key, c2.key)] != compose(images[c1.key], images[c2.key]):
                rep.fail(reason="map C(A,B) -> Pic(A) is not a homomorphism", a=c1.representative,
                         b=c2.representative)
    kernel = set()
    for f in picA.classes:
        img = _pic_map(f.representative, B)
        if B is None or img == princ_B:
            kernel.add(f.key)
        rep.add(form=f.key, image=img if B is not None else "trivial")
    if set(images.values()) != kernel:
        rep.fail(reason="image of C(A,B) differs from ker(Pic A -> Pic B)",
                 image=sorted(images.values()), kernel=sorted(kernel))
    rep.add(C_AB_factors=list(cAB.factors), pic_A_factors=list(picA.factors),
            kernel_order=len(kernel), invertible_count=len(cAB.members))
    return rep


def recover_kernel_witness(L, x, tower: TowerExtension) -> InvertibleIdeal:
    """``L_1 = {b in B : b x in L}``; checks invertibility over ``(A, B)`` and ``L = L_1 x``."""
    inv = _as_invertible(L)
    L = inv.L
    AC, AB = tower.AC, tower.AB
    if L.ext != AC:
        raise ParentMismatch("L must be an ideal of the extension A <= C")
    shifted = AC.scale(L, x.inverse())
    key = _qkey_intersection(shifted.key, AB.B_key)
    L1 = AB.submodule([AB.elt(v) for v in _qkey_vectors(key)])
    inv1 = try_invertible(L1)
    if inv1 is None:
        raise AssertionError("recovered module is not invertible over (A, B)")
    if AC.scale(AC.submodule(L1.generators()), x) != L:
        raise AssertionError("L != L_1 x")
    return inv1


def _unit_generator_over(ext: QuadExtension, M: Submodule):
    """Generator in ``B*`` (``K*`` for the field) of a principal module over ``ext``."""
    return is_principal(M)


def verify_tower(tower: TowerExtension) -> Report:
    """``0 -> C(A,B) -> C(A,C) -> C(B,C)`` elementwise, with constructive kernel witnesses."""
    rep = Report("tower", tower.to_json())
    AB, AC, BC = tower.AB, tower.AC, tower.BC
    try:
        gAB = class_group_extension(AB)
        gAC = class_group_extension(AC)
        gBC = class_group_extension(BC)
    except (SizeBoundExceeded, UnsupportedExtension) as exc:
        raise EnumerationImpossible(str(exc)) from exc

    def g_map(L: Submodule):
        return gAC.class_of(AC.submodule(L.generators()))

    def h_map(L: Submodule):
        return gBC.class_of(extend_scalars(L, BC))

    g_img = {}
    for c in gAB.classes:
        img = g_map(c.representative)
        if img in g_img.values():
            rep.fail(reason="g is not injective", cls=c.representative)
        g_img[c.key] = img
    for c in gAB.classes:
        if h_map(AC.submodule(c.representative.generators())) != gBC.identity:
            rep.fail(reason="h o g is not trivial", cls=c.representative)
    h_img = set()
    for c in gAC.classes:
        L = c.representative
        hk = h_map(L)
        h_img.add(hk)
        if hk != gBC.identity:
            continue
        LB = extend_scalars(L, BC)
        x = _unit_generator_over(BC, LB)
        if x is None:
            rep.fail(reason="LB has trivial class but no generator was found", cls=L)
            continue
        L1 = recover_kernel_witness(L, x, tower)
        if g_map(L1.L) != c.key:
            rep.fail(reason="recovered witness maps to a different class", cls=L)
        rep.add(kernel_class=L, x=x, L1=L1.L)
    if set(g_img.values()) != {c.key for c in gAC.classes if h_map(c.representative) == gBC.identity}:
        rep.fail(reason="im g != ker h")
    rep.add(orders=[gAB.order, gAC.order, gBC.order],
            factors=[list(gAB.factors), list(gAC.factors), list(gBC.factors)],
            h_surjective=len(h_img) == gBC.order)
    return rep


# ---------------------------------------------------------------------------
# reduction


def reduction_witness(ext: AlgebraExtension) -> RingMorphismWitness:
    """The morphism ``(A, B) -> (A_red, B_red)``."""
    B_red, q = reduce_ring(ext.B)
    A_red = q.image_lattice(ext.A_key)
    target = AlgebraExtension(B_red, A_red)
    return RingMorphismWitness(ext, target, q)


def _idealization_parts(ext: AlgebraExtension):
    B = ext.B
    if B.tags.get("kind") != "idealization":
        raise UnsupportedShape("lift needs an idealization-shaped extension")
    base = B.tags["base"]
    k = base.rank
    mdim = B.rank - k
    for i in range(k, B.rank):
        if not lattice_contains(ext.A_key, B.basis_vector(i)):
            raise UnsupportedShape("A must contain the whole module M")
    if base.nilradical() != base.zero_lattice():
        raise UnsupportedShape("lift needs a reduced base ring")
    base_A = hnf_rows([list(r[:k]) for r in ext.A_key] + base.relation_rows(), k)
    return base, k, mdim, base_A


def idealization_base_extension(ext: AlgebraExtension) -> AlgebraExtension:
    base, _, _, base_A = _idealization_parts(ext)
    return AlgebraExtension(base, base_A)


def idealization_lift(Lbar: Submodule, ext: AlgebraExtension) -> Submodule:
    """``Lbar -> Lbar + Lbar M`` inside ``B = R + M``."""
    base, k, mdim, _ = _idealization_parts(ext)
    B = ext.B
    gens = []
    for l in Lbar.generators():
        el = list(l) + [0] * mdim
        gens.append(el)
        for j in range(k, B.rank):
            gens.append(list(B.mul(el, B.basis_vector(j))))
    return ext.submodule(gens)


def idealization_forward(L: Submodule, base_ext: AlgebraExtension) -> Submodule:
    k = base_ext.B.rank
    return base_ext.submodule([tuple(g[:k]) for g in L.generators()])


def reduction_map(ext: AlgebraExtension) -> Report:
    """Forward map on classes along reduction, plus the idealization lift when available."""
    rep = Report("reduction", ext.to_json())
    lift_ok = True
    try:
        base_ext = idealization_base_extension(ext)
    except UnsupportedShape as exc:
        base_ext = None
        lift_ok = False
        rep.add(lift="unsupported", reason=str(exc))
    if ext.is_finite:
        phi = reduction_witness(ext)
        g = class_group_extension(ext)
        g_red = class_group_extension(phi.target)
        fmap = {}
        for inv in g.members:
            img = pushforward(inv.L, phi)
            if try_invertible(img) is None:
                rep.fail(reason="pushforward of an invertible ideal is not invertible", L=inv.L)
                continue
            cls = g_red.class_of(img)
            fmap.setdefault(g.class_of(inv.L), set()).add(cls)
        if any(len(v) != 1 for v in fmap.values()):
            rep.fail(reason="forward map is not well defined on classes")
        images = [next(iter(v)) for v in fmap.values()]
        if len(set(images)) != len(images) or set(images) != {c.key for c in g_red.classes}:
            rep.fail(reason="forward map is not a bijection on classes")
        rep.add(classes=len(g), reduced_classes=len(g_red))
        if lift_ok:
            for inv in invertible_ideals(base_ext):
                _check_lift(rep, ext, base_ext, inv)
    elif lift_ok:
        raise UnsupportedShape("use idealization_reduction_check for idealizations over orders")
    return rep


def _check_lift(rep: Report, ext, base_ext, inv: InvertibleIdeal, expect_class=None) -> Optional[InvertibleIdeal]:
    lifted = idealization_lift(inv.L, ext)
    linv = try_invertible(lifted)
    if linv is None:
        rep.fail(reason="lift is not invertible", Lbar=inv.L)
        return None
    back = idealization_forward(lifted, base_ext)
    if back != inv.L:
        rep.fail(reason="forward(lift(L)) != L", Lbar=inv.L)
    inv_lift = idealization_lift(inv.inverse, ext)
    if mul(lifted, inv_lift) != ext.A_module:
        rep.fail(reason="lift(L) * lift(L^-1) != A", Lbar=inv.L)
    return linv


def idealization_reduction_check(ext: AlgebraExtension, quad_ext: QuadExtension) -> Report:
    """Lift every class of ``C(A0, B0)`` for ``A = A0 + M <= B = B0 + M`` over quadratic orders.

    ``quad_ext`` is the extension ``A0 <= B0`` of orders; classes are moved
    between it and ``ext`` through ``B0``'s basis ``(1, w)``.
    """
    rep = Report("reduction", {"ext": ext.to_json(), "base": quad_ext.to_json()})
    base_ext = idealization_base_extension(ext)
    B0 = quad_ext.B
    g = class_group_extension(quad_ext)

    def to_alg(L: Submodule) -> Submodule:
        gens = []
        for e in L.generators():
            a, b = B0.element_coords(e)
            gens.append((int(a), int(b)))
        return base_ext.submodule(gens)

    def to_quad(L: Submodule) -> Submodule:
        return quad_ext.submodule([B0.from_coords(a, b) for a, b in L.generators()])

    if to_alg(quad_ext.A_module) != base_ext.A_module:
        rep.fail(reason="A0 does not match the base of the idealization")
        return rep
    lifts = {}
    for c in g.classes:
        Lbar = to_alg(c.representative)
        inv = try_invertible(Lbar)
        if inv is None:
            rep.fail(reason="class representative is not invertible in the algebra model", cls=c.key)
            continue
        linv = _check_lift(rep, ext, base_ext, inv)
        if linv is None:
            continue
        back = to_quad(idealization_forward(linv.L, base_ext))
        if g.class_of(back) != c.key:
            rep.fail(reason="forward o lift is not the identity on classes", cls=c.representative)
        principal = is_principal(linv) is not None
        if principal != (c.key == g.identity):
            rep.fail(reason="lift changes principality", cls=c.representative)
        lifts[c.key] = linv.L
        rep.add(cls=c.representative, lift=linv.L, principal=principal)
    for k1, k2 in itertools.product(lifts, lifts):
        prod = mul(lifts[k1], lifts[k2])
        target = lifts[g.op(k1, k2)]
        ok_same = is_principal(mul(prod, try_invertible(target).inverse)) is not None
        if not ok_same:
            rep.fail(reason="lift is not a homomorphism on classes")
    rep.add(order=g.order, factors=list(g.factors))
    return rep


# ---------------------------------------------------------------------------
# retraction, avoidance, units, tensor square


def check_retraction_vanishing(ext: AlgebraExtension, candidates=(), canonical_nonprincipal=()) -> Report:
    """Every invertible candidate is principal; listed ideals of ``A`` are not invertible in ``B``."""
    if not isinstance(ext, AlgebraExtension) or ext.retraction is None:
        raise NoRetraction("extension carries no retraction")
    rep = Report("retraction", ext.to_json())
    n_inv = 0
    for L in candidates:
        if L.is_zero():
            continue
        inv = try_invertible(L)
        if inv is None:
            continue
        n_inv += 1
        g = is_principal(inv)
        if g is None:
            rep.fail(reason="invertible but not principal", L=L)
    for L in canonical_nonprincipal:
        C = colon_into_A(L)
        prod = mul(L, C)
        if prod == ext.A_module:
            rep.fail(reason="canonical ideal became invertible", L=L)
        else:
            rep.add(noninvertible=L, colon_product=prod)
    rep.add(candidates=len(candidates), invertible=n_inv)
    return rep


def _covered(L: Submodule, covers) -> bool:
    ext = L.ext
    if _is_finite_alg(ext):
        lm = ext.mask(L.key)
        um = np.zeros_like(lm)
        for C in covers:
            um |= ext.mask(C.key)
        return not (lm & ~um).any()
    if isinstance(ext, QuadExtension):
        inter = [_qkey_intersection(L.key, C.key) for C in covers]
        if any(not k[1] or len(k[1]) < 2 for k in inter):
            inter = [k for k in inter if k[1] and len(k[1]) == 2]
            if not inter:
                return False
        N = inter[0]
        for k in inter[1:]:
            N = _qkey_intersection(N, k)
        # cosets of L / N, enumerated in L's basis
        lv = _qkey_vectors(L.key)
        nv = _qkey_vectors(N)
        rows = []
        for v in nv:
            z = _coords_in_basis(lv, v)
            rows.append([int(t) for t in z])
        Hn = hnf_rows(rows, 2)
        d1, d2 = Hn[0][0], Hn[1][1]
        for i in range(d1):
            for j in range(d2):
                el = tuple(i * a + j * b for a, b in zip(*lv))
                if not any(ext.contains(C, ext.elt(el)) for C in covers):
                    return False
        return True
    raise UnsupportedExtension("covering test not available for this extension")


def _coords_in_basis(basis, v):
    (a, b), (c, d) = basis
    det = a * d - b * c
    x = (v[0] * d - v[1] * c) / det
    y = (a * v[1] - b * v[0]) / det
    return x, y


def avoidance_check(L: Submodule, covers) -> dict:
    """Avoidance verdict: for invertible ``L`` covered by the union, some cover contains ``L``."""
    for C in covers:
        if C.ext != L.ext:
            raise ParentMismatch("covers live in another extension")
    invertible = (not L.is_zero()) and try_invertible(L) is not None
    covered = _covered(L, covers)
    container = next((i for i, C in enumerate(covers) if L <= C), None)
    verdict = {"invertible": invertible, "covered": covered, "container": container}
    if covered and container is None:
        verdict["avoidance"] = "fails"
        verdict["violation"] = invertible
    else:
        verdict["avoidance"] = "holds"
        verdict["violation"] = False
    return verdict


def avoidance_exhaustive(ext: AlgebraExtension, max_covers: int = 4, brute_force_limit: int = 0) -> Report:
    """All invertible ``L`` and all covers by at most ``max_covers`` submodules.

    A cover of ``L`` by submodules ``C_k`` restricts to the proper submodules
    ``L & C_k``, each inside a maximal proper submodule of ``L``; so it is enough
    to show that no ``max_covers`` maximal submodules of ``L`` cover ``L``.
    With ``brute_force_limit`` the direct check over arbitrary covers is run as
    well when there are at most that many submodules.
    """
    rep = Report("avoidance", ext.to_json())
    subs = ext.all_submodules()
    masks = {S.key: ext.mask(S.key) for S in subs}
    bits = {k: int.from_bytes(np.packbits(m, bitorder="little").tobytes(), "little") for k, m in masks.items()}
    n_inv = 0
    for L in subs:
        if L.is_zero() or try_invertible(L) is None:
            continue
        n_inv += 1
        lb = bits[L.key]
        proper = [S for S in subs if S.key != L.key and (bits[S.key] & ~lb) == 0]
        maximal = [S for S in proper
                   if not any(T.key != S.key and (bits[S.key] & ~bits[T.key]) == 0 for T in proper)]
        for r in range(1, max_covers + 1):
            for combo in itertools.combinations(maximal, r):
                u = 0
                for S in combo:
                    u |= bits[S.key]
                if u & lb == lb:
                    rep.fail(reason="invertible ideal covered by proper submodules", L=L, covers=list(combo))
        rep.add(L=L, maximal_submodules=len(maximal))
        if brute_force_limit and len(subs) <= brute_force_limit:
            for r in range(1, max_covers + 1):
                for combo in itertools.combinations(subs, r):
                    u = 0
                    for S in combo:
                        u |= bits[S.key]
                    if u & lb == lb and not any(bits[L.key] & ~bits[S.key] == 0 for S in combo):
                        rep.fail(reason="brute force: avoidance fails", L=L, covers=list(combo))
    rep.add(submodules=len(subs), invertible=n_inv)
    return rep


def avoidance_control() -> dict:
    """``F_4`` over ``F_2``: three lines cover the plane, no line contains it, and it is not invertible."""
    from .rings import f4
    F = f4()
    ext = AlgebraExtension(F, [F.one], name="F2 ⊆ F4")
    L = ext.whole()
    lines = [S for S in ext.all_submodules() if not S.is_zero() and S != L]
    verdict = avoidance_check(L, lines)
    verdict["lines"] = len(lines)
    return verdict


def verify_units_sequence(ext: AlgebraExtension) -> Report:
    """``|G(A,B)| = |B*/A*| * |C(A,B)|`` and ``u A* -> A u`` is injective onto the principal ideals."""
    rep = Report("units-seq", ext.to_json())
    g = class_group_extension(ext)
    nB, nA = len(ext.units_B), len(ext.units_A)
    if nB % nA:
        rep.fail(reason="A* does not divide B*")
    quotient = nB // nA
    cosets = {}
    for u in ext.units_B:
        P = ext.principal(u)
        cosets.setdefault(P.key, set()).add(u)
    if len(cosets) != quotient:
        rep.fail(reason="u A* -> A u is not injective", images=len(cosets), expected=quotient)
    for key, us in cosets.items():
        if len(us) != nA:
            rep.fail(reason="fibre of u -> A u is not an A*-coset", key=key)
    if len(g.members) != quotient * g.order:
        rep.fail(reason="|G| != |B*/A*| |C|", G=len(g.members), quotient=quotient, C=g.order)
    rep.add(G=len(g.members), units_B=nB, units_A=nA, C=g.order)
    return rep


def tensor_extension(ext: AlgebraExtension):
    T, i1, i2, mu = tensor_square(ext.B, ext.A_key)
    ext_T = AlgebraExtension(T, i1.image_lattice(ext.A_key), name=f"{ext!r} (x) ")
    return ext_T, i1, i2, mu


def verify_tensor_square(ext: AlgebraExtension) -> Report:
    """``C(A, B) -> C(A, B (x)_A B)`` along ``b -> b (x) 1`` is an isomorphism."""
    rep = Report("tensor-square", ext.to_json())
    ext_T, i1, i2, mu = tensor_extension(ext)
    for i in range(ext.B.rank):
        b = ext.B.basis_vector(i)
        if mu(i1(b)) != ext.B.reduce(b) or mu(i2(b)) != ext.B.reduce(b):
            rep.fail(reason="multiplication map does not retract the embeddings", i=i)
    for a in ext.A_key:
        if i1(a) != i2(a):
            rep.fail(reason="the two embeddings differ on A", a=a)
    phi = RingMorphismWitness(ext, ext_T, i1)
    g = class_group_extension(ext)
    gT = class_group_extension(ext_T)
    fmap = {}
    for inv in g.members:
        img = pushforward(inv.L, phi)
        if try_invertible(img) is None:
            rep.fail(reason="image is not invertible", L=inv.L)
            continue
        fmap.setdefault(g.class_of(inv.L), set()).add(gT.class_of(img))
    images = [next(iter(v)) for v in fmap.values() if len(v) == 1]
    if len(images) != len(fmap) or len(set(images)) != len(images) or len(images) != gT.order:
        rep.fail(reason="canonical map is not an isomorphism")
    for e in (ext, ext_T):
        sub = verify_units_sequence(e)
        if not sub.passed:
            rep.fail(reason="units sequence fails", ext=e.to_json())
    rep.add(C=g.order, C_T=gT.order, G=len(g.members), G_T=len(gT.members), T_size=ext_T.B.size)
    return rep
