"""Positive definite binary quadratic forms ``a x^2 + b x y + c y^2``.

Reduction records an ``SL2(Z)`` transform, composition follows Dirichlet's
united forms, and the dictionary with ideals of ``O_D`` is

    (a, b, c)  ->  a Z + ((-b + sqrt(D)) / 2) Z
    L with oriented basis (al, be)  ->  (N(al), -Tr(al * conj(be)), N(be)) / N(L)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Optional

from .errors import DiscriminantMismatch, InvalidDiscriminant, NotInvertible
from .intlat import xgcd
from .rings import QuadElt, QuadOrder, make_quad_order


@dataclass(frozen=True, order=True)
class BQF:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_primitive(self) -> bool:
        return gcd(gcd(self.a, self.b), self.c) == 1

    def is_positive_definite(self) -> bool:
        return self.a > 0 and self.disc < 0

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def validate(self) -> "BQF":
        if not self.is_positive_definite():
            raise InvalidDiscriminant(f"{self} is not positive definite")
        if not self.is_primitive():
            raise InvalidDiscriminant(f"{self} is not primitive")
        return self

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def act(self, M) -> "BQF":
        """``f o M``: the form ``(x, y) -> f(p x + q y, r x + s y)`` for ``M = ((p, q), (r, s))``."""
        (p, q), (r, s) = M
        a, b, c = self.a, self.b, self.c
        return BQF(a * p * p + b * p * r + c * r * r,
                   2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
                   a * q * q + b * q * s + c * s * s)

    def opposite(self) -> "BQF":
        """Inverse class: ``(a, -b, c)``."""
        return BQF(self.a, -self.b, self.c)

    def __str__(self):
        return f"({self.a},{self.b},{self.c})"

    def to_json(self) -> list:
        return [str(self.a), str(self.b), str(self.c)]


def _mat_mul(M, N):
    return ((M[0][0] * N[0][0] + M[0][1] * N[1][0], M[0][0] * N[0][1] + M[0][1] * N[1][1]),
            (M[1][0] * N[0][0] + M[1][1] * N[1][0], M[1][0] * N[0][1] + M[1][1] * N[1][1]))


S_MOVE = ((0, -1), (1, 0))


def T_MOVE(k: int):
    return ((1, k), (0, 1))


def reduce_with_transform(f: BQF) -> tuple[BQF, tuple, list]:
    """Reduced form ``g``, matrix ``M`` in ``SL2(Z)`` with ``g = f o M``, and the move word."""
    f.validate()
    M = ((1, 0), (0, 1))
    word = []
    g = f
    while True:
        a, b = g.a, g.b
        k = (a - b) // (2 * a)
        if k:
            g = g.act(T_MOVE(k))
            M = _mat_mul(M, T_MOVE(k))
            word.append(("T", k))
        if g.a > g.c:
            g = g.act(S_MOVE)
            M = _mat_mul(M, S_MOVE)
            word.append(("S", 1))
            continue
        break
    if g.a == g.c and g.b < 0:
        g = g.act(S_MOVE)
        M = _mat_mul(M, S_MOVE)
        word.append(("S", 1))
    return g, M, word


def reduce_form(f: BQF) -> BQF:
    return reduce_with_transform(f)[0]


def principal_form(D: int) -> BQF:
    _check_disc(D)
    b = D % 2
    return BQF(1, b, (b * b - D) // 4)


def compose(f: BQF, g: BQF) -> BQF:
    """Reduced Dirichlet composite of two primitive forms of the same discriminant."""
    D = f.disc
    if g.disc != D:
        raise DiscriminantMismatch(f"{f} and {g} have different discriminants")
    f.validate()
    g.validate()
    a1, b1 = f.a, f.b
    a2, b2 = g.a, g.b
    h = (b1 + b2) // 2
    e1, s1, t1 = xgcd(a1, a2)
    e, s2, w = xgcd(e1, h)
    u, v = s1 * s2, t1 * s2
    B = (u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + D) // 2) // e
    a3 = a1 * a2 // (e * e)
    B %= 2 * a3
    c3, rem = divmod(B * B - D, 4 * a3)
    assert rem == 0, "composition congruence failed"
    return reduce_form(BQF(a3, B, c3))


def form_power(f: BQF, n: int) -> BQF:
    D = f.disc
    out = principal_form(D)
    base = reduce_form(f) if n >= 0 else reduce_form(f.opposite())
    n = abs(n)
    while n:
        if n & 1:
            out = compose(out, base)
        base = compose(base, base)
        n >>= 1
    return out


def _check_disc(D: int) -> None:
    if not isinstance(D, int) or D >= 0 or D % 4 not in (0, 1):
        raise InvalidDiscriminant(f"{D} is not a negative discriminant")


def reduced_forms(D: int) -> list[BQF]:
    """All primitive reduced forms of discriminant ``D``, sorted."""
    _check_disc(D)
    out = []
    amax = isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            c, r = divmod(b * b - D, 4 * a)
            if r or c < a:
                continue
            f = BQF(a, b, c)
            if f.is_reduced() and f.is_primitive():
                out.append(f)
    return sorted(out)


def class_number(D: int) -> int:
    return len(reduced_forms(D))


# ---------------------------------------------------------------------------
# the form/ideal dictionary


def form_basis(f: BQF, order: QuadOrder) -> tuple[QuadElt, QuadElt]:
    """Oriented basis ``(a, (-b + sqrt(D))/2)`` of the ideal attached to ``f``."""
    if f.disc != order.D:
        raise DiscriminantMismatch(f"form {f} does not have discriminant {order.D}")
    s = isqrt(order.D // order.d)
    return QuadElt(order.d, f.a), QuadElt(order.d, -f.b, s, 2)


def form_to_ideal(f: BQF, ext):
    """The ``A``-submodule ``a Z + ((-b + sqrt(D))/2) Z`` of the extension's ambient ring."""
    if isinstance(ext, QuadOrder):
        from .extensions import QuadExtension
        ext = QuadExtension(ext)
    al, be = form_basis(f, ext.A)
    L = ext.submodule([al, be])
    return L


def oriented_basis(L) -> tuple[QuadElt, QuadElt, Fraction]:
    """A ``Z``-basis of ``L`` with positive orientation and its index-style norm."""
    ext = L.ext
    vecs = [ext.coords(g) for g in L.generators()]
    if len(vecs) != 2:
        raise NotInvertible("lattice is not of full rank")
    (x1, y1), (x2, y2) = vecs
    det = x1 * y2 - x2 * y1
    if det < 0:
        vecs = [vecs[1], vecs[0]]
        det = -det
    al, be = ext.elt(vecs[0]), ext.elt(vecs[1])
    return al, be, det


def ideal_to_form(L) -> BQF:
    """The (unreduced) norm form of an invertible ideal of a quadratic order."""
    al, be, n = oriented_basis(L)
    a = al.norm() / n
    b = -(al * be.conj()).trace() / n
    c = be.norm() / n
    if any(x.denominator != 1 for x in (a, b, c)):
        raise NotInvertible("norm form is not integral")
    f = BQF(int(a), int(b), int(c))
    if f.disc != L.ext.A.D or not f.is_primitive():
        raise NotInvertible(f"norm form {f} is not primitive of discriminant {L.ext.A.D}")
    return f


def principal_generator(L) -> tuple[BQF, Optional[QuadElt]]:
    """Reduced form of ``L`` and, when it is the principal form, a generator of ``L``."""
    al, be, _ = oriented_basis(L)
    f = ideal_to_form(L)
    g, M, _ = reduce_with_transform(f)
    if g != principal_form(f.disc):
        return g, None
    (p, _q), (r, _s) = M
    # f(x, y) = N(x*al - y*be) / N(L), so g(1, 0) = 1 picks out p*al - r*be
    gen = al * p - be * r
    if (gen.u, gen.v) < (0, 0):
        gen = -gen
    return g, gen


def brute_force_class_number(D: int) -> int:
    """Count proper classes by union-find over forms in a box under ``S`` and ``T^{+-1}``.

    Independent of reduction and composition; meant for small ``|D|``.
    """
    _check_disc(D)
    bound = 2 * (-D) + 8
    forms = {}
    for a in range(1, bound + 1):
        for b in range(-bound, bound + 1):
            if (b - D) % 2:
                continue
            c, r = divmod(b * b - D, 4 * a)
            if r or c > bound or c < 1:
                continue
            if gcd(gcd(a, b), c) == 1:
                forms[(a, b, c)] = (a, b, c)

    def find(x):
        while forms[x] != x:
            forms[x] = forms[forms[x]]
            x = forms[x]
        return x

    for (a, b, c) in list(forms):
        for nb in ((c, -b, a), (a, b + 2 * a, a + b + c), (a, b - 2 * a, a - b + c)):
            if nb in forms:
                ra, rb = find((a, b, c)), find(nb)
                if ra != rb:
                    forms[max(ra, rb)] = min(ra, rb)
    return len({find(x) for x in forms})
