"""Degree-truncated graded algebra ``A(L) = sum_{|n| <= N} L^n`` of an invertible ideal.

Components are ideal powers inside the quadratic field, each with an HNF
basis; homogeneous products are recorded as integer structure constants.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .classgrp import InvertibleIdeal, canonical, try_invertible
from .errors import NotInvertible, UnsupportedExtension
from .extensions import QuadExtension, Submodule, colon_into_A, mul
from .rings import QuadElt

DEFAULT_TRUNCATION = 3


@dataclass
class TorsorAlgebra:
    ext: QuadExtension
    L: Submodule
    N: int
    components: dict
    bases: dict
    constants: dict = field(default_factory=dict)

    def degree_basis(self, n: int) -> list:
        return self.bases[n]

    def element(self, n: int, coeffs) -> QuadElt:
        """Homogeneous element of degree ``n`` with integer coordinates in that degree's basis."""
        out = QuadElt(self.ext.A.d, 0)
        for c, b in zip(coeffs, self.bases[n]):
            out = out + b * c
        return out

    def multiply(self, m: int, x, n: int, y) -> tuple:
        """Coordinates in degree ``m + n`` of the product of two homogeneous coordinate vectors."""
        C = self.constants[(m, n)]
        r = len(self.bases[m + n])
        out = [0] * r
        for i, xi in enumerate(x):
            for j, yj in enumerate(y):
                if xi and yj:
                    for k in range(r):
                        out[k] += xi * yj * C[i][j][k]
        return tuple(out)

    def to_json(self) -> dict:
        comps = {str(n): self.components[n].to_json() for n in sorted(self.components)}
        return {"D": str(self.ext.A.D), "L": self.L.to_json(), "N": str(self.N), "components": comps}


def _coords_in(ext: QuadExtension, basis, x) -> list:
    v = ext.coords(x)
    (a, b), (c, d) = [ext.coords(e) for e in basis]
    det = a * d - b * c
    s = (v[0] * d - v[1] * c) / det
    t = (a * v[1] - b * v[0]) / det
    return [s, t]


def build_torsor(L, N: int = DEFAULT_TRUNCATION) -> TorsorAlgebra:
    """Powers ``L^n`` for ``|n| <= N`` and structure constants for ``|m + n| <= N``."""
    if N < 1:
        raise ValueError("truncation must be >= 1")
    inv = L if isinstance(L, InvertibleIdeal) else try_invertible(L)
    if inv is None:
        raise NotInvertible("torsor algebras need an invertible ideal")
    L = inv.L
    ext = L.ext
    if not isinstance(ext, QuadExtension) or ext.B is not None:
        raise UnsupportedExtension("torsor algebras are built over an order inside its field")
    comps = {0: ext.A_module, 1: L, -1: inv.inverse}
    for n in range(2, N + 1):
        comps[n] = mul(comps[n - 1], L)
        comps[-n] = mul(comps[-(n - 1)], inv.inverse)
    for n in range(1, N + 1):
        if colon_into_A(comps[n]) != comps[-n]:
            raise AssertionError(f"L^-{n} differs from (L^{n})^-1")
    bases = {n: comps[n].generators() for n in comps}
    T = TorsorAlgebra(ext, L, N, comps, bases)
    for m in range(-N, N + 1):
        for n in range(-N, N + 1):
            if abs(m + n) > N:
                continue
            target = bases[m + n]
            table = []
            for x in bases[m]:
                row = []
                for y in bases[n]:
                    c = _coords_in(ext, target, x * y)
                    if any(t.denominator != 1 for t in c):
                        raise AssertionError(f"product of degrees {m}, {n} left L^{m + n}")
                    row.append(tuple(int(t) for t in c))
                table.append(row)
            T.constants[(m, n)] = table
    return T


def check_power_law(T: TorsorAlgebra) -> list:
    """Pairs ``(m, n)`` where ``L^m L^n != L^{m+n}`` (empty when the law holds)."""
    bad = []
    for m in range(-T.N, T.N + 1):
        for n in range(-T.N, T.N + 1):
            if abs(m + n) <= T.N and mul(T.components[m], T.components[n]) != T.components[m + n]:
                bad.append((m, n))
    return bad


def check_commutativity(T: TorsorAlgebra) -> dict:
    """Symmetry of structure constants plus the power law and associativity where defined."""
    asym = []
    for (m, n), C in T.constants.items():
        D = T.constants[(n, m)]
        for i, j in itertools.product(range(len(C)), range(len(C[0]))):
            if C[i][j] != D[j][i]:
                asym.append((m, n, i, j))
    nonassoc = []
    N = T.N
    for m, n, p in itertools.product(range(-N, N + 1), repeat=3):
        if max(abs(m + n), abs(n + p), abs(m + n + p)) > N:
            continue
        for i, j, k in itertools.product(range(2), repeat=3):
            ei = [1 if t == i else 0 for t in range(2)]
            ej = [1 if t == j else 0 for t in range(2)]
            ek = [1 if t == k else 0 for t in range(2)]
            left = T.multiply(m + n, T.multiply(m, ei, n, ej), p, ek)
            right = T.multiply(m, ei, n + p, T.multiply(n, ej, p, ek))
            if left != right:
                nonassoc.append((m, n, p, i, j, k))
    power = check_power_law(T)
    ok = not asym and not nonassoc and not power
    return {"status": "pass" if ok else "fail", "asymmetric": asym, "nonassociative": nonassoc,
            "power_law_failures": power}


def check_vanishing(T: TorsorAlgebra) -> dict:
    """Certificate ``1 = sum x_k y_k`` with ``x_k`` of degree 1 and ``y_k`` of degree -1."""
    ext = T.ext
    if mul(T.components[1], T.components[-1]) != T.components[0]:
        raise AssertionError("degree 1 times degree -1 is not A")
    xs, ys = T.bases[1], T.bases[-1]
    products = [x * y for x in xs for y in ys]
    z = ext.solve_combination(products, 1)
    if z is None:
        raise AssertionError("no certificate although L L^-1 = A")
    cert = []
    total = QuadElt(ext.A.d, 0)
    for i, x in enumerate(xs):
        y = QuadElt(ext.A.d, 0)
        for j, yj in enumerate(ys):
            y = y + yj * z[i * len(ys) + j]
        if y.is_zero():
            continue
        if not T.components[-1].contains(y):
            raise AssertionError("certificate factor left L^-1")
        cert.append((x, y))
        total = total + x * y
    if total != 1:
        raise AssertionError("certificate does not sum to 1")
    return {"status": "pass", "certificate": cert}


def _signed_order(h: int) -> list:
    out = [0]
    for k in range(1, h + 1):
        out += [k, -k]
    return out


def graded_unit_search(T: TorsorAlgebra, d: int, height: int) -> Optional[dict]:
    """First homogeneous unit of degree ``d`` with coordinates of height at most ``height``.

    Candidates are ordered by height, then lexicographically with
    ``0, 1, -1, 2, -2, ...``. A unit ``u`` of degree ``d`` forces
    ``L^d = A u``, so only candidates of norm ``N(L^d)`` are tested.
    """
    if abs(d) > T.N:
        raise ValueError("degree outside the truncation window")
    ext = T.ext
    basis = T.bases[d]
    target = ext.norm(T.components[d])
    # norm form N(s b1 + t b2) = (A s^2 + B s t + C t^2) / den
    b1, b2 = basis
    qa, qb, qc = b1.norm(), (b1 * b2.conj()).trace(), b2.norm()
    den = 1
    for x in (qa, qb, qc, target):
        den = den * x.denominator // np.gcd(den, x.denominator)
    ia, ib, ic, it = (int(x * den) for x in (qa, qb, qc, target))
    rank = {v: i for i, v in enumerate(_signed_order(height))}
    vals = np.arange(-height, height + 1, dtype=object)
    S, Tt = np.meshgrid(vals, vals, indexing="ij")
    norms = ia * S * S + ib * S * Tt + ic * Tt * Tt
    hits = [(int(s), int(t)) for s, t in zip(S[norms == it], Tt[norms == it])]
    hits.sort(key=lambda st: (max(abs(st[0]), abs(st[1])), rank[st[0]], rank[st[1]]))
    for s, t in hits:
        u = b1 * s + b2 * t
        if u.is_zero():
            continue
        inv = u.inverse()
        if T.components[-d].contains(inv):
            return {"degree": d, "coords": (s, t), "unit": u, "inverse": inv}
    return None


def torsor_report(T: TorsorAlgebra, height: int = 50) -> dict:
    comm = check_commutativity(T)
    van = check_vanishing(T)
    unit = graded_unit_search(T, 1, height)
    return canonical({"torsor": T.to_json(), "commutativity": comm["status"],
                      "vanishing": van["status"], "certificate": van["certificate"],
                      "degree_one_unit": None if unit is None else unit["unit"],
                      "unit_search": "found" if unit else f"absent at height {height}"})
