"""Seeded batteries of instances shared by the CLI and the acceptance tests.

Every function returns a :class:`~classext.classgrp.Report` whose content
depends only on its arguments.
"""

from __future__ import annotations

import random

from .classgrp import (
    Report,
    avoidance_control,
    avoidance_exhaustive,
    check_retraction_vanishing,
    class_group_extension,
    class_group_quad,
    idealization_reduction_check,
    is_principal,
    principalize_semilocal,
    recover_kernel_witness,
    reduction_map,
    tensor_extension,
    try_invertible,
    verify_pic_sequence,
    verify_tensor_square,
    verify_tower,
    verify_units_sequence,
)
from .corpus import random_corpus, random_extension, random_idealization_pair, retraction_extension
from .errors import SizeBoundExceeded
from .extensions import AlgebraExtension, QuadExtension, TowerExtension
from .quadforms import brute_force_class_number, form_to_ideal, reduced_forms
from .rings import (
    QuadElt,
    f4,
    group_ring,
    make_idealization,
    make_quad_order,
    order_embedding_rows,
    product_ring,
    trunc_poly,
    zmod,
)
from .torsor import build_torsor, check_commutativity, check_power_law, check_vanishing, graded_unit_search

DEFAULT_SEED = 20250101

CLASS_NUMBER_TABLE = {-4: (1, ()), -20: (2, (2,)), -23: (3, (3,)), -36: (2, (2,)),
                      -47: (5, (5,)), -163: (1, ())}


def discriminants(bound: int) -> list:
    """Negative discriminants ``D`` with ``|D| <= bound``, in decreasing order."""
    return [D for D in range(-3, -bound - 1, -1) if D % 4 in (0, 1)]


def conductor_chain(D: int) -> list:
    """Discriminants ``f'^2 D_0`` of the orders containing ``O_D`` (``f'`` a proper divisor of ``f``)."""
    O = make_quad_order(D)
    f, D0 = O.conductor, O.D0
    return [g * g * D0 for g in range(1, f) if f % g == 0]


# ---------------------------------------------------------------------------


def class_number_suite() -> Report:
    rep = Report("class-numbers", {"table": {str(D): h for D, (h, _) in CLASS_NUMBER_TABLE.items()}})
    for D, (h, factors) in sorted(CLASS_NUMBER_TABLE.items(), reverse=True):
        scan = len(reduced_forms(D))
        g = class_group_quad(D)
        oracle = brute_force_class_number(D)
        if scan != h or g.order != h or tuple(g.factors) != factors or oracle != h:
            rep.fail(D=D, scan=scan, order=g.order, factors=list(g.factors), oracle=oracle)
        rep.add(D=D, h=g.order, factors=list(g.factors))
    return rep


def pic_sequence_suite(bound: int = 500) -> Report:
    """Every ``O_D <= K`` and every conductor extension ``O_D <= O_{D'}`` with ``|D| <= bound``."""
    rep = Report("pic-seq", {"bound": bound})
    count = 0
    for D in discriminants(bound):
        for B in [None] + conductor_chain(D):
            r = verify_pic_sequence(D, B)
            count += 1
            if not r.passed:
                rep.fail(A=D, B=B if B is not None else "K", report=r)
    rep.add(extensions=count)
    return rep


def tower_suite(A: int = -36, B: int = -4) -> Report:
    """Tower ``O_A <= O_B <= K`` with the kernel witness round trip."""
    tower = TowerExtension(make_quad_order(A), make_quad_order(B))
    rep = verify_tower(tower)
    return rep


def z3i_kernel_roundtrip() -> dict:
    """The nontrivial kernel class of ``Z + 3Z[i] <= Q(i)`` comes back from ``x = 1 + i``."""
    tower = TowerExtension(make_quad_order(-36), make_quad_order(-4))
    AC = tower.AC
    d = AC.A.d
    x = QuadElt(d, 1, 1)
    L = AC.submodule([QuadElt(d, 2), QuadElt(d, -1, 3)])
    L1 = recover_kernel_witness(L, x, tower)
    return {"L": L, "x": x, "L1": L1.L, "L1_invertible_over_AB": L1.check()}


def semilocal_suite(seed: int = DEFAULT_SEED, count: int = 100, max_size: int = 512) -> Report:
    """Invertible ideals of random finite extensions are principal with a CRT generator."""
    rep = Report("semilocal", {"seed": seed, "count": count, "max_size": max_size})
    n_inv = 0
    for ext in random_corpus(seed, count, max_size):
        for L in ext.all_submodules():
            if L.is_zero():
                continue
            inv = try_invertible(L)
            if inv is None:
                continue
            n_inv += 1
            if is_principal(inv) is None:
                rep.fail(reason="invertible but not principal", ext=repr(ext), L=L)
                continue
            try:
                principalize_semilocal(inv)
            except AssertionError as exc:
                rep.fail(reason=str(exc), ext=repr(ext), L=L)
    rep.add(extensions=count, invertible=n_inv)
    return rep


def fixed_small_extensions() -> list:
    """``F_2 <= F_4`` and the diagonal ``Z/2 <= Z/2 x Z/2``."""
    F = f4()
    P = product_ring(zmod(2), zmod(2))
    return [AlgebraExtension(F, [F.one], name="F2 ⊆ F4"),
            AlgebraExtension(P, [P.one], name="Z/2 diag ⊆ Z/2 x Z/2")]


def units_suite(seed: int = DEFAULT_SEED, count: int = 20) -> Report:
    rep = Report("units-seq", {"seed": seed, "count": count})
    exts = fixed_small_extensions() + random_corpus(seed + 1, count, max_size=256, cap=400)
    for ext in exts:
        r = verify_units_sequence(ext)
        if not r.passed:
            rep.fail(ext=repr(ext), report=r)
        else:
            rep.add(ext=repr(ext), counts=r.witnesses[-1])
    return rep


def tensor_suite(seed: int = DEFAULT_SEED, count: int = 10) -> Report:
    rep = Report("tensor-square", {"seed": seed, "count": count})
    rng = random.Random(seed + 2)
    exts = fixed_small_extensions()
    while len(exts) < count + 2:
        ext = random_extension(rng, 64)
        if ext.B.size ** 2 > 4096:
            continue
        exts.append(ext)
    for ext in exts:
        try:
            r = verify_tensor_square(ext)
        except SizeBoundExceeded:
            continue
        if not r.passed:
            rep.fail(ext=repr(ext), report=r)
        else:
            rep.add(ext=repr(ext))
    return rep


def avoidance_suite(seed: int = DEFAULT_SEED, count: int = 40, max_size: int = 256,
                    brute_force_limit: int = 24) -> Report:
    rep = Report("avoidance", {"seed": seed, "count": count, "max_size": max_size})
    exts = fixed_small_extensions() + random_corpus(seed + 3, count, max_size=max_size, cap=300)
    for ext in exts:
        r = avoidance_exhaustive(ext, max_covers=4, brute_force_limit=brute_force_limit)
        if not r.passed:
            rep.fail(ext=repr(ext), report=r)
    control = avoidance_control()
    sharp = control["covered"] and control["container"] is None and not control["invertible"]
    if not sharp:
        rep.fail(reason="control does not exhibit a failure of avoidance", control=control)
    rep.add(extensions=len(exts), control=control)
    return rep


def torsor_suite(bound: int = 100, N: int = 3, height: int = 50) -> Report:
    """Reduced-form ideals with ``|D| <= bound``: power law, symmetry, certificate and unit search."""
    rep = Report("torsor", {"bound": bound, "N": N, "height": height})
    n = 0
    for D in discriminants(bound):
        ext = QuadExtension(make_quad_order(D))
        for f in reduced_forms(D):
            L = form_to_ideal(f, ext)
            T = build_torsor(L, N)
            n += 1
            if check_power_law(T):
                rep.fail(reason="power law", D=D, form=f)
            if check_commutativity(T)["status"] != "pass":
                rep.fail(reason="structure constants", D=D, form=f)
            check_vanishing(T)
            unit = graded_unit_search(T, 1, height) is not None
            principal = is_principal(L) is not None
            if unit != principal:
                rep.fail(reason="unit search disagrees with principality", D=D, form=f,
                         unit=unit, principal=principal)
    rep.add(ideals=n)
    return rep


def z3i_idealization() -> tuple:
    """``O_{-36} + M <= Z[i] + M`` with ``M = Z[i]/3`` and the matching quadratic extension."""
    Zi = make_quad_order(-4)
    A0 = make_quad_order(-36)
    B = make_idealization(Zi.algebra(), 1, [[3]])
    rows = [list(r) + [0, 0] for r in order_embedding_rows(A0, Zi)]
    rows += [list(B.basis_vector(i)) for i in (2, 3)]
    return AlgebraExtension(B, rows, name="O_-36 + M ⊆ Z[i] + M"), QuadExtension(A0, Zi)


def reduction_suite(seed: int = DEFAULT_SEED, count: int = 20) -> Report:
    rep = Report("reduction", {"seed": seed, "count": count})
    ext, qext = z3i_idealization()
    r = idealization_reduction_check(ext, qext)
    if not r.passed:
        rep.fail(ext=repr(ext), report=r)
    rng = random.Random(seed + 4)
    for _ in range(count):
        e = random_idealization_pair(rng)
        r = reduction_map(e)
        if not r.passed:
            rep.fail(ext=repr(e), report=r)
    rep.add(pairs=count + 1)
    return rep


def _z5_canonical(ext: AlgebraExtension, B) -> list:
    """``(2, 1 + sqrt(-5))`` and ``(3, 1 + sqrt(-5))`` of ``Z[sqrt(-5)]`` in base coordinates."""
    pad = [0] * (B.rank - 2)
    # omega = -10 + sqrt(-5), so 1 + sqrt(-5) = 11 + omega
    return [ext.submodule([[2, 0] + pad, [11, 1] + pad]),
            ext.submodule([[3, 0] + pad, [11, 1] + pad])]


def retraction_suite() -> Report:
    rep = Report("retraction", {"families": ["idealization", "trunc_poly", "group_ring", "tensor_square"]})
    R5 = make_quad_order(-20).algebra()
    families = [make_idealization(R5, 1, [[3]]), make_idealization(R5, 1, [[2]])]
    families += [trunc_poly(R5, k) for k in (2, 3, 4)]
    families += [group_ring(R5, m) for m in (2, 3, 4)]
    for B in families:
        ext = retraction_extension(B)
        canon = _z5_canonical(ext, B)
        cands = list(canon) + [ext.A_module]
        for i in range(2, B.rank):
            cands.append(ext.principal(B.basis_vector(i)))
            v = list(B.one)
            v[i] += 1
            cands.append(ext.principal(v))
        r = check_retraction_vanishing(ext, cands, canon)
        if not r.passed:
            rep.fail(ext=repr(B), report=r)
        rep.add(ext=repr(B), certified_noninvertible=sum(1 for w in r.witnesses if "noninvertible" in w))
    finite = [make_idealization(zmod(4), 1, [[2]]), make_idealization(zmod(6), 1, [[6]]),
              trunc_poly(zmod(4), 2), trunc_poly(zmod(2), 4), trunc_poly(zmod(6), 3),
              group_ring(zmod(2), 4), group_ring(zmod(3), 3), group_ring(zmod(6), 2)]
    for B in finite:
        ext = retraction_extension(B)
        r = check_retraction_vanishing(ext, ext.all_submodules())
        if not r.passed:
            rep.fail(ext=repr(B), report=r)
    for ext in fixed_small_extensions():
        ext_T, i1, _, mu = tensor_extension(ext)
        rT = AlgebraExtension(ext_T.B, i1.image_lattice(ext.B.whole_lattice()),
                              retraction=mu.compose(i1), name=f"tensor square of {ext!r}")
        r = check_retraction_vanishing(rT, rT.all_submodules())
        if not r.passed:
            rep.fail(ext=repr(rT), report=r)
    rep.add(extensions=len(families) + len(finite) + 2)
    return rep


def self_extension_smoke() -> Report:
    """``C(R, R) = 0`` on a few rings."""
    rep = Report("self-extension", {"rings": ["Z/12", "F4", "Z/4[x]/(x^2)"]})
    for R in (zmod(12), f4(), trunc_poly(zmod(4), 2)):
        g = class_group_extension(AlgebraExtension(R))
        if g.order != 1:
            rep.fail(ring=repr(R), order=g.order)
    return rep
