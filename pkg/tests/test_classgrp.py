import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from classext.classgrp import (
    avoidance_check,
    avoidance_control,
    avoidance_exhaustive,
    check_retraction_vanishing,
    class_group_extension,
    class_group_quad,
    idealization_reduction_check,
    invertible_ideals,
    is_principal,
    maximal_ideals_of_A,
    principalize_semilocal,
    recover_kernel_witness,
    reduction_map,
    try_invertible,
    verify_pic_sequence,
    verify_tensor_square,
    verify_tower,
    verify_units_sequence,
)
from classext.corpus import random_extension, random_idealization_pair, retraction_extension
from classext.errors import MaximalIdealListInvalid, NoRetraction, NotInvertible, ZeroModule
from classext.extensions import AlgebraExtension, QuadExtension, TowerExtension, colon_into_A, mul
from classext.quadforms import BQF, compose, form_to_ideal
from classext.rings import QuadElt, f4, make_idealization, make_quad_order, product_ring, zmod
from classext.suites import fixed_small_extensions, z3i_idealization, z3i_kernel_roundtrip

E5 = QuadExtension(make_quad_order(-20))


def q(u, v=0, w=1):
    return QuadElt(-5, u, v, w)


def f2_f4():
    return fixed_small_extensions()[0]


def diagonal():
    return fixed_small_extensions()[1]


def certificate_total(inv):
    ext = inv.ext
    total = None
    for x, y in zip(inv.xs, inv.ys):
        p = ext.multiply(x, y)
        total = p if total is None else (total + p if isinstance(p, QuadElt) else ext.B.add(total, p))
    return total


# ---------------------------------------------------------------------------
# invertibility and principality


def test_try_invertible_examples():
    inv = try_invertible(E5.submodule([q(2), q(1, 1)]))
    assert inv is not None and inv.check()
    assert certificate_total(inv) == 1
    assert inv.inverse == E5.submodule([q(1), q(1, -1, 2)])
    # 2 Z[(1 + sqrt(-3))/2] is the conductor of Z[sqrt(-3)]; it is not invertible there
    E3 = QuadExtension(make_quad_order(-12))
    assert try_invertible(E3.submodule([QuadElt(-3, 2), QuadElt(-3, 1, 1)])) is None
    with pytest.raises(ZeroModule):
        try_invertible(E5.submodule([q(0)]))


def test_is_principal_examples():
    assert is_principal(E5.submodule([q(2), q(1, 1)])) is None
    assert is_principal(E5.principal(q(1, 1))) in (q(1, 1), q(-1, -1))
    ext = f2_f4()
    w = (0, 1)
    g = is_principal(ext.principal(w))
    assert g is not None and ext.principal(g) == ext.principal(w)
    with pytest.raises(NotInvertible):
        is_principal(f2_f4().whole())


def test_principalize_examples():
    ext = AlgebraExtension(zmod(6))
    L = ext.principal((5,))
    out = principalize_semilocal(L)
    assert ext.principal(out["g"]) == L
    assert zmod(6).is_unit(out["g"])[0]
    D = diagonal()
    out = principalize_semilocal(D.principal((1, 1)))
    assert D.principal(out["g"]) == D.A_module


def test_principalize_rejects_bad_maximal_ideal_lists():
    ext = AlgebraExtension(zmod(6))
    maxes = maximal_ideals_of_A(ext)
    with pytest.raises(MaximalIdealListInvalid):
        principalize_semilocal(ext.A_module, maxes[:1])
    with pytest.raises(MaximalIdealListInvalid):
        principalize_semilocal(ext.A_module, maxes + [[[1]]])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_invertible_finite_ideals_are_principal(seed):
    ext = random_extension(random.Random(seed), 128)
    for L in ext.all_submodules():
        if L.is_zero():
            continue
        inv = try_invertible(L)
        if inv is None:
            continue
        assert inv.check()
        out = principalize_semilocal(inv)
        assert ext.principal(out["g"]) == L
        assert mul(L, ext.principal(out["y"])) == ext.A_module
        assert is_principal(inv) is not None


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_inverses_are_unique(seed):
    ext = random_extension(random.Random(seed), 32)
    subs = [S for S in ext.all_submodules() if not S.is_zero()]
    for L in subs:
        partners = [M for M in subs if mul(L, M) == ext.A_module]
        inv = try_invertible(L)
        if inv is None:
            assert not partners
        else:
            assert partners == [inv.inverse]
            assert colon_into_A(inv.inverse) == L


# ---------------------------------------------------------------------------
# class groups


def test_class_group_examples():
    assert class_group_quad(-20).factors == (2,)
    assert class_group_quad(-23).factors == (3,)
    assert class_group_quad(-4).order == 1
    g = class_group_extension(QuadExtension(make_quad_order(-36), make_quad_order(-4)))
    assert g.factors == (2,)
    g = class_group_extension(f2_f4())
    assert g.order == 1 and len(g.members) == 3


def test_class_group_law_matches_composition():
    G = class_group_quad(-47)
    assert G.order == 5 and G.factors == (5,)
    for c1, c2 in itertools.product(G.classes, repeat=2):
        assert G.op(c1.key, c2.key) == compose(c1.key, c2.key)
    ext = QuadExtension(make_quad_order(-47))
    for c in G.classes:
        L = form_to_ideal(c.key, ext)
        assert G.class_of(L) == c.key


def test_self_extension_is_trivial():
    for R in (zmod(12), f4(), product_ring(zmod(2), zmod(3))):
        assert class_group_extension(AlgebraExtension(R)).order == 1
    O = make_quad_order(-36)
    assert class_group_extension(QuadExtension(O, O)).order == 1


def test_invertible_ideal_counts_for_conductor_extension():
    ext = QuadExtension(make_quad_order(-36), make_quad_order(-4))
    members = invertible_ideals(ext)
    # |G(A,B)| = |B*/A*| |C(A,B)| = 2 * 2
    assert len(members) == 4


# ---------------------------------------------------------------------------
# exact sequences


@pytest.mark.parametrize("A,B", [(-20, None), (-36, -4), (-100, -4), (-100, None), (-63, -7), (-75, -3)])
def test_pic_sequence_examples(A, B):
    assert verify_pic_sequence(A, B).passed


def test_tower_example_and_kernel_witness():
    tower = TowerExtension(make_quad_order(-36), make_quad_order(-4))
    rep = verify_tower(tower)
    assert rep.passed
    out = z3i_kernel_roundtrip()
    assert out["L1_invertible_over_AB"]
    assert tower.AC.scale(tower.AC.submodule(out["L1"].generators()), out["x"]) == out["L"]


def test_degenerate_towers():
    O = make_quad_order(-36)
    assert verify_tower(TowerExtension(O, O)).passed
    assert verify_tower(TowerExtension(O, O, O)).passed


FUNDAMENTAL = [D for D in range(-3, -101, -1) if D % 4 in (0, 1) and make_quad_order(D).conductor == 1]
CHAINS = [(D0, f) for D0 in FUNDAMENTAL for f in range(2, 8)]


@pytest.mark.parametrize("D0,f", CHAINS)
def test_tower_property_over_conductor_chains(D0, f):
    A = make_quad_order(f * f * D0)
    for g in [g for g in range(1, f) if f % g == 0]:
        assert verify_tower(TowerExtension(A, make_quad_order(g * g * D0))).passed


def test_kernel_witness_rejects_foreign_ideals():
    tower = TowerExtension(make_quad_order(-36), make_quad_order(-4))
    with pytest.raises(Exception):
        recover_kernel_witness(E5.A_module, QuadElt(-1, 1, 1), tower)


# ---------------------------------------------------------------------------
# reduction, retraction, avoidance, units, tensor square


def test_reduction_over_the_gaussian_idealization():
    ext, qext = z3i_idealization()
    rep = idealization_reduction_check(ext, qext)
    assert rep.passed
    assert rep.witnesses[-1]["order"] == 2


def test_reduction_on_random_idealizations():
    rng = random.Random(5)
    for _ in range(8):
        assert reduction_map(random_idealization_pair(rng)).passed


def test_retraction_vanishing_exhaustive():
    B = make_idealization(zmod(4), 1, [[2]])
    ext = retraction_extension(B)
    assert check_retraction_vanishing(ext, ext.all_submodules()).passed
    with pytest.raises(NoRetraction):
        check_retraction_vanishing(AlgebraExtension(zmod(4)), [])


def test_avoidance_examples():
    control = avoidance_control()
    assert control["covered"] and control["container"] is None
    assert not control["invertible"] and control["avoidance"] == "fails"
    assert not control["violation"]
    ext = diagonal()
    verdict = avoidance_check(ext.A_module, [ext.A_module])
    assert verdict["avoidance"] == "holds" and verdict["container"] == 0
    for e in fixed_small_extensions():
        assert avoidance_exhaustive(e, brute_force_limit=24).passed


def test_avoidance_on_quadratic_ideals():
    L = E5.submodule([q(2), q(1, 1)])
    covers = [E5.principal(q(2)), E5.principal(q(1, 1))]
    # 3 + sqrt(-5) lies in L but in neither cover
    v = avoidance_check(L, covers)
    assert not v["covered"] and v["avoidance"] == "holds"
    v = avoidance_check(L, [L])
    assert v["covered"] and v["container"] == 0


@pytest.mark.parametrize("idx", [0, 1])
def test_units_and_tensor_on_fixed_extensions(idx):
    ext = fixed_small_extensions()[idx]
    assert verify_units_sequence(ext).passed
    assert verify_tensor_square(ext).passed


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_units_sequence_on_random_extensions(seed):
    ext = random_extension(random.Random(seed), 128)
    rep = verify_units_sequence(ext)
    assert rep.passed, rep.to_json()


def test_report_serialization_is_canonical():
    rep = verify_pic_sequence(-36, -4)
    doc = rep.to_json()
    assert doc["status"] == "pass" and doc["theorem"] == "pic-seq"
    assert doc == verify_pic_sequence(-36, -4).to_json()


def test_form_ideal_class_of_order_two():
    ext = QuadExtension(make_quad_order(-20))
    L = form_to_ideal(BQF(2, 2, 3), ext)
    assert class_group_quad(-20).class_of(mul(L, L)) == BQF(1, 0, 5)
