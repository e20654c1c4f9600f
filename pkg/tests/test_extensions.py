import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from classext.classgrp import try_invertible
from classext.corpus import random_extension
from classext.errors import ElementNotInAmbient, InvalidMorphism, NotIntermediate, ParentMismatch
from classext.extensions import (
    AlgebraExtension,
    QuadExtension,
    RingMorphismWitness,
    colon_into_A,
    contains,
    equals,
    extend_scalars,
    identity_witness,
    is_contained,
    mul,
    power,
    pushforward,
    submodule,
    sum_modules,
)
from classext.quadforms import form_to_ideal, reduced_forms
from classext.rings import QuadElt, RingMap, make_quad_order, product_ring, trunc_poly, zmod

R5 = make_quad_order(-20)
K5 = QuadExtension(R5)
s5 = QuadElt(-5, 0, 1)


def q(u, v=0, w=1, d=-5):
    return QuadElt(d, u, v, w)


def L2():
    return K5.submodule([q(2), q(1, 1)])


def members(L, box=6):
    """Elements of ``L`` with small coordinates in ``L``'s basis (oracle helper)."""
    gens = L.generators()
    return [sum((g * c for g, c in zip(gens, cs)), q(0))
            for cs in itertools.product(range(-box, box + 1), repeat=len(gens))]


# ---------------------------------------------------------------------------
# quadratic family


def test_submodule_examples():
    L = L2()
    assert L.contains(q(2)) and L.contains(q(1, 1))
    assert not L.contains(q(1))
    assert K5.norm(L) == 2
    assert K5.submodule([q(1)]) == K5.A_module
    P = product_ring(zmod(2), zmod(2))
    ext = AlgebraExtension(P, [P.one])
    S = ext.submodule([(1, 0)])
    assert ext.size_of(S) == 2 and S.contains((1, 0)) and not S.contains((0, 1))


def test_submodule_is_closed_under_A():
    L = L2()
    for x in members(L, 3):
        assert L.contains(x * s5)


def test_product_examples():
    L = L2()
    assert mul(L, L) == K5.principal(q(2))
    assert K5.norm(mul(L, L)) == 4
    assert mul(L, K5.A_module) == L
    u = q(-1)
    assert mul(K5.principal(u), K5.principal(u.inverse())) == K5.A_module


def test_colon_examples():
    L = L2()
    C = colon_into_A(L)
    assert C == K5.submodule([q(1), q(1, -1, 2)])
    assert mul(L, C) == K5.A_module
    assert colon_into_A(K5.A_module) == K5.A_module
    P = product_ring(zmod(2), zmod(2))
    ext = AlgebraExtension(P, [P.one])
    assert colon_into_A(ext.submodule([(1, 0)])) == ext.submodule([(0, 1)])


def test_colon_matches_membership_oracle():
    L = L2()
    C = colon_into_A(L)
    # b in C iff b * generators of L lie in A
    for u, v in itertools.product(range(-4, 5), repeat=2):
        for w in (1, 2, 4):
            b = q(u, v, w)
            inside = all(R5.contains(b * g) for g in L.generators())
            assert inside == C.contains(b)


def test_membership_examples_and_sum():
    L = L2()
    assert contains(L, q(2)) and not contains(L, q(1))
    assert equals(sum_modules(L, L), L)
    assert is_contained(K5.principal(q(2)), L)


def test_element_outside_ambient():
    ext = QuadExtension(make_quad_order(-36), make_quad_order(-4))
    with pytest.raises(ElementNotInAmbient):
        ext.submodule([QuadElt(-1, 1, 0, 2)])


def test_parent_mismatch():
    other = QuadExtension(make_quad_order(-23))
    with pytest.raises(ParentMismatch):
        mul(L2(), other.A_module)


def test_extend_scalars_examples():
    A, B = make_quad_order(-36), make_quad_order(-4)
    AK = QuadExtension(A)
    L = AK.submodule([QuadElt(-1, 2), QuadElt(-1, -1, 3)])
    LB = extend_scalars(L, QuadExtension(B))
    assert LB == QuadExtension(B).principal(QuadElt(-1, 1, 1))
    assert extend_scalars(AK.A_module, B) == QuadExtension(B).A_module
    u = QuadElt(-1, 0, 1)
    assert extend_scalars(AK.principal(u), B) == QuadExtension(B).principal(u)
    with pytest.raises(NotIntermediate):
        extend_scalars(QuadExtension(B).A_module, A)


def test_serialization_round_trip():
    L = L2()
    assert K5.submodule_from_json(L.to_json()) == L
    doc = L.to_json()
    assert set(doc) == {"ext", "den", "hnf"}
    assert all(isinstance(x, str) for row in doc["hnf"] for x in row)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([-20, -23, -36, -47, -56, -84, -100]), st.data())
def test_product_commutative_associative_and_inverse_monotone(D, data):
    ext = QuadExtension(make_quad_order(D))
    forms = reduced_forms(D)
    Ls = [form_to_ideal(data.draw(st.sampled_from(forms)), ext) for _ in range(3)]
    a, b, c = Ls
    assert mul(a, b) == mul(b, a)
    assert mul(mul(a, b), c) == mul(a, mul(b, c))
    for L in Ls:
        assert is_contained(mul(L, colon_into_A(L)), ext.A_module)
    # inclusion reverses inverses
    ab = mul(a, b)
    assert is_contained(ab, a)
    assert is_contained(colon_into_A(a), colon_into_A(ab))
    assert power(a, 2) == mul(a, a)


# ---------------------------------------------------------------------------
# finite family


def trunc_pair():
    B4, B2 = trunc_poly(zmod(4), 2), trunc_poly(zmod(2), 2)
    E4 = AlgebraExtension(B4, [[1, 0]])
    E2 = AlgebraExtension(B2, [[1, 0]])
    phi = RingMorphismWitness(E4, E2, RingMap(B4, B2, ((1, 0), (0, 1))))
    return E4, E2, phi


def test_pushforward_examples():
    E4, E2, phi = trunc_pair()
    L = E4.submodule([(2, 1)])
    assert pushforward(L, phi) == E2.submodule([(0, 1)])
    assert pushforward(E4.A_module, phi) == E2.A_module
    ident = identity_witness(E4)
    assert pushforward(L, ident) == L


def test_pushforward_respects_products():
    E4, E2, phi = trunc_pair()
    subs = [S for S in E4.all_submodules() if not S.is_zero()]
    for L, M in itertools.product(subs, repeat=2):
        assert pushforward(mul(L, M), phi) == mul(pushforward(L, phi), pushforward(M, phi))


def test_invalid_witness_rejected():
    B4, B2 = trunc_poly(zmod(4), 2), trunc_poly(zmod(2), 2)
    E4, E2 = AlgebraExtension(B4, [[1, 0]]), AlgebraExtension(B2, [[1, 0]])
    with pytest.raises(InvalidMorphism):
        RingMorphismWitness(E4, E2, RingMap(B4, B2, ((1, 0), (1, 0))))


def test_subring_must_be_closed():
    B = trunc_poly(zmod(2), 3)
    with pytest.raises(Exception):
        AlgebraExtension(B, [[1, 0, 0], [0, 1, 0]])  # x^2 is missing


def _finite_oracle_submodule(ext, gens):
    """Span of A * gens by brute force."""
    B = ext.B
    A_elems = [x for x in B.elements() if ext.A_module.contains(x)]
    out = {B.zero()}
    frontier = True
    while frontier:
        frontier = False
        for a in A_elems:
            for g in gens:
                for s in list(out):
                    y = B.add(s, B.mul(a, g))
                    if y not in out:
                        out.add(y)
                        frontier = True
    return out


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_finite_submodules_match_brute_force(seed):
    rng = random.Random(seed)
    ext = random_extension(rng, 64)
    B = ext.B
    gens = [rng.choice(B.elements()) for _ in range(rng.randint(1, 2))]
    L = ext.submodule(gens)
    oracle = _finite_oracle_submodule(ext, gens)
    assert {x for x in B.elements() if L.contains(x)} == oracle
    C = colon_into_A(L)
    colon = {b for b in B.elements()
             if all(ext.A_module.contains(B.mul(b, x)) for x in oracle)}
    assert {x for x in B.elements() if C.contains(x)} == colon
    assert is_contained(mul(L, C), ext.A_module)
    inv = try_invertible(L) if not L.is_zero() else None
    if inv is not None:
        assert inv.inverse == C


def test_enumerated_submodules_are_distinct_and_complete_for_small_rings():
    P = product_ring(zmod(2), zmod(2))
    ext = AlgebraExtension(P, [P.one])
    subs = ext.all_submodules()
    assert len(subs) == 5  # subspaces of F_2^2
    assert len({S.key for S in subs}) == len(subs)
    assert all(S == submodule(ext, S.generators()) for S in subs)
