import itertools
import random
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from classext.classgrp import class_group_quad, is_principal
from classext.errors import DiscriminantMismatch, InvalidDiscriminant
from classext.extensions import QuadExtension, mul
from classext.quadforms import (
    BQF,
    brute_force_class_number,
    class_number,
    compose,
    form_power,
    form_to_ideal,
    ideal_to_form,
    principal_form,
    principal_generator,
    reduce_form,
    reduce_with_transform,
    reduced_forms,
)
from classext.rings import QuadElt, make_quad_order

DISCS = [D for D in range(-3, -101, -1) if D % 4 in (0, 1)]


def sl2_words(length):
    S = ((0, -1), (1, 0))
    T = ((1, 1), (0, 1))
    Ti = ((1, -1), (0, 1))
    for n in range(length + 1):
        yield from itertools.product((S, T, Ti), repeat=n)


def orbit(f, length):
    out = {f}
    for word in sl2_words(length):
        g = f
        for M in word:
            g = g.act(M)
        out.add(g)
    return out


# ---------------------------------------------------------------------------
# examples


def test_reduce_examples():
    assert reduce_form(BQF(1, 0, 5)) == BQF(1, 0, 5)
    assert reduce_form(BQF(6, 2, 1)) == BQF(1, 0, 5)
    assert reduce_form(BQF(2, -2, 3)) == BQF(2, 2, 3)


def test_reduce_example_against_word_search():
    # (6, 2, 1) reaches (1, 0, 5) by a short SL2 word
    assert BQF(1, 0, 5) in orbit(BQF(6, 2, 1), 4)


def test_compose_examples():
    assert compose(BQF(2, 2, 3), BQF(2, 2, 3)) == BQF(1, 0, 5)
    assert compose(BQF(2, 1, 3), BQF(2, -1, 3)) == BQF(1, 1, 6)
    f = BQF(2, -1, 3)
    assert compose(f, principal_form(-23)) == reduce_form(f)
    with pytest.raises(DiscriminantMismatch):
        compose(BQF(2, 2, 3), BQF(2, 1, 3))


def test_reduced_forms_examples():
    assert reduced_forms(-20) == [BQF(1, 0, 5), BQF(2, 2, 3)]
    assert set(reduced_forms(-23)) == {BQF(1, 1, 6), BQF(2, 1, 3), BQF(2, -1, 3)}
    assert reduced_forms(-163) == [BQF(1, 1, 41)]
    assert class_number(-20) == 2 and class_number(-23) == 3 and class_number(-163) == 1
    with pytest.raises(InvalidDiscriminant):
        reduced_forms(-21)


def test_form_to_ideal_examples():
    O = make_quad_order(-20)
    ext = QuadExtension(O)
    assert form_to_ideal(BQF(1, 0, 5), O) == ext.A_module
    L = form_to_ideal(BQF(2, 2, 3), ext)
    assert L == ext.submodule([QuadElt(-5, 2), QuadElt(-5, -1, 1)])
    assert L == ext.submodule([QuadElt(-5, 2), QuadElt(-5, 1, 1)])
    with pytest.raises(DiscriminantMismatch):
        form_to_ideal(BQF(2, 1, 3), ext)


def test_round_trip_at_minus_47():
    ext = QuadExtension(make_quad_order(-47))
    rng = random.Random(47)
    forms = reduced_forms(-47)
    for _ in range(20):
        f = rng.choice(forms)
        scale = QuadElt(-47, rng.randint(1, 5), rng.randint(-3, 3))
        L = mul(form_to_ideal(f, ext), ext.principal(scale))
        assert reduce_form(ideal_to_form(L)) == f


def test_principal_generator_examples():
    ext = QuadExtension(make_quad_order(-20))
    g, gen = principal_generator(ext.principal(QuadElt(-5, 2)))
    assert g == BQF(1, 0, 5) and gen == QuadElt(-5, 2)
    g, gen = principal_generator(form_to_ideal(BQF(2, 2, 3), ext))
    assert g == BQF(2, 2, 3) and gen is None


def test_form_power():
    f = BQF(2, 1, 3)
    assert form_power(f, 3) == principal_form(-23)
    assert form_power(f, -1) == BQF(2, -1, 3)
    assert form_power(f, 0) == principal_form(-23)


# ---------------------------------------------------------------------------
# properties


@st.composite
def forms_and_matrices(draw):
    D = draw(st.sampled_from(DISCS))
    f = draw(st.sampled_from(reduced_forms(D)))
    p, q = draw(st.integers(-6, 6)), draw(st.integers(-6, 6))
    if gcd(p, q) != 1:
        p, q = 1, 0
    # complete (p, q) to a matrix of determinant 1
    from classext.intlat import xgcd
    _, s, t = xgcd(p, q)
    return f, ((p, -t), (q, s))


@given(forms_and_matrices())
def test_reduction_is_class_invariant(fm):
    f, M = fm
    g = f.act(M)
    assert g.disc == f.disc
    assert reduce_form(g) == f
    r, T, _ = reduce_with_transform(g)
    assert g.act(T) == r
    assert reduce_form(r) == r


@settings(max_examples=60)
@given(st.sampled_from(DISCS), st.data())
def test_composition_group_laws(D, data):
    forms = reduced_forms(D)
    f, g, h = (data.draw(st.sampled_from(forms)) for _ in range(3))
    assert compose(f, g) == compose(g, f)
    assert compose(compose(f, g), h) == compose(f, compose(g, h))
    assert compose(f, g) in forms
    assert compose(f, reduce_form(f.opposite())) == principal_form(D)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(DISCS), st.data())
def test_ideal_products_shadow_composition(D, data):
    ext = QuadExtension(make_quad_order(D))
    forms = reduced_forms(D)
    f, g = data.draw(st.sampled_from(forms)), data.draw(st.sampled_from(forms))
    L = mul(form_to_ideal(f, ext), form_to_ideal(g, ext))
    assert reduce_form(ideal_to_form(L)) == compose(f, g)


@pytest.mark.parametrize("D", DISCS)
def test_class_numbers_match_orbit_oracle(D):
    h = class_number(D)
    assert brute_force_class_number(D) == h
    G = class_group_quad(D)
    assert G.order == h
    prod = 1
    for d in G.factors:
        prod *= d
    assert prod == h


@pytest.mark.parametrize("D", [-20, -23, -36, -47, -56, -84])
def test_principality_tracks_the_principal_form(D):
    ext = QuadExtension(make_quad_order(D))
    for f in reduced_forms(D):
        L = form_to_ideal(f, ext)
        g, gen = principal_generator(L)
        assert (gen is not None) == (f == principal_form(D))
        assert (is_principal(L) is not None) == (gen is not None)
        if gen is not None:
            assert ext.principal(gen) == L
