from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from classext.classgrp import is_principal
from classext.errors import NotInvertible
from classext.extensions import QuadExtension, mul
from classext.quadforms import BQF, form_to_ideal, ideal_to_form, reduce_form, reduced_forms
from classext.rings import QuadElt, make_quad_order
from classext.torsor import (
    build_torsor,
    check_commutativity,
    check_power_law,
    check_vanishing,
    graded_unit_search,
    torsor_report,
)

O5 = make_quad_order(-20)
E5 = QuadExtension(O5)


def q(u, v=0, w=1):
    return QuadElt(-5, u, v, w)


def L2():
    return E5.submodule([q(2), q(1, 1)])


def test_unit_ideal():
    T = build_torsor(E5.A_module, 3)
    assert all(T.components[n] == E5.A_module for n in range(-3, 4))
    assert check_commutativity(T)["status"] == "pass"
    cert = check_vanishing(T)["certificate"]
    assert sum((x * y for x, y in cert), q(0)) == 1
    assert graded_unit_search(T, 0, 5)["unit"] == 1


def test_powers_of_the_order_two_ideal():
    L = L2()
    T = build_torsor(L, 3)
    assert T.components[2] == E5.principal(q(2))
    assert T.components[3] == mul(E5.principal(q(2)), L)
    assert T.components[-1] == E5.submodule([q(1), q(1, -1, 2)])
    norms = [E5.norm(T.components[n]) for n in (1, 2, 3, -1)]
    assert norms == [2, 4, 8, Fraction(1, 2)]
    assert not check_power_law(T)
    assert check_commutativity(T)["status"] == "pass"


def test_three_over_minus_20():
    L = E5.submodule([q(3), q(1, 1)])
    T = build_torsor(L, 2)
    assert reduce_form(ideal_to_form(L)) == BQF(2, 2, 3)
    assert is_principal(T.components[2]) is not None
    assert is_principal(L) is None


def test_vanishing_certificate_examples():
    cert = check_vanishing(build_torsor(L2(), 3))["certificate"]
    assert sum((x * y for x, y in cert), q(0)) == 1
    # the hand certificate (1 + sqrt(-5)) (1 - sqrt(-5))/2 - 2 * 1 = 1
    assert q(1, 1) * q(1, -1, 2) - q(2) == 1
    ext = QuadExtension(make_quad_order(-23))
    L = form_to_ideal(BQF(2, 1, 3), ext)
    T = build_torsor(L, 3)
    cert = check_vanishing(T)["certificate"]
    total = sum((x * y for x, y in cert), QuadElt(-23, 0))
    assert total == 1
    assert all(T.components[1].contains(x) and T.components[-1].contains(y) for x, y in cert)


def test_unit_search_examples():
    assert graded_unit_search(build_torsor(L2(), 3), 1, 20) is None
    T = build_torsor(E5.principal(q(0, 1)), 3)
    hit = graded_unit_search(T, 1, 20)
    assert hit is not None
    u = hit["unit"]
    assert u * hit["inverse"] == 1
    assert E5.principal(u) == E5.principal(q(0, 1))
    assert hit["inverse"] in (q(0, -1, 5), q(0, 1, 5))
    with pytest.raises(ValueError):
        graded_unit_search(T, 4, 5)


def test_not_invertible_rejected():
    ext = QuadExtension(make_quad_order(-12))
    # the conductor ideal 2 Z[(1+sqrt(-3))/2] is not invertible over Z[sqrt(-3)]
    L = ext.submodule([QuadElt(-3, 2), QuadElt(-3, 1, 1)])
    with pytest.raises(NotInvertible):
        build_torsor(L, 2)


def test_report_is_serializable():
    rep = torsor_report(build_torsor(L2(), 2), height=10)
    assert rep["commutativity"] == "pass" and rep["unit_search"] == "absent at height 10"
    assert set(rep["torsor"]["components"]) == {str(n) for n in range(-2, 3)}


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([D for D in range(-3, -201, -1) if D % 4 in (0, 1)]), st.data())
def test_random_torsors(D, data):
    ext = QuadExtension(make_quad_order(D))
    f = data.draw(st.sampled_from(reduced_forms(D)))
    L = form_to_ideal(f, ext)
    T = build_torsor(L, 2)
    assert check_commutativity(T)["status"] == "pass"
    assert check_vanishing(T)["status"] == "pass"
    assert (graded_unit_search(T, 1, 50) is not None) == (is_principal(L) is not None)
