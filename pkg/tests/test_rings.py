import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from classext.corpus import random_ring
from classext.errors import InconsistentPresentation, InvalidDiscriminant, SizeBoundExceeded, UnsupportedRing
from classext.intlat import lattice_contains
from classext.rings import (
    QuadElt,
    base_retraction,
    enum_bound,
    f4,
    finite_algebra,
    galois_field,
    group_ring,
    make_idealization,
    make_quad_order,
    product_ring,
    quotient,
    reduce_ring,
    tensor_square,
    total_fraction_ring,
    trunc_poly,
    zmod,
)


def lattice_set(R, lattice):
    return {tuple(int(v) for v in R.elements_array[k]) for k in R.lattice_elements(lattice)}


def idealizations():
    out = []
    for n in (2, 3, 4, 6, 8, 9):
        for m in (d for d in range(1, n + 1) if n % d == 0):
            out.append(make_idealization(zmod(n), 1, [[m]]))
    out.append(make_idealization(zmod(4), 2, [[2, 0], [0, 4]]))
    out.append(make_idealization(product_ring(zmod(2), zmod(3)), 1, [[0]]))
    out.append(make_idealization(f4(), 1, [[0]]))
    out.append(make_idealization(trunc_poly(zmod(2), 2), 1, [[0]]))
    return [R for R in out if R.size <= 512]


# ---------------------------------------------------------------------------
# quadratic orders


def test_quad_order_examples():
    O = make_quad_order(-20)
    assert (O.conductor, O.D0, O.d) == (1, -20, -5)
    O = make_quad_order(-36)
    assert (O.conductor, O.D0) == (3, -4)
    O = make_quad_order(-3)
    assert (O.conductor, O.D0) == (1, -3)


@pytest.mark.parametrize("D", [-5, 0, 4, 8, -1, 5])
def test_quad_order_rejects_bad_discriminants(D):
    with pytest.raises(InvalidDiscriminant):
        make_quad_order(D)


def test_quad_units_and_membership():
    O = make_quad_order(-20)
    assert O.is_unit(QuadElt(-5, 0, 1))[0] is False
    assert O.is_unit(QuadElt(-5, -1))[0] is True
    assert len(make_quad_order(-4).units()) == 4
    assert len(make_quad_order(-3).units()) == 6
    assert len(make_quad_order(-12).units()) == 2
    assert O.contains(QuadElt(-5, 1, 1))
    assert not O.contains(QuadElt(-5, 1, 1, 2))
    assert make_quad_order(-3).contains(QuadElt(-3, 1, 1, 2))


@given(st.integers(-60, -3).filter(lambda D: D % 4 in (0, 1)), st.integers(-20, 20), st.integers(-20, 20))
def test_omega_coordinates_round_trip(D, x, y):
    O = make_quad_order(D)
    e = O.from_coords(x, y)
    assert O.contains(e)
    assert O.element_coords(e) == (x, y)
    assert (e * e.conj()).v == 0


def test_quad_algebra_matches_field_arithmetic():
    O = make_quad_order(-36)
    R = O.algebra()
    rng = random.Random(1)
    for _ in range(50):
        a = (rng.randint(-9, 9), rng.randint(-9, 9))
        b = (rng.randint(-9, 9), rng.randint(-9, 9))
        prod = O.from_coords(*a) * O.from_coords(*b)
        assert O.from_coords(*R.mul(a, b)) == prod


def test_total_fraction_ring():
    O = make_quad_order(-20)
    K, emb = total_fraction_ring(O)
    assert K.d == -5
    R = zmod(6)
    T, iota = total_fraction_ring(R)
    assert T is R
    I = make_idealization(zmod(4), 1, [[2]])
    T, _ = total_fraction_ring(I)
    assert T is I


# ---------------------------------------------------------------------------
# finite rings


def test_idealization_examples():
    R = make_idealization(zmod(4), 1, [[2]])
    assert R.size == 8
    assert R.mul((0, 1), (0, 1)) == (0, 0)
    S = make_idealization(zmod(2), 1, [[2]])
    assert S.size == 4 and len(S.units()) == 2
    T = make_idealization(zmod(3), 1, [[1]])
    assert T.size == 3


def test_square_zero_module():
    for R in idealizations():
        k = R.tags["base"].rank
        for i, j in itertools.product(range(k, R.rank), repeat=2):
            assert not any(R.mul(R.basis_vector(i), R.basis_vector(j)))


def test_unit_examples():
    ok, inv = zmod(6).is_unit((5,))
    assert ok and inv == (5,)
    assert make_idealization(zmod(4), 1, [[2]]).is_unit((2, 1))[0] is False


def test_zero_divisor_examples():
    assert zmod(4).is_zero_divisor((2,))
    I = make_idealization(zmod(4), 1, [[2]])
    assert I.is_zero_divisor((2, 0))
    assert not I.is_zero_divisor((1, 1))


def test_nilradical_examples():
    R = zmod(4)
    assert lattice_set(R, R.nilradical()) == {(0,), (2,)}
    Rr, q = reduce_ring(R)
    assert Rr.size == 2
    I = make_idealization(zmod(3), 1, [[3]])
    assert lattice_set(I, I.nilradical()) == {(0, m) for m in range(3)}
    Ir, _ = reduce_ring(I)
    assert Ir.size == 3
    assert lattice_set(zmod(6), zmod(6).nilradical()) == {(0,)}


def test_maximal_ideal_examples():
    R = zmod(6)
    assert sorted(sorted(lattice_set(R, M)) for M in R.maximal_ideals()) == [
        [(0,), (2,), (4,)], [(0,), (3,)]]
    R = zmod(4)
    assert [lattice_set(R, M) for M in R.maximal_ideals()] == [{(0,), (2,)}]
    P = product_ring(zmod(2), zmod(2))
    assert sorted(sorted(lattice_set(P, M)) for M in P.maximal_ideals()) == [
        [(0, 0), (0, 1)], [(0, 0), (1, 0)]]


def _ring_battery():
    rng = random.Random(11)
    rings = [zmod(12), f4(), trunc_poly(zmod(4), 2), group_ring(zmod(3), 3), product_ring(zmod(4), f4())]
    rings += [random_ring(rng, 512) for _ in range(25)]
    return rings + idealizations()


def test_ring_axioms_hold_for_constructed_rings():
    for R in _ring_battery():
        R.validate()


def test_units_and_zero_divisors_partition_finite_rings():
    for R in _ring_battery():
        for x in R.elements():
            unit = R.is_unit(x)[0]
            assert unit != R.is_zero_divisor(x), (R, x)
            assert unit == bool(R.unit_mask[R.index(x)])


def test_idealization_zero_divisor_characterization():
    for R in idealizations():
        base = R.tags["base"]
        k = base.rank
        module = [x for x in R.elements() if not any(x[:k])]
        for x in R.elements():
            a = x[:k]
            in_ZR = base.is_zero_divisor(a)
            a_lift = tuple(a) + (0,) * (R.rank - k)
            in_ZM = any(not any(R.mul(a_lift, m)) for m in module if any(m))
            assert R.is_zero_divisor(x) == (in_ZR or in_ZM), (R, x)


def test_maximal_ideals_cover_exactly_the_nonunits():
    for R in _ring_battery():
        maxes = R.maximal_ideals()
        assert len(set(maxes)) == len(maxes)
        for M in maxes:
            assert R.is_maximal_ideal(M)
        union = set()
        for M in maxes:
            union |= lattice_set(R, M)
        nonunits = {x for x in R.elements() if not R.is_unit(x)[0]}
        assert union == nonunits


def test_reduction_kills_exactly_the_nilradical():
    for R in _ring_battery():
        Rr, q = reduce_ring(R)
        assert lattice_set(Rr, Rr.nilradical()) == {Rr.zero()}
        q.validate()
        image = {q(x) for x in R.elements()}
        assert len(image) == Rr.size
        kernel = {x for x in R.elements() if not any(q(x))}
        assert kernel == lattice_set(R, R.nilradical())


def test_quotient_map_is_a_ring_map():
    R = zmod(12)
    Q, q = quotient(R, [[4]])
    assert Q.size == 4
    q.validate()


def test_galois_field_rejects_reducible_modulus():
    with pytest.raises(InconsistentPresentation):
        galois_field(2, [1, 0])  # x^2 + 1 = (x + 1)^2 over F_2


def test_finite_algebra_checks_axioms():
    with pytest.raises(InconsistentPresentation):
        finite_algebra(2, [[[1, 0], [0, 1]], [[0, 1], [1, 1]]], [0, 1])
    with pytest.raises(InconsistentPresentation):
        # non-commutative table
        finite_algebra(2, [[[1, 0], [0, 1]], [[0, 0], [0, 1]]], [1, 0])


def test_size_bound_is_enforced(monkeypatch):
    monkeypatch.setenv("CLASSEXT_MAX_ENUM", "16")
    assert enum_bound() == 16
    R = zmod(5000)
    with pytest.raises(SizeBoundExceeded):
        R.maximal_ideals()


def test_retraction_maps():
    for B in (trunc_poly(zmod(4), 3), group_ring(zmod(3), 2), make_idealization(zmod(4), 1, [[2]])):
        f = base_retraction(B)
        f.validate()
        base = B.tags["base"]
        for i in range(base.rank):
            assert f(B.basis_vector(i)) == B.basis_vector(i)
    with pytest.raises(UnsupportedRing):
        base_retraction(zmod(4))


# ---------------------------------------------------------------------------
# tensor squares


def test_tensor_square_of_a_ring_over_itself():
    B = zmod(6)
    T, i1, i2, mu = tensor_square(B, B.whole_lattice())
    assert T.size == B.size


def test_tensor_square_diagonal():
    B = product_ring(zmod(2), zmod(2))
    T, i1, i2, mu = tensor_square(B, [list(B.one)])
    assert T.size == 16
    for x in B.elements():
        assert mu(i1(x)) == x and mu(i2(x)) == x


def test_tensor_square_f4_splits_as_a_product_of_two_copies():
    F = f4()
    T, i1, i2, mu = tensor_square(F, [list(F.one)])
    assert T.size == 16
    idem = [e for e in T.idempotents() if any(e) and e != T.one]
    assert len(idem) == 2
    e = idem[0]
    for part in (e, T.sub(T.one, e)):
        # each factor T e is a field with four elements
        factor = {T.mul(part, x) for x in T.elements()}
        assert len(factor) == 4
        assert sum(1 for y in factor if any(T.mul(y, z) == part for z in factor)) == 3


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_tensor_square_multiplication_fixes_the_first_copy(seed):
    from classext.corpus import random_extension
    rng = random.Random(seed)
    ext = random_extension(rng, 32)
    T, i1, i2, mu = tensor_square(ext.B, ext.A_key)
    for b in ext.B.elements():
        assert mu(i1(b)) == b
    for a in ext.A_key:
        assert i1(a) == i2(a)
    assert lattice_contains(T.whole_lattice(), list(T.one))
