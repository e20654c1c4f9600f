"""Seeded generators of finite extensions for the property sweeps."""

from __future__ import annotations

import random
from typing import Optional

from .errors import InconsistentPresentation, SizeBoundExceeded
from .extensions import AlgebraExtension
from .intlat import hnf_rows, lattice_contains
from .rings import (
    StructAlgebra,
    base_embedding,
    base_retraction,
    galois_field,
    group_ring,
    make_idealization,
    poly_quotient,
    product_ring,
    trunc_poly,
    zmod,
)

# irreducible moduli [c_0, ..., c_{k-1}] of x^k + ... over small primes
_FIELDS = [(2, [1, 1]), (2, [1, 1, 0]), (3, [1, 0]), (2, [1, 0, 1]), (5, [2, 0]), (3, [2, 0, 1])]
_REDUCED_MODULI = [2, 3, 5, 6, 7, 10, 15]


def generated_subring(B: StructAlgebra, elements) -> tuple:
    """HNF lattice of the smallest subring of ``B`` containing ``elements``."""
    r = B.rank
    rows = [list(B.one)] + [list(B.element(e)) for e in elements]
    H = hnf_rows(rows + B.relation_rows(), r)
    while True:
        new = [list(B.mul(a, b)) for a in H for b in H]
        H2 = hnf_rows([list(x) for x in H] + new, r)
        if H2 == H:
            return H
        H = H2


def random_reduced_ring(rng: random.Random, max_size: int) -> StructAlgebra:
    while True:
        kind = rng.choice(["zmod", "field", "product"])
        if kind == "zmod":
            R = zmod(rng.choice(_REDUCED_MODULI))
        elif kind == "field":
            p, mod = rng.choice(_FIELDS)
            R = galois_field(p, mod)
        else:
            R = product_ring(zmod(rng.choice([2, 3, 5])), zmod(rng.choice([2, 3])))
        if R.size <= max_size:
            return R


def random_ring(rng: random.Random, max_size: int) -> StructAlgebra:
    """A random finite ring of size at most ``max_size``."""
    while True:
        kind = rng.choice(["zmod", "field", "product", "trunc", "group", "ideal", "polyq"])
        try:
            if kind == "zmod":
                R = zmod(rng.randint(2, min(max_size, 64)))
            elif kind == "field":
                p, mod = rng.choice(_FIELDS)
                R = galois_field(p, mod)
            elif kind == "product":
                R = product_ring(random_ring(rng, 16), random_ring(rng, 16))
            elif kind == "trunc":
                R = trunc_poly(zmod(rng.choice([2, 3, 4, 5, 6])), rng.randint(2, 3))
            elif kind == "group":
                R = group_ring(zmod(rng.choice([2, 3, 4, 6])), rng.randint(2, 3))
            elif kind == "ideal":
                n = rng.choice([2, 3, 4, 6, 8, 9])
                m = rng.choice([d for d in range(2, n + 1) if n % d == 0])
                R = make_idealization(zmod(n), 1, [[m]])
            else:
                n = rng.choice([2, 3, 4, 5])
                k = rng.randint(2, 3)
                R = poly_quotient(zmod(n), [rng.randrange(n) for _ in range(k)])
        except InconsistentPresentation:
            continue
        if R.size <= max_size:
            return R


def random_extension(rng: random.Random, max_size: int = 512) -> AlgebraExtension:
    """``B`` random, ``A`` the subring generated by 1 and up to two random elements."""
    B = random_ring(rng, max_size)
    E = B.elements()
    gens = [rng.choice(E) for _ in range(rng.randint(0, 2))]
    A = generated_subring(B, gens)
    return AlgebraExtension(B, A, name=f"<{', '.join(map(str, gens))}> ⊆ {B!r}")


def random_corpus(seed: int, count: int, max_size: int = 512, cap: int = 600) -> list:
    """``count`` random extensions whose submodule lattice has at most ``cap`` members.

    Draws exceeding the cap are discarded and redrawn from the same stream, so
    the corpus depends only on the seed.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        ext = random_extension(rng, max_size)
        try:
            ext.all_submodules(cap=cap)
        except SizeBoundExceeded:
            continue
        out.append(ext)
    return out


def random_idealization_pair(rng: random.Random, max_size: int = 512) -> AlgebraExtension:
    """``A = R' + M <= B = R + M`` with ``R`` reduced and ``R'`` a random subring."""
    while True:
        R = random_reduced_ring(rng, 32)
        gens = rng.randint(1, 2)
        n = R.exponent
        divisors = [d for d in range(2, n + 1) if n % d == 0]
        rels = []
        for g in range(gens):
            row = [0] * gens
            row[g] = rng.choice(divisors + [0])
            rels.append(row)
        try:
            B = make_idealization(R, gens, rels)
        except InconsistentPresentation:
            continue
        if B.size > max_size or B.rank == R.rank:
            continue
        sub = generated_subring(R, [rng.choice(R.elements()) for _ in range(rng.randint(0, 1))])
        k = R.rank
        rows = [list(r) + [0] * (B.rank - k) for r in sub]
        rows += [list(B.basis_vector(i)) for i in range(k, B.rank)]
        return AlgebraExtension(B, rows, name=f"R'+M ⊆ {B!r}")


def retraction_extension(B: StructAlgebra) -> AlgebraExtension:
    """Base ring inside an idealization, truncated polynomial ring or group ring, with its retraction."""
    return AlgebraExtension(B, base_embedding(B), retraction=base_retraction(B), name=repr(B))
