"""``classext`` command line.

Exit codes: 0 when every check passes, 1 on a property violation or a
non-invertible input ideal, 2 on malformed input or unsupported requests.
Reports are canonical JSON (sorted keys, integers as decimal strings).
"""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click

from . import suites
from .classgrp import (
    Report,
    avoidance_exhaustive,
    canonical,
    check_retraction_vanishing,
    class_group_extension,
    class_group_quad,
    dumps,
    is_principal,
    principalize_semilocal,
    reduction_map,
    try_invertible,
    verify_pic_sequence,
    verify_tensor_square,
    verify_tower,
    verify_units_sequence,
)
from .errors import ClassExtError, UnsupportedExtension
from .extensions import AlgebraExtension, QuadExtension, TowerExtension
from .quadforms import BQF, form_to_ideal, principal_generator
from .rings import (
    QuadElt,
    QuadOrder,
    RingMap,
    StructAlgebra,
    base_embedding,
    base_retraction,
    finite_algebra,
    galois_field,
    group_ring,
    make_idealization,
    make_quad_order,
    product_ring,
    trunc_poly,
    zmod,
)

SELECTORS = ("pic-seq", "tower", "reduction", "retraction", "semilocal", "avoidance",
             "units-seq", "tensor-square")


class InputError(ValueError):
    """Malformed descriptor or document."""


# ---------------------------------------------------------------------------
# descriptors


def _int(x) -> int:
    if isinstance(x, bool):
        raise InputError(f"expected an integer, got {x!r}")
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        try:
            return int(x.strip())
        except ValueError:
            pass
    raise InputError(f"expected an integer, got {x!r}")


def _ints(xs) -> list:
    if not isinstance(xs, list):
        raise InputError(f"expected a list, got {xs!r}")
    return [_int(x) for x in xs]


def _nested(xs, depth: int):
    if depth == 0:
        return _int(xs)
    if not isinstance(xs, list):
        raise InputError(f"expected a list, got {xs!r}")
    return [_nested(x, depth - 1) for x in xs]


def load_document(arg: str):
    """A JSON document from inline text or a file path."""
    text = arg if arg.lstrip().startswith(("{", "[")) else Path(arg).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc


def parse_ring(doc):
    """A ring descriptor as a :class:`QuadOrder`, ``("field", d)`` or a :class:`StructAlgebra`."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InputError("ring descriptor needs a 'kind'")
    kind = doc["kind"]
    if kind == "quad_order":
        return make_quad_order(_int(doc["D"]))
    if kind == "quad_field":
        if "D" in doc:
            return ("field", make_quad_order(_int(doc["D"])).d)
        return ("field", _int(doc["d"]))
    if kind == "zmod":
        return zmod(_int(doc["n"]))
    if kind in ("finite", "struct"):
        one = _ints(doc["one"])
        mul = _nested(doc["mul"], 3)
        orders = _ints(doc["orders"]) if "orders" in doc else None
        if kind == "struct":
            return StructAlgebra(tuple(orders), mul, tuple(one))
        if "rank" in doc and _int(doc["rank"]) != len(one):
            raise InputError("rank does not match the unity vector")
        return finite_algebra(_int(doc["n"]), mul, one, orders)
    if kind == "idealization":
        base = as_algebra(parse_ring(doc["base"]))
        module = doc.get("module", {})
        gens = _int(module.get("gens", 1))
        rels = _nested(module.get("rels", []), 2)
        return make_idealization(base, gens, rels)
    if kind == "trunc_poly":
        return trunc_poly(as_algebra(parse_ring(doc["base"])), _int(doc["k"]))
    if kind == "group_ring":
        return group_ring(as_algebra(parse_ring(doc["base"])), _int(doc["order"]))
    if kind == "product":
        factors = [as_algebra(parse_ring(f)) for f in doc["factors"]]
        if not factors:
            raise InputError("product needs at least one factor")
        out = factors[0]
        for f in factors[1:]:
            out = product_ring(out, f)
        return out
    if kind == "galois":
        return galois_field(_int(doc["p"]), _ints(doc["modulus"]))
    raise InputError(f"unknown ring kind {kind!r}")


def as_algebra(R) -> StructAlgebra:
    if isinstance(R, QuadOrder):
        return R.algebra()
    if isinstance(R, StructAlgebra):
        return R
    raise InputError("a field cannot be used as a structure-constant ring")


def _quad(doc):
    return isinstance(doc, dict) and doc.get("kind") in ("quad_order", "quad_field")


def parse_extension(doc):
    """Extension descriptor: ``{"A": ..., "B": ...}``, a tower, or a quadratic pair."""
    if not isinstance(doc, dict):
        raise InputError("extension descriptor must be an object")
    if doc.get("kind") == "tower" or "C" in doc:
        A, B = parse_ring(doc["A"]), parse_ring(doc["B"])
        C = parse_ring(doc["C"]) if doc.get("C") is not None else None
        if not isinstance(A, QuadOrder) or not isinstance(B, QuadOrder):
            raise InputError("towers are built from quadratic orders")
        if isinstance(C, tuple):
            C = None
        return TowerExtension(A, B, C)
    if "B" not in doc:
        raise InputError("extension descriptor needs 'B'")
    if _quad(doc.get("A")):
        A = parse_ring(doc["A"])
        if not isinstance(A, QuadOrder):
            raise InputError("A must be a quadratic order")
        B = parse_ring(doc["B"])
        return QuadExtension(A, None if isinstance(B, tuple) else B)
    B = as_algebra(parse_ring(doc["B"]))
    a_desc = doc.get("A", "base")
    retraction = None
    if a_desc == "base":
        A = base_embedding(B)
    elif a_desc == "prime":
        A = [list(B.one)]
    elif a_desc == "whole":
        A = None
    else:
        A = _nested(a_desc, 2)
    r = doc.get("retraction")
    if r == "base" or r is True:
        retraction = base_retraction(B)
    elif isinstance(r, list):
        retraction = RingMap(B, B, tuple(tuple(row) for row in _nested(r, 2)))
    elif r is not None:
        raise InputError("retraction must be 'base' or a list of basis images")
    return AlgebraExtension(B, A, retraction=retraction)


def parse_ideal(doc):
    """Ideal document: ``{"ext": ..., "gens": [...]}``, ``{"ext", "form"}`` or a serialized submodule."""
    if not isinstance(doc, dict) or "ext" not in doc:
        raise InputError("ideal document needs 'ext'")
    ext = parse_extension(doc["ext"])
    if isinstance(ext, TowerExtension):
        raise InputError("an ideal lives in a single extension, not a tower")
    if "hnf" in doc or "rows" in doc:
        if isinstance(ext, QuadExtension) and "hnf" in doc:
            return ext.submodule_from_json({"den": doc.get("den", "1"), "hnf": doc["hnf"]})
        if isinstance(ext, AlgebraExtension) and "rows" in doc:
            return ext.submodule_from_json(doc)
        raise InputError("serialized submodule does not match the extension")
    if "form" in doc:
        if not isinstance(ext, QuadExtension):
            raise InputError("forms describe ideals of quadratic orders")
        a, b, c = _ints(doc["form"])
        return form_to_ideal(BQF(a, b, c), ext)
    gens = doc.get("gens")
    if not isinstance(gens, list) or not gens:
        raise InputError("ideal document needs a non-empty 'gens' list")
    if isinstance(ext, QuadExtension):
        elts = []
        for g in gens:
            g = _ints(g) if isinstance(g, list) else [_int(g)]
            if not 1 <= len(g) <= 3:
                raise InputError("quadratic elements are [u, v, w] meaning (u + v sqrt(d)) / w")
            elts.append(QuadElt(ext.A.d, *g))
        return ext.submodule(elts)
    return ext.submodule([_ints(g) for g in gens])


# ---------------------------------------------------------------------------
# output


def report_doc(rep: Report, verbosity: int) -> dict:
    """Verdict only at level 0, plus witnesses at 1, plus the instance at 2."""
    full = rep.to_json()
    doc = {"theorem": full["theorem"], "status": full["status"]}
    if verbosity >= 1:
        doc["witnesses"] = full["witnesses"]
    elif rep.status != "pass":
        doc["witnesses"] = [w for w in full["witnesses"] if w.get("violation")]
    if verbosity >= 2:
        doc["instance"] = full["instance"]
    return doc


def _emit(ctx, doc) -> None:
    text = dumps(doc)
    out = ctx.obj.get("output")
    if out:
        Path(out).write_text(text + "\n")
    click.echo(text)


def guarded(fn):
    """Map library and input errors to exit code 2; accept ``-v``/``--output`` after the subcommand."""

    @click.option("-v", "--verbosity", "sub_verbosity", type=click.IntRange(0, 2), default=None,
                  help="Overrides the group-level verbosity.")
    @click.option("--output", "sub_output", type=click.Path(dir_okay=False), default=None,
                  help="Overrides the group-level output file.")
    @functools.wraps(fn)
    def wrapper(*args, sub_verbosity=None, sub_output=None, **kwargs):
        ctx = click.get_current_context()
        if sub_verbosity is not None:
            ctx.obj["verbosity"] = sub_verbosity
        if sub_output is not None:
            ctx.obj["output"] = sub_output
        try:
            return fn(*args, **kwargs)
        except (ClassExtError, InputError, KeyError, OSError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
            click.echo(dumps({"error": type(exc).__name__, "message": str(msg)}), err=True)
            sys.exit(2)

    return wrapper


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.option("--seed", type=int, default=suites.DEFAULT_SEED, show_default=True,
              help="Seed for randomized instance batteries.")
@click.option("-v", "--verbosity", type=click.IntRange(0, 2), default=1, show_default=True,
              help="0 verdicts, 1 witnesses, 2 full certificates.")
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Also write the report to this file.")
@click.option("--max-enum", type=click.IntRange(min=1), default=None,
              help="Enumeration bound (overrides CLASSEXT_MAX_ENUM).")
@click.pass_context
def main(ctx, seed, verbosity, output, max_enum):
    """Invertible ideals and class groups of ring extensions."""
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, verbosity=verbosity, output=output)
    if max_enum is not None:
        os.environ["CLASSEXT_MAX_ENUM"] = str(max_enum)


@main.command()
@click.option("-D", "disc", type=int, default=None, help="Discriminant of an imaginary quadratic order.")
@click.option("--ext", "ext_doc", default=None, help="Extension or tower document (path or inline JSON).")
@click.option("--leg", type=click.Choice(["AB", "AC", "BC"]), default=None, help="Leg of a tower.")
@click.pass_context
@guarded
def classgroup(ctx, disc, ext_doc, leg):
    """Class group of a quadratic order or of an extension."""
    if (disc is None) == (ext_doc is None):
        raise InputError("give exactly one of -D and --ext")
    if disc is not None:
        g = class_group_quad(disc)
    else:
        ext = parse_extension(load_document(ext_doc))
        if isinstance(ext, TowerExtension):
            if leg is None:
                raise InputError("a tower needs --leg")
            ext = getattr(ext, leg)
        elif leg is not None:
            raise InputError("--leg applies to towers only")
        g = class_group_extension(ext)
    v = ctx.obj["verbosity"]
    doc = {"order": g.order, "factors": list(g.factors)}
    if v >= 1:
        doc["classes"] = [c.to_json() for c in g.classes]
    if v >= 2:
        doc["generators"] = [c.to_json() for c in g.generators]
        if g.members:
            doc["invertible_count"] = len(g.members)
    _emit(ctx, doc)


def _file_extension(file):
    return parse_extension(load_document(file)) if file else None


def _semilocal_file(doc) -> Report:
    """Principalize one ideal or every invertible ideal of one extension."""
    if "ext" in doc:
        ideals = [parse_ideal(doc)]
        ext = ideals[0].ext
    else:
        ext = parse_extension(doc)
        if not isinstance(ext, AlgebraExtension) or not ext.is_finite:
            raise UnsupportedExtension("semi-local checks need a finite extension")
        ideals = [L for L in ext.all_submodules() if not L.is_zero()]
    rep = Report("semilocal", ext.to_json())
    for L in ideals:
        inv = try_invertible(L)
        if inv is None:
            continue
        try:
            out = principalize_semilocal(inv)
            rep.add(L=L, g=out["g"])
        except AssertionError as exc:
            rep.fail(reason=str(exc), L=L)
    return rep


@main.command()
@click.argument("selector", type=click.Choice(SELECTORS))
@click.option("--file", "file", default=None, help="Instance document (path or inline JSON).")
@click.option("--A", "disc_a", type=int, default=None, help="Discriminant of A.")
@click.option("--B", "disc_b", type=int, default=None, help="Discriminant of B (omit for the field).")
@click.option("--exhaustive", is_flag=True, help="Run the full seeded corpus.")
@click.option("--max-size", type=click.IntRange(min=1), default=None, help="Ambient size bound.")
@click.option("--count", type=click.IntRange(min=1), default=None, help="Number of random instances.")
@click.option("--bound", type=click.IntRange(min=3), default=None, help="Bound on |D| for sweeps.")
@click.pass_context
@guarded
def verify(ctx, selector, file, disc_a, disc_b, exhaustive, max_size, count, bound):
    """Run a verifier on one instance or on a seeded battery."""
    seed = ctx.obj["seed"]
    ext = _file_extension(file) if selector != "semilocal" else None
    if isinstance(ext, AlgebraExtension) and max_size and ext.B.is_finite and ext.B.size > max_size:
        raise InputError("ambient ring exceeds --max-size")
    if selector == "pic-seq":
        if disc_a is not None:
            rep = verify_pic_sequence(disc_a, disc_b)
        elif isinstance(ext, QuadExtension):
            rep = verify_pic_sequence(ext.A, ext.B)
        elif ext is not None:
            raise InputError("pic-seq needs a quadratic extension")
        else:
            rep = suites.pic_sequence_suite(bound or 500)
    elif selector == "tower":
        if isinstance(ext, TowerExtension):
            rep = verify_tower(ext)
        elif ext is not None:
            raise InputError("tower needs a tower document")
        else:
            rep = suites.tower_suite(disc_a if disc_a is not None else -36,
                                     disc_b if disc_b is not None else -4)
    elif selector == "reduction":
        rep = reduction_map(ext) if ext is not None else suites.reduction_suite(seed, count or 20)
    elif selector == "retraction":
        if ext is not None:
            if not isinstance(ext, AlgebraExtension) or not ext.is_finite:
                raise UnsupportedExtension("file mode needs a finite extension with a retraction")
            rep = check_retraction_vanishing(ext, ext.all_submodules())
        else:
            rep = suites.retraction_suite()
    elif selector == "semilocal":
        if file:
            rep = _semilocal_file(load_document(file))
        else:
            rep = suites.semilocal_suite(seed, count or 100, max_size or 512)
    elif selector == "avoidance":
        if ext is not None:
            rep = avoidance_exhaustive(ext, brute_force_limit=24 if exhaustive else 0)
        elif exhaustive:
            rep = suites.avoidance_suite(seed, count or 40, max_size or 256)
        else:
            rep = suites.avoidance_suite(seed, count or 8, max_size or 64, brute_force_limit=0)
    elif selector == "units-seq":
        rep = verify_units_sequence(ext) if ext is not None else suites.units_suite(seed, count or 20)
    else:
        rep = verify_tensor_square(ext) if ext is not None else suites.tensor_suite(seed, count or 10)
    _emit(ctx, report_doc(rep, ctx.obj["verbosity"]))
    sys.exit(0 if rep.passed else 1)


@main.command()
@click.argument("document")
@click.pass_context
@guarded
def principalize(ctx, document):
    """Unit generator of an invertible ideal, or a proof that none exists."""
    L = parse_ideal(load_document(document))
    ext = L.ext
    inv = None if L.is_zero() else try_invertible(L)
    if inv is None:
        _emit(ctx, {"invertible": False, "L": L})
        sys.exit(1)
    v = ctx.obj["verbosity"]
    if isinstance(ext, QuadExtension) and ext.B is None:
        form, gen = principal_generator(inv.L)
        doc = {"invertible": True, "principal": gen is not None, "reduced_form": form}
        if gen is not None:
            doc["generator"] = gen
            doc["verdict"] = f"principal: generator {gen}"
        else:
            doc["verdict"] = f"non-principal: reduced form {form}"
    elif isinstance(ext, AlgebraExtension) and ext.is_finite:
        out = principalize_semilocal(inv)
        doc = {"invertible": True, "principal": True, "generator": out["g"], "y": out["y"],
               "verdict": "principal"}
        if v >= 2:
            doc["certificate"] = {"x": out["x"], "ys": out["ys"], "a": out["a"]}
    else:
        g = is_principal(inv)
        doc = {"invertible": True, "principal": g is not None,
               "verdict": "principal" if g is not None else "non-principal"}
        if g is not None:
            doc["generator"] = g
    if v >= 2:
        doc["L"] = inv.L
        doc["inverse"] = inv.inverse
    _emit(ctx, canonical(doc))


OUT_OF_SCOPE = [
    ("torsor direct limit", "iterated limit of torsor algebras over all invertible ideals",
     "infinite direct limit; only the one-step algebra A(L) is built"),
    ("infinite idealization", "idealization by a direct sum over all maximal ideals",
     "needs an infinite direct sum of residue fields; only finite idealizations are built"),
    ("scalar-change sensitivity of Pic", "kernel of Pic under a change of scalars",
     "needs an infinite direct sum over maximal ideals; only finite ingredients are built"),
    ("circle ring", "R[x,y]/(x^2+y^2-1) with Pic of order 2",
     "requires real algebraic geometry"),
    ("real quadratic orders", "D > 0",
     "infinite unit groups need continued-fraction machinery"),
]


def paper_example_reports(seed: int) -> list:
    """``(theorem, instance, report)`` triples for every in-scope instance, in a fixed order."""
    return [
        ("class numbers", "h(D) for D in -4,-20,-23,-36,-47,-163", suites.class_number_suite()),
        ("Pic sequence", "conductor extensions, |D| <= 100", suites.pic_sequence_suite(100)),
        ("Pic sequence", "O_-36 in Z[i]", verify_pic_sequence(-36, -4)),
        ("tower sequence", "Z+3Z[i] in Z[i] in Q(i)", suites.tower_suite()),
        ("semi-local principality", f"100 random finite extensions, seed {seed}",
         suites.semilocal_suite(seed, 100)),
        ("units sequence", f"F2 in F4, diagonal, 20 random, seed {seed}", suites.units_suite(seed, 20)),
        ("avoidance", f"exhaustive, size <= 256, seed {seed}", suites.avoidance_suite(seed, 20, 256)),
        ("torsor algebra", "reduced-form ideals, |D| <= 100, N = 3", suites.torsor_suite(100)),
        ("reduction", f"O_-36+M in Z[i]+M and 20 idealizations, seed {seed}",
         suites.reduction_suite(seed, 20)),
        ("retraction vanishing", "idealizations, A[x]/(x^k), A[Z/m], tensor squares",
         suites.retraction_suite()),
        ("tensor square", f"F2 in F4, diagonal, 10 random, seed {seed}", suites.tensor_suite(seed, 10)),
        ("self extension", "C(R,R) = 0", suites.self_extension_smoke()),
    ]


@main.command("paper-examples")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report instead of a table.")
@click.pass_context
@guarded
def paper_examples(ctx, as_json):
    """Run every in-scope instance and list the out-of-scope ones."""
    rows = paper_example_reports(ctx.obj["seed"])
    v = ctx.obj["verbosity"]
    results = [{"theorem": t, "instance": i, "status": r.status,
                **({"report": report_doc(r, v - 1)} if v >= 1 else {})} for t, i, r in rows]
    scope = [{"theorem": t, "instance": i, "status": "out of scope", "reason": why}
             for t, i, why in OUT_OF_SCOPE]
    ok = all(r.passed for _, _, r in rows)
    doc = {"seed": ctx.obj["seed"], "status": "pass" if ok else "fail", "results": results,
           "out_of_scope": scope}
    text = dumps(doc)
    if ctx.obj.get("output"):
        Path(ctx.obj["output"]).write_text(text + "\n")
    if as_json:
        click.echo(text)
    else:
        width = max(len(t) for t, _, _ in rows + OUT_OF_SCOPE)
        for t, i, r in rows:
            click.echo(f"{t:<{width}}  {r.status:<12}  {i}")
        for t, i, why in OUT_OF_SCOPE:
            click.echo(f"{t:<{width}}  {'out of scope':<12}  {i} ({why})")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
