from __future__ import annotations

import random

import pytest

from oag.core import realized_spec
from oag.rewrite import RewriteError, eval_atom, evaluate, expand_composite_modulus, expand_derived, only_base_atoms
from oag.staircase import StairExpr
from oag.syntax import Cong, Term, parse

from gen import DERIVED_KINDS, derived_atom, element

SPECS = [("Z",), ("Q",), ((2,),), ("Z", "Z"), ("Z", "Q"), ("Q", "Z"), ("Z", (3,), "Z"), ((2,), "Z", "Q")]


@pytest.mark.parametrize("kind", DERIVED_KINDS)
@pytest.mark.parametrize("kinds", SPECS, ids=lambda k: "x".join(map(str, k)))
def test_expansion_matches_semantics(kind, kinds):
    G = realized_spec(*kinds)
    rng = random.Random(hash((kind, kinds)) & 0xFFFF)
    for _ in range(8):
        a = derived_atom(G, rng, kind)
        f = expand_derived(a, G)
        assert only_base_atoms(f)
        for _ in range(15):
            env = {"x": element(G, rng)}
            assert evaluate(f, G, env) == eval_atom(a, G, env), (a, env)


def test_composite_modulus_split():
    rng = random.Random(3)
    for kinds in [("Z",), ("Z", "Z"), ("Z", "Q", "Z")]:
        G = realized_spec(*kinds)
        for n in (6, 12, 36, 30):
            expr = StairExpr(((1, 2),), n) if G.k > 1 else StairExpr((), n)
            f = Cong(Term.var("x"), expr)
            g = expand_composite_modulus(f, G)
            for _ in range(30):
                env = {"x": element(G, rng, 40)}
                assert evaluate(f, G, env) == evaluate(g, G, env)


def test_examples():
    G = realized_spec("Z", "Q")
    x = G.element([0, 3])
    assert eval_atom(parse("M[3](x)"), G, {"x": x}) is False  # leads at a dense coordinate
    Z = realized_spec("Z")
    assert eval_atom(parse("M[3](x)"), Z, {"x": Z.element([3])})
    assert eval_atom(parse("A[2](x) = D1"), Z, {"x": Z.element([5])})
    assert eval_atom(parse("F[2](x) = D1"), Z, {"x": Z.element([5])})
    assert eval_atom(parse("D[2,2,1](x)"), Z, {"x": Z.element([4])})


@pytest.mark.parametrize("text", ["A[1](x) = D1", "M[0](x)", "E[3,3](x)", "D[4,2,1](x)", "D[2,2,2](x)"])
def test_bad_indices(text):
    Z = realized_spec("Z")
    with pytest.raises(RewriteError):
        eval_atom(parse(text), Z, {"x": Z.element([1])})
