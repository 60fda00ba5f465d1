from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oag.core import SpecError, realized_spec
from oag.rewrite import evaluate
from oag.staircase import StairExpr
from oag.suites import random_body
from oag.syntax import (
    AnAtom,
    Cong,
    DAtom,
    EAtom,
    Exists,
    FnAtom,
    Forall,
    MAtom,
    ParseError,
    ScopeError,
    Term,
    free_vars,
    parse,
    parse_group_spec,
    parse_subgroup,
    parse_system,
    parse_term,
    print_formula,
    substitute,
)

from conftest import corpus, elements


@given(st.data(), st.randoms(use_true_random=False))
def test_print_parse_round_trip(G, data, rng):
    vars_ = ["x", "y", "z"] if G.k == 1 else ["x", "y"]
    f = random_body(G, rng, vars_, rng.randint(1, 4))
    text = print_formula(f)
    g = parse(text)
    assert print_formula(g) == text
    env = {v: data.draw(elements(G, 5)) for v in vars_}
    assert evaluate(f, G, env) == evaluate(g, G, env)


def test_quantifiers_and_precedence():
    f = parse("exists x. y < x and not x == 0 mod 2G or x = z")
    assert isinstance(f, Exists)
    assert free_vars(f) == {"y", "z"}
    assert isinstance(parse("forall x. x <= x"), Forall)
    assert print_formula(parse("not (x < y or y < x)")) == "not (x < y or y < x)"


def test_derived_atoms():
    assert parse("A[2](x) = D1") == AnAtom(2, Term.var("x"), 1)
    assert parse("F[3](x - y) = D0") == FnAtom(3, Term.var("x") - Term.var("y"), 0)
    assert parse("M[1](x)") == MAtom(1, Term.var("x"))
    assert parse("E[4,1](x)") == EAtom(4, 1, Term.var("x"))
    assert parse("D[2,3,1](x)") == DAtom(2, 3, 1, Term.var("x"))
    for text in ["A[2](x) = D1", "E[4,1](x)", "D[2,3,1](x)"]:
        assert print_formula(parse(text)) == text
    with pytest.raises(ParseError):
        parse("E[4](x)")


def test_subgroups():
    assert parse_subgroup("2G") == StairExpr((), 2)
    assert parse_subgroup("D1 + 3G") == StairExpr(((1, 1),), 3)
    assert parse_subgroup("stair[2*D1, 6*G]") == StairExpr(((1, 2),), 6)
    assert parse_subgroup("D2") == StairExpr(((2, 1),), 0)
    assert isinstance(parse("x == (1,0) mod D1 + 3G"), Cong)


def test_terms():
    G = realized_spec("Q", "Z")
    t = parse_term("2*x - (1/2,1) + one@2")
    assert t.coeff("x") == 2
    assert t.drop("x").value(G) == G.element([Fraction(-1, 2), 0])
    with pytest.raises(SpecError):
        parse_term("one@1").value(G)
    assert substitute(parse("x < y"), "y", parse_term("x + one@1")) == parse("x < x + one@1")


def test_errors_carry_offsets():
    with pytest.raises(ParseError) as e:
        parse("x < ")
    assert e.value.pos == 4
    with pytest.raises(ParseError):
        parse("x == 1 mod 3")
    with pytest.raises(ScopeError):
        parse("exists x. exists x. x < x")


def test_bare_constants_need_one_component():
    G = realized_spec("Z", "Z")
    with pytest.raises(SpecError):
        parse_term("x + 3").value(G, {"x": G.zero()})
    assert parse_term("x + 3").value(realized_spec("Z"), {"x": realized_spec("Z").zero()}) == realized_spec("Z").element([3])


def test_group_spec_files_round_trip():
    for name, G in corpus().items():
        assert parse_group_spec(str(G)) == G, name


def test_group_spec_errors():
    with pytest.raises(SpecError):
        parse_group_spec("component a: dims{2:0} default 1 realize Z")
    with pytest.raises(SpecError):
        parse_group_spec("component a: dims{4:1} default 1")
    with pytest.raises(SpecError):
        parse_group_spec("component a: dims{2:1}")
    with pytest.raises(SpecError):
        parse_group_spec("omega_tower: component t: realize Z\ncomponent a: realize Z")


def test_system_files():
    G = realized_spec("Z", "Z")
    sys = parse_system(G, "x == (1,0) mod 2G\n# comment\nx == (0,1) mod D1 + 3G\n")
    assert len(sys.constraints) == 2
    with pytest.raises(SpecError):
        parse_system(G, "x < (1,0)")
    with pytest.raises(SpecError):
        parse_system(G, "2*x == (1,0) mod 2G")
