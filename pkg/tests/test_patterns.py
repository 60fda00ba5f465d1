from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oag import patterns as pt
from oag.core import realized_spec
from oag.patterns import (
    Pattern,
    PatternError,
    Row,
    adversarial_wict,
    check,
    construct_dp_witness,
    construct_inp_from_chain,
    format_pattern,
    instances_directed,
    parse_pattern,
    rows_tight,
    satisfiable,
    transform,
    verify_claim1,
    verify_claims,
)
from oag.qe import eliminate_exists
from oag.staircase import StairExpr, StaircaseSubgroup
from oag.suites import oracle_check, patterns_suite
from oag.syntax import Cong, Exists, Not, Order, Term, TrueF, conj, parse

from conftest import corpus, elements

ZZ = realized_spec("Z", "Z")


def els(G, *cs):
    return [(G.element(c),) for c in cs]


def chain(G):
    return [StaircaseSubgroup.multiple(G, 2), StaircaseSubgroup.convex_plus(G, 1, 3)]


def test_inp_example_from_chain():
    p = construct_inp_from_chain(ZZ, chain(ZZ), 3)
    assert [c[0] for c in p.rows[0].columns] == [ZZ.element(c) for c in [(0, 0), (1, 0), (0, 1)]]
    assert [c[0] for c in p.rows[1].columns] == [ZZ.element(c) for c in [(0, 0), (1, 0), (2, 0)]]
    rep = check(p, ZZ)
    assert rep.valid and rep.paths == 9
    assert oracle_check(p, ZZ)


@pytest.mark.parametrize("kinds", [("Z", "Z"), ("Z", "Q", "Z")])
@pytest.mark.parametrize("depth", [2, 3])
@pytest.mark.parametrize("M", [3, 4])
def test_chain_construction(kinds, depth, M):
    G = realized_spec(*kinds)
    hs = [StaircaseSubgroup.multiple(G, 2), StaircaseSubgroup.convex_plus(G, 1, 5), StaircaseSubgroup.multiple(G, 7)][:depth]
    p = construct_inp_from_chain(G, hs, M)
    rep = check(p, G)
    assert rep.valid and rep.paths == M ** depth
    assert rows_tight(p, G)


def test_repeated_coset_breaks_inconsistency():
    p = construct_inp_from_chain(ZZ, chain(ZZ), 3)
    p.rows[1].columns = els(ZZ, (0, 0), (3, 0), (6, 0))
    rep = check(p, ZZ)
    assert not rep.valid and any("jointly satisfiable" in f for f in rep.failures)


def test_increasing_thresholds():
    Z = realized_spec("Z")
    cols = els(Z, (0,), (3,), (6,), (9,))
    row = Row(Order(Term.var("a") - Term.var("x"), "<"), ("a",), cols)  # x > a
    # the last column leaves no room for the negated later instances under ict, so only wict holds
    assert not check(Pattern("ict", [row]), Z).valid
    assert check(Pattern("wict", [row]), Z).valid


def test_constructor_errors(monkeypatch):
    with pytest.raises(PatternError, match="infinity"):
        construct_inp_from_chain(ZZ, [StaircaseSubgroup.multiple(ZZ, 2)], 5)
    monkeypatch.setattr(pt, "verify_distributivity", lambda hs: False)
    with pytest.raises(PatternError, match="distributivity"):
        construct_inp_from_chain(ZZ, chain(ZZ), 3)


@pytest.mark.parametrize("kinds", [("Z", "Z"), ("Z", "Q", "Z")])
@pytest.mark.parametrize("depth", [2, 3])
@pytest.mark.parametrize("M", [3, 4])
def test_dp_witness(kinds, depth, M):
    G = realized_spec(*kinds)
    p = construct_dp_witness(G, depth, M)
    assert p.depth == depth and p.columns == M
    rep = check(p, G)
    assert rep.valid and rep.paths == M ** depth
    assert rows_tight(p, G)
    assert check(Pattern("ict", p.rows), G).valid


def test_dp_witness_capacity_error():
    G = realized_spec("Z")
    with pytest.raises(PatternError, match="capacities"):
        construct_dp_witness(G, 40, 3)


def test_witness_spec_example_rows():
    p = construct_dp_witness(ZZ, 3, 3)
    assert [str(r.formula) for r in p.rows] == ["x == a mod 2G", "x == a mod D1+3G", "u < x and x < v"]
    assert p.rows[-1].params == ("u", "v")


def test_adversarial_candidates_rejected():
    for G in (realized_spec("Z"), ZZ):
        for p in adversarial_wict(G, 100, seed=5):
            assert instances_directed(G, p)
            assert not check(p, G).valid


def test_claims_on_corpus():
    rng = random.Random(0)
    for name, G in corpus().items():
        if G.k == 0:
            continue
        if G.omega_tower is not None:
            G = pt.tower_truncation(G, 3)
        if not G.computable:
            continue
        for n, ok, detail in verify_claim1(G, rng, 10):
            assert ok, (name, n, detail)
        chosen = pt.witness_jumps(G)
        for n, ok, detail in verify_claims(G, pt.jump_family(G, chosen), chosen):
            assert ok, (name, n, detail)


def test_transforms():
    Z = realized_spec("Z")
    special = Pattern("special", [Row(parse("x == a mod 8G"), ("a",), els(Z, *[(j,) for j in range(8)]))])
    res = transform(special, "special_to_ict", Z)
    assert res.status == "OK" and res.pattern.kind == "ict" and res.pattern.columns == 4
    small = Pattern("special", [Row(parse("x == a mod 2G"), ("a",), els(Z, *[(j,) for j in range(8)]))])
    assert transform(small, "special_to_ict", Z).status == "EXPECTED_LIMITATION"
    w = Pattern("wict", [Row(parse("x == a mod 2G or x == a mod 3G"), ("a",), els(Z, (7,), (6,), (2,)))])
    res = transform(w, "split_disjunction", Z)
    assert res.status == "OK" and str(res.pattern.rows[0].formula) == "x == a mod 3G"
    ict = Pattern("ict", [Row(parse("x == a mod 2G and a <= x"), ("a",), els(Z, (0,), (1,)))])
    with pytest.raises(PatternError, match="wict"):
        transform(ict, "split_conjunction", Z)
    with pytest.raises(PatternError):
        transform(w, "no_such_rule", Z)


def test_pattern_file_round_trip():
    p = construct_dp_witness(ZZ, 3, 3)
    q = parse_pattern(format_pattern(p))
    assert format_pattern(q) == format_pattern(p)
    assert check(q, ZZ).valid
    with pytest.raises(PatternError):
        parse_pattern("kind: nonsense\n")


def test_malformed_patterns():
    with pytest.raises(PatternError):
        Pattern("inp", [Row(parse("x == a mod 2G"), ("a",), els(ZZ, (0, 0))), Row(parse("x == a mod 2G"), ("a",), els(ZZ, (0, 0), (1, 0)))])
    with pytest.raises(PatternError):
        Pattern("inp", [Row(parse("x < b"), ("a",), els(ZZ, (0, 0)))])


def literal(G, rng_data):
    draw = rng_data.draw
    a = Term.element(draw(elements(G, 6)))
    if draw(st.booleans()):
        c = draw(st.sampled_from([1, -1, 2, 3, -2]))
        f = Order(Term.make({"x": c}) - a, draw(st.sampled_from(["<", "<=", "="])))
    else:
        n = draw(st.sampled_from([2, 3, 4, 6]))
        mod = StairExpr(((draw(st.integers(1, G.k)), 1),), n) if G.k > 1 and draw(st.booleans()) else StairExpr((), n)
        f = Cong(Term.make({"x": draw(st.sampled_from([1, -1, 2, 3, 4]))}) - a, mod)
    return Not(f) if draw(st.booleans()) else f


@given(st.data())
def test_fast_path_matches_elimination(G, data):
    f = conj([literal(G, data) for _ in range(data.draw(st.integers(1, 5)))])
    assert satisfiable(f, G) == isinstance(eliminate_exists(Exists("x", f), G), TrueF)


@given(st.data())
def test_clause_search_matches_elimination(G, data):
    clauses = []
    for _ in range(data.draw(st.integers(1, 3))):
        parts = [literal(G, data) for _ in range(data.draw(st.integers(1, 3)))]
        clauses.append(Not(conj(parts)) if data.draw(st.booleans()) else parts[0])
    f = conj(clauses)
    assert satisfiable(f, G) == isinstance(eliminate_exists(Exists("x", f), G), TrueF)


def test_random_patterns_against_oracle():
    for kinds in [("Z",), ("Z", "Z"), ("Z", "Q")]:
        res = patterns_suite(realized_spec(*kinds), cases=40, seed=9, pairs=40)
        assert res.passed, res.counterexamples
