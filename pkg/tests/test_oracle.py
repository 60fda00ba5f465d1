from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oag import oracle
from oag.core import realized_spec
from oag.rewrite import evaluate
from oag.staircase import StairExpr
from oag.suites import random_body
from oag.syntax import Exists, parse

from conftest import elements, stair_exprs


def test_quotient_examples():
    G = realized_spec("Z", "Z")
    assert oracle.quotient(G, StairExpr(((1, 1),), 4)).size == 4
    assert oracle.quotient(G, StairExpr((), 1)).size == 1
    with pytest.raises(oracle.OracleRefusal):
        oracle.quotient(G, StairExpr(((1, 1),), 0))


@given(st.data())
def test_projection_is_a_homomorphism(G, data):
    q = oracle.quotient(G, data.draw(stair_exprs(G)))
    a, b = data.draw(elements(G)), data.draw(elements(G))
    assert q.project(a + b) == q.add(q.project(a), q.project(b))


def test_enumerate_sat_counts():
    G = realized_spec("Z")
    box = oracle.Box(((-4, 5, 1),))
    assert len(oracle.enumerate_sat(parse("x = x"), G, box, ["x"])) == 10
    assert len(oracle.enumerate_sat(parse("x == 0 mod 2G"), G, box)) == 5
    assert oracle.enumerate_sat(parse("x == 0 mod 2G and x == 1 mod 2G"), G, box) == []


def test_solve_examples():
    G = realized_spec("Z", "Z")
    sol = oracle.oracle_solve(G, [(G.element([1, 0]), StairExpr((), 2)), (G.element([0, 1]), StairExpr(((1, 1),), 3))])
    assert sol.solvable and sol.mask.sum() == 1
    assert sol.mask[sol.quotient.elements().tolist().index(list(sol.quotient.project(G.element([3, 0]))))]
    clash = oracle.oracle_solve(G, [(G.element([1, 0]), StairExpr((), 2)), (G.zero(), StairExpr((), 2))])
    assert not clash.solvable


def test_refuses_large_boxes(monkeypatch):
    G = realized_spec("Z", "Z")
    monkeypatch.setenv("OAG_MAX_ENUM", "100")
    with pytest.raises(oracle.OracleRefusal):
        oracle.Box.default(G, 50).elements()


@given(st.randoms(use_true_random=False))
def test_vector_evaluator_matches_scalar_evaluator(G, rng):
    f = random_body(G, rng, ["x", "y"], rng.randint(1, 4))
    env = oracle.env_for(G, f, oracle.Box.default(G, 2), ["x", "y"])
    vec = oracle.eval_vec(f, G, env)
    for idx in rng.sample(range(env.size), min(40, env.size)):
        point = {v: env.element(v, idx) for v in ("x", "y")}
        assert bool(vec[idx]) == evaluate(f, G, point)


@pytest.mark.parametrize("kinds", [("Z",), ("Q",), ("Z", "Z"), ("Z", "Q")])
def test_exists_decision_matches_wide_search(kinds):
    # a witness found by direct search over a much wider box must be seen by the exact decision
    G = realized_spec(*kinds)
    rng = random.Random(7)
    small = oracle.Box.default(G, 3)
    wide = oracle.Box.default(G, 30 if G.k == 2 else 300, 4 if G.k == 2 else 8)
    xs = wide.elements()
    found = 0
    for _ in range(15):
        body = random_body(G, rng, ["x", "y"], 3)
        f = Exists("x", body)
        env = oracle.env_for(G, f, small, ["y"])
        got = oracle.decide_exists(f, G, env)
        for idx in range(0, env.size, 5):
            y = env.element("y", idx)
            if max(abs(c) for c in y.coords) > 2:
                continue
            if any(evaluate(body, G, {"x": x, "y": y}) for x in xs):
                found += 1
                assert got[idx], (f, y)
    assert found > 0
