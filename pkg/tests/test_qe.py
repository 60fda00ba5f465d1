from __future__ import annotations

import numpy as np
import pytest

from oag import oracle
from oag.core import realized_spec
from oag.qe import (
    BudgetExceeded,
    EliminationTrace,
    QEError,
    classify_atom,
    directed_family_partition,
    eliminate_all,
    eliminate_exists,
    language_ok,
)
from oag.suites import qe_suite
from oag.syntax import FalseF, TrueF, is_quantifier_free, parse


def agrees_with_oracle(f, G, params, radius=6):
    out = eliminate_exists(f, G)
    box = oracle.Box.default(G, radius)
    dens = [a * b for a, b in zip(oracle.formula_dens(G, f), oracle.formula_dens(G, out))]
    env = oracle.box_env(G, box, params, dens)
    return np.array_equal(oracle.decide_exists(f, G, env), oracle.eval_vec(out, G, env))


def test_cli_example():
    G = realized_spec("Z")
    f = parse("exists x. y < x and x < z and x == 0 mod 2G")
    out = eliminate_exists(f, G)
    assert is_quantifier_free(out) and language_ok(out)
    assert agrees_with_oracle(f, G, ["y", "z"], 20)


@pytest.mark.parametrize("kinds", [("Z",), ("Q",), ("Z", "Z"), ("Z", "Q"), ("Q", "Z"), ("Z", "Q", "Z")])
def test_qe_suite(kinds):
    res = qe_suite(realized_spec(*kinds), cases=25, seed=11)
    assert res.passed, res.counterexamples


@pytest.mark.parametrize("text", [
    "exists x. 3*x == y mod 4G and x < y",
    "exists x. not x == y mod D1 + 2G and y <= x and x <= y + one@2",
    "exists x. 2*x = y",
    "exists x. x < y and not (x == (0,0) mod 2G or x == (1,0) mod 3G)",
])
def test_hand_picked(text):
    G = realized_spec("Z", "Z")
    assert agrees_with_oracle(parse(text), G, ["y"])


def test_closed_sentences():
    Z, Q = realized_spec("Z"), realized_spec("Q")
    assert eliminate_all(parse("forall y. exists x. y < x"), Z) == TrueF()
    assert eliminate_all(parse("exists x. forall y. y <= x"), Z) == FalseF()
    assert eliminate_all(parse("forall y. exists x. 2*x = y"), Q) == TrueF()
    assert eliminate_all(parse("forall y. exists x. 2*x = y"), Z) == FalseF()
    assert eliminate_all(parse("exists y. exists x. y < x and x < y + one@1"), Z) == FalseF()
    assert eliminate_all(parse("exists y. exists x. y < x and x < y + one@1"), realized_spec("Z", "Z")) == TrueF()


def test_trace_replays():
    G = realized_spec("Z", "Q")
    trace = EliminationTrace()
    out = eliminate_all(parse("exists x. exists w. x < w and w < y and x == y mod 2G"), G, trace)
    assert trace.output == out and len(trace.steps) == 2
    assert trace.replay(G)
    text = "\n".join(trace.lines())
    assert text.startswith("input: ") and "step 2: eliminate x" in text


def test_errors():
    G = realized_spec("Z")
    with pytest.raises(QEError):
        eliminate_exists(parse("x < y"), G)
    with pytest.raises(QEError):
        eliminate_exists(parse("exists x. A[2](x) = D1"), G)
    many = " or ".join(f"(x == {i} mod 7G and x < y)" for i in range(7))
    big = parse(f"exists x. ({many}) and ({many}) and ({many})")
    with pytest.raises(BudgetExceeded):
        eliminate_exists(big, G, budget=50)


def test_atom_classes():
    G = realized_spec("Z", "Z")
    assert classify_atom(parse("x < y"), G).tag == "order_convex"
    assert classify_atom(parse("x == y mod 4G"), G).tag == "NA"
    assert classify_atom(parse("x == y mod D1"), G).tag == "order_convex"
    assert classify_atom(parse("x == y mod 2G"), realized_spec((3,), "Z")).tag == "NA"


def test_partition_into_families():
    G = realized_spec("Z", "Z")
    fams, na = directed_family_partition(parse("x < y or x == y mod 2G or x <= z + one@1"), G)
    assert [f.kind for f in fams] == ["order"]
    assert len(na) == 1
