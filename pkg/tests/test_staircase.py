from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oag import oracle
from oag.core import SpecError, realized_spec
from oag.staircase import StairExpr, StaircaseSubgroup, index, parse_staircase

from conftest import elements, stair_exprs, staircases


@given(st.data())
def test_lattice_laws(G, data):
    H, K, L = (data.draw(staircases(G, finite=False)) for _ in range(3))
    assert H.sum(K) == K.sum(H) and H.intersect(K) == K.intersect(H)
    assert H.sum(K).sum(L) == H.sum(K.sum(L))
    assert H.intersect(K).intersect(L) == H.intersect(K.intersect(L))
    assert H.sum(H.intersect(K)) == H and H.intersect(H.sum(K)) == H
    assert H.intersect(K).issubset(H) and H.issubset(H.sum(K))


@given(st.data())
def test_membership_against_oracle(G, data):
    eh, ek = data.draw(stair_exprs(G)), data.draw(stair_exprs(G))
    H, K = StaircaseSubgroup.from_expr(G, eh), StaircaseSubgroup.from_expr(G, ek)
    g = data.draw(elements(G, 30))
    assert H.contains(g) == oracle.member(G, eh, g)
    assert H.intersect(K).contains(g) == (oracle.member(G, eh, g) and oracle.member(G, ek, g))
    assert H.sum(K).contains(g) == oracle.oracle_solve(G, [(G.zero(), eh), (g, ek)]).solvable


@given(st.data())
def test_index_matches_quotient_size(G, data):
    e = data.draw(stair_exprs(G))
    H = StaircaseSubgroup.from_expr(G, e)
    assert index(StaircaseSubgroup.whole(G), H) == oracle.quotient(G, e).size


@given(st.data())
def test_coset_representatives_are_a_transversal(G, data):
    H = data.draw(staircases(G))
    K = H.intersect(data.draw(staircases(G)))
    n = H.index_of(K)
    reps = list(H.coset_representatives(K))
    assert len(reps) == n.value
    assert all(H.contains(r) for r in reps)
    for i, a in enumerate(reps):
        for b in reps[i + 1:]:
            assert not K.contains(a - b)


@given(st.data())
def test_reduce_stays_in_coset(G, data):
    H = data.draw(staircases(G))
    g = data.draw(elements(G, 40))
    r = H.reduce(g)
    assert H.contains(g - r)
    assert H.reduce(r) == r


def test_spec_examples():
    G = realized_spec("Z", "Z")
    H = StaircaseSubgroup.from_expr(G, StairExpr(((1, 1),), 4))
    assert StaircaseSubgroup.whole(G).index_of(H) == 4
    assert oracle.quotient(G, H.to_expr()).size == 4
    assert StaircaseSubgroup.whole(G).index_of(StaircaseSubgroup.convex(G, 1)).is_finite is False
    two = StaircaseSubgroup.multiple(G, 2)
    three = StaircaseSubgroup.convex_plus(G, 1, 3)
    assert two.sum(three) == StaircaseSubgroup.whole(G)
    assert parse_staircase(G, "2G") == two
    assert str(two.intersect(three)) == "stair[2*D1, 6*G]"


def test_divisible_components_absorb_multiples():
    G = realized_spec("Q", "Z")
    six = StaircaseSubgroup.multiple(G, 6)
    assert six.contains(G.element([Fraction(1, 7), 0])) and not six.contains(G.element([0, 1]))
    assert StaircaseSubgroup.convex_plus(G, 1, 6) == StaircaseSubgroup.whole(G)
    assert StaircaseSubgroup.whole(G).index_of(StaircaseSubgroup.multiple(G, 6)) == 6


def test_mixing_specs_is_an_error():
    a = StaircaseSubgroup.multiple(realized_spec("Z"), 2)
    b = StaircaseSubgroup.multiple(realized_spec("Q"), 2)
    with pytest.raises(SpecError):
        a.sum(b)
