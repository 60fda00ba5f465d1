from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oag import oracle
from oag.core import (
    EMPTY,
    INF,
    A_n_of,
    A_of,
    B_of,
    Cmp,
    ConvexSubgroup,
    ExtNat,
    F_n_of,
    GroupElement,
    SpecError,
    compare,
    factorization,
    parse_extnat,
    prime_factors,
    realized_spec,
    subgroup_leq,
    valuation,
)

from conftest import elements


def test_extnat_arithmetic():
    assert ExtNat(2) + 3 == 5
    assert ExtNat(2) + INF == INF
    assert INF * 0 == 0
    assert ExtNat(3) < INF and not INF < INF
    assert str(INF) == "inf"
    assert parse_extnat("inf") == INF and parse_extnat(" 4 ") == 4
    with pytest.raises(SpecError):
        parse_extnat("many")
    with pytest.raises(ValueError):
        ExtNat(-1)


@given(st.integers(1, 10**6))
def test_factorization_multiplies_back(n):
    assert math.prod(p ** e for p, e in factorization(n)) == n
    for p in prime_factors(n):
        assert all(p % q for q in range(2, int(p ** 0.5) + 1))
        assert n % p ** valuation(n, p) == 0 and n % p ** (valuation(n, p) + 1)


@given(st.data())
def test_group_laws(G, data):
    a, b, c = (data.draw(elements(G)) for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a - a).is_zero()
    assert 3 * a == a + a + a


@given(st.data())
def test_order_is_total_and_translation_invariant(G, data):
    a, b, c = (data.draw(elements(G)) for _ in range(3))
    ab = compare(a, b)
    assert compare(b, a) == Cmp(-ab.value)
    assert compare(a + c, b + c) == ab
    assert (ab == Cmp.EQ) == (a == b)
    assert compare(a, G.zero()).value == a.sign()


def test_lexicographic_order():
    G = realized_spec("Z", "Q")
    assert compare(G.element([0, 100]), G.element([1, -100])) == Cmp.LT
    assert G.element([0, Fraction(1, 3)]).sign() == 1


@given(st.data())
def test_A_B_bracket_element(G, data):
    g = data.draw(elements(G))
    if g.is_zero():
        assert A_of(G, g) is EMPTY and B_of(G, g) is EMPTY
        return
    a, b = A_of(G, g), B_of(G, g)
    assert G.in_convex(g, b) and not G.in_convex(g, a)
    assert a.level == b.level + 1


@given(st.data(), st.sampled_from([2, 3, 4, 6, 12]))
def test_A_n_F_n_match_definitions(G, data, n):
    g = data.draw(elements(G))
    assert A_n_of(G, g, n) == oracle.brute_A_n(G, g, n)
    assert F_n_of(G, g, n) == oracle.brute_F_n(G, g, n)


def test_operators_need_n_at_least_2():
    G = realized_spec("Z")
    with pytest.raises(SpecError):
        A_n_of(G, G.element([1]), 1)


def test_subgroup_order():
    assert subgroup_leq(EMPTY, ConvexSubgroup(0))
    assert subgroup_leq(ConvexSubgroup(2), ConvexSubgroup(1))
    assert not subgroup_leq(ConvexSubgroup(0), ConvexSubgroup(1))


def test_concat_and_elements():
    G = realized_spec("Z").concat(realized_spec("Q"))
    assert G.k == 2 and G.is_discrete(1) and not G.is_discrete(2)
    with pytest.raises(SpecError):
        G.element([Fraction(1, 2), 0])
    with pytest.raises(SpecError):
        GroupElement((1,)) + GroupElement((1, 2))
