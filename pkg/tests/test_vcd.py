from __future__ import annotations

import random

import pytest

from oag import oracle
from oag.core import SpecError, realized_spec
from oag.patterns import construct_dp_witness
from oag.rewrite import evaluate
from oag.suites import random_body
from oag.syntax import Term, parse, substitute
from oag.vcd import (
    bound_data,
    count_atoms,
    estimate_dual_vc,
    product_bound,
    psi_disjunction,
    random_parameters,
    sign_vectors,
)

Z = realized_spec("Z")


def consts(G, *vs):
    return [(G.element([v]),) for v in vs]


def test_examples():
    assert count_atoms(parse("x <= y"), consts(Z, 1, 5, -3, 8, 0), Z).atom_count == 6
    assert count_atoms(parse("x == y mod 2G"), consts(Z, 0, 1, 2), Z).atom_count == 2
    assert count_atoms(parse("x = x"), consts(Z, 0, 1), Z, params=["y"]).atom_count == 1


def test_product_bound_examples():
    assert product_bound([1], 5) == 6
    assert product_bound([1, 1], 5) == 36
    assert product_bound([], 5, na_formulas=1, na_sets=2) == 4


def test_nested_family_is_tight():
    for G in (Z, realized_spec("Z", "Z"), realized_spec("Q", "Z")):
        rng = random.Random(G.k)
        for n in (1, 4, 9):
            A = random_parameters(G, n, 1, rng, 100)
            if len(set(A)) < n:
                continue
            assert count_atoms(parse("x <= y"), A, G).atom_count == n + 1


@pytest.mark.parametrize("kinds", [("Z",), ("Q",), ("Z", "Z"), ("Z", "Q")])
def test_cells_match_refinement_and_bound(kinds):
    G = realized_spec(*kinds)
    rng = random.Random(13)
    for _ in range(25):
        f = random_body(G, rng, ["x", "y"], rng.randint(1, 3))
        A = random_parameters(G, rng.randint(1, 5), 1, rng, 10)
        cells = sign_vectors(f, A, G, "x", ["y"], method="cells")
        assert cells == sign_vectors(f, A, G, "x", ["y"], method="refine"), f
        assert len(cells) <= bound_data(f, G).bound(len(A)), f


def test_cells_match_enumeration_on_integers():
    # thresholds stay within 40 of 0 and moduli divide 72, so the box meets every cell
    rng = random.Random(4)
    xs = [Z.element([v]) for v in range(-300, 301)]
    for _ in range(40):
        f = random_body(Z, rng, ["x", "y"], rng.randint(1, 3))
        A = random_parameters(Z, rng.randint(1, 6), 1, rng, 10)
        seen = {tuple(evaluate(f, Z, {"x": x, "y": a[0]}) for a in A) for x in xs}
        assert seen == sign_vectors(f, A, Z, "x", ["y"]), f


def test_cells_match_enumeration_on_lex_plane():
    # D1 moduli make prefix cuts; the box reaches past every threshold and cut by more than the moduli
    G = realized_spec("Z", "Z")
    rng = random.Random(6)
    box = oracle.Box(((-40, 40, 1), (-150, 150, 1)))
    for _ in range(40):
        f = random_body(G, rng, ["x", "y"], rng.randint(1, 3))
        A = random_parameters(G, rng.randint(1, 4), 1, rng, 10)
        insts = [substitute(f, "y", Term.element(a[0])) for a in A]
        env = oracle.env_for(G, f, box, ["x"])
        cols = [oracle.eval_vec(g, G, env) for g in insts]
        seen = set(zip(*(c.tolist() for c in cols)))
        assert seen == sign_vectors(f, A, G, "x", ["y"]), f


def test_monotone_in_parameters():
    rng = random.Random(8)
    G = realized_spec("Z", "Z")
    for _ in range(20):
        f = random_body(G, rng, ["x", "y"], 2)
        A = random_parameters(G, 6, 1, rng, 10)
        assert count_atoms(f, A[:3], G, params=["y"]).atom_count <= count_atoms(f, A, G, params=["y"]).atom_count


@pytest.mark.parametrize("kinds", [("Z", "Z"), ("Z", "Q", "Z")])
@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("M", [2, 3, 4])
def test_psi_disjunction_lower_bound(kinds, n, M):
    G = realized_spec(*kinds)
    p = construct_dp_witness(G, n, M + 1)
    psi, names, B = psi_disjunction(p, M)
    assert len(B) == n * M
    assert count_atoms(psi, B, G, params=names).atom_count >= M ** n


def test_psi_needs_spare_column():
    p = construct_dp_witness(Z, 1, 3)
    with pytest.raises(SpecError):
        psi_disjunction(p, 3)


def test_estimates():
    est = estimate_dual_vc(parse("x <= y"), Z, [4, 8, 16], 3, seed=1)
    assert est.bound_ok and abs(est.slope - 1) < 0.3
    assert [row[1] for row in est.table] == [5, 9, 17]
    flat = estimate_dual_vc(parse("x == 0 mod 2G"), Z, [4, 8, 16], 2, seed=1)
    assert flat.slope == pytest.approx(0, abs=1e-9)
    mixed = estimate_dual_vc(parse("x <= y or x == y mod 2G"), Z, [4, 8, 16, 32], 3, seed=2)
    assert mixed.bound_ok and mixed.slope <= 1.3
