"""Acceptance criteria 1-9, one PASS/FAIL line each.

Run with pytest (lines appear in the terminal summary) or directly:
    python3 tests/test_acceptance.py
"""
from __future__ import annotations

import csv
import os
import random
import sys
import time

import pytest

HERE = os.path.dirname(os.path.abspath(__file__))
if HERE not in sys.path:
    sys.path.insert(0, HERE)

from oag.core import INF, ArchComponent, ExtNat, GroupSpec, PrimeDimProfile, realized_spec  # noqa: E402
from oag.invariants import classify, dp_rank  # noqa: E402
from oag.patterns import (  # noqa: E402
    Pattern,
    adversarial_wict,
    check,
    construct_dp_witness,
    construct_inp_from_chain,
    instances_directed,
    jump_family,
    witness_jumps,
    rows_tight,
    tower_truncation,
    verify_claim1,
    verify_claims,
)
from oag.staircase import StaircaseSubgroup  # noqa: E402
from oag.rewrite import eval_atom, evaluate, expand_derived, only_base_atoms  # noqa: E402
from oag.suites import crt_suite, qe_suite, random_body, staircase_suite  # noqa: E402
from oag.syntax import parse  # noqa: E402
from oag.vcd import bound_data, count_atoms, estimate_dual_vc, psi_disjunction, random_parameters, _slope  # noqa: E402

from conftest import corpus, spec_path  # noqa: E402
from gen import DERIVED_KINDS, derived_atom, element  # noqa: E402
from reference import recount_dp_rank  # noqa: E402

RESULTS: list[str] = []
SIZES = [4, 8, 16, 32, 64]
SLOPE_TOL = 0.3


def record(n: int, ok: bool, detail: str, elapsed: float, limit: float | None = None) -> bool:
    timing = f"{elapsed:.1f}s" + (f" (limit {limit:.0f}s)" if limit is not None else "")
    if limit is not None and elapsed > limit:
        ok = False
        detail += "; over time"
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail} [{timing}]"
    RESULTS.append(line)
    print(line)
    return ok


def crit1() -> bool:
    t = time.time()
    specs = corpus()
    with open(spec_path("dp_table.csv")) as fh:
        rows = list(csv.DictReader(fh))
    bad = []
    for row in rows:
        G = specs[row["spec"]]
        c = classify(G)
        if (c.kind, str(c.dp_rank)) != (row["kind"], row["dp_rank"]) or recount_dp_rank(G) != c.dp_rank:
            bad.append(row["spec"])
    return record(1, not bad and len(rows) >= 12, f"dp table {len(rows) - len(bad)}/{len(rows)} specs (recount agrees)", time.time() - t, 1)


def crit2() -> bool:
    t = time.time()
    kinds = [("Z",), ("Z", "Z"), ("Z", "Q", "Z"), ("Z", "Q"), ("Q", "Z"), ((2,), "Z"), ("Z", "Z", "Z"), ("Z", (3,), "Q")]
    total = failed = 0
    per = 1000 // len(kinds)
    for i, k in enumerate(kinds):
        res = crt_suite(realized_spec(*k), cases=per, seed=100 + i)
        total += res.total
        failed += res.failed
    return record(2, failed == 0 and total >= 1000, f"CRT systems {total - failed}/{total} agree with enumeration", time.time() - t, 60)


def crit3() -> bool:
    t = time.time()
    rng = random.Random(3)
    claims = bad = 0
    for name, G in corpus().items():
        if G.k == 0:
            continue
        if G.omega_tower is not None:
            G = tower_truncation(G, 3)
        if not G.computable:
            continue
        chosen = witness_jumps(G)
        for _, ok, _ in verify_claims(G, jump_family(G, chosen), chosen) + verify_claim1(G, rng, 10):
            claims += 1
            bad += not ok
    pairs = failed = 0
    for i, k in enumerate([("Z", "Z"), ("Z", "Q", "Z"), ("Q", "Z"), ("Z", (3,)), ("Z", "Z", "Z")]):
        res = staircase_suite(realized_spec(*k), cases=100, seed=30 + i)
        pairs += res.total
        failed += res.failed
    ok = bad == 0 and failed == 0 and pairs >= 500
    return record(3, ok, f"claims {claims - bad}/{claims}, membership pairs {pairs - failed}/{pairs}", time.time() - t)


def crit4() -> bool:
    t = time.time()
    kinds = [("Z",), ("Q",), ("Z", "Z"), ("Z", "Q"), ("Q", "Z"), ("Z", "Q", "Z")]
    total = failed = 0
    for i, k in enumerate(kinds):
        res = qe_suite(realized_spec(*k), cases=50, seed=40 + i)
        total += res.total
        failed += res.failed
    return record(4, failed == 0 and total >= 300, f"QE formulas {total - failed}/{total} agree with the oracle", time.time() - t, 300)


def crit5() -> bool:
    t = time.time()
    built = good = 0
    for k in [("Z", "Z"), ("Z", "Q", "Z")]:
        G = realized_spec(*k)
        chain = [StaircaseSubgroup.multiple(G, 2), StaircaseSubgroup.convex_plus(G, 1, 5), StaircaseSubgroup.multiple(G, 7)]
        for M in (3, 4):
            for depth in (2, 3):
                p = construct_inp_from_chain(G, chain[:depth], M)
                rep = check(p, G)
                built += 1
                good += rep.valid and rep.paths == M ** depth and rows_tight(p, G)
                w = construct_dp_witness(G, depth, M)
                rep = check(w, G)
                built += 1
                good += rep.valid and rep.paths == M ** depth and rows_tight(w, G) and check(Pattern("ict", w.rows), G).valid
    rejected = directed = 0
    G = realized_spec("Z", "Z")
    cands = adversarial_wict(G, 100, seed=5)
    for p in cands:
        directed += instances_directed(G, p)
        rejected += not check(p, G).valid
    ok = good == built and rejected == len(cands) == directed == 100
    return record(5, ok, f"constructions {good}/{built} valid, adversarial {rejected}/{len(cands)} rejected", time.time() - t, 120)


def crit6() -> bool:
    t = time.time()
    rng = random.Random(6)
    pairs = over = 0
    for k in [("Z",), ("Z", "Z"), ("Z", "Q"), ("Q", "Z")]:
        G = realized_spec(*k)
        for _ in range(50):
            f = random_body(G, rng, ["x", "y"], rng.randint(1, 3))
            A = random_parameters(G, rng.randint(1, 8), 1, rng, 10)
            pairs += 1
            over += count_atoms(f, A, G, params=["y"]).atom_count > bound_data(f, G).bound(len(A))
    nested = exact = 0
    for k in [("Z",), ("Z", "Z"), ("Q", "Z")]:
        G = realized_spec(*k)
        for n in (1, 3, 7, 15):
            A = sorted(set(random_parameters(G, n, 1, rng, 100)), key=lambda a: a[0].coords)
            nested += 1
            exact += count_atoms(parse("x <= y"), A, G).atom_count == len(A) + 1
    ok = over == 0 and exact == nested
    return record(6, ok, f"count <= bound on {pairs - over}/{pairs} pairs, nested family exact {exact}/{nested}", time.time() - t)


def crit7() -> bool:
    t = time.time()
    rng = random.Random(7)
    notes = []
    ok = True
    for k in [("Z",), ("Z", "Z")]:
        G = realized_spec(*k)
        rank = dp_rank(G).value
        formulas = [parse("x <= y")] + [random_body(G, rng, ["x", "y"], rng.randint(1, 2)) for _ in range(2)]
        upper = max(estimate_dual_vc(f, G, SIZES, 20, seed=rng.randrange(10**6)).slope for f in formulas)
        counts = []
        for M in SIZES:
            psi, names, B = psi_disjunction(construct_dp_witness(G, 1, M + 1), M)
            counts.append(count_atoms(psi, B, G, params=names).atom_count)
        lower = _slope(SIZES, counts)
        ok = ok and upper <= rank + SLOPE_TOL and abs(lower - rank) <= SLOPE_TOL
        notes.append(f"{'x'.join(k)}: dp={rank} max slope {upper:.2f}, witness slope {lower:.2f}")
    return record(7, ok, "; ".join(notes), time.time() - t, 120)


def crit8() -> bool:
    t = time.time()
    kinds = [("Z",), ("Q",), ((2,),), ("Z", "Z"), ("Z", "Q"), ("Q", "Z"), ("Z", (3,), "Z")]
    rng = random.Random(8)
    checked = bad = 0
    for kind in DERIVED_KINDS:
        for i in range(100):
            G = realized_spec(*kinds[i % len(kinds)])
            a = derived_atom(G, rng, kind)
            f = expand_derived(a, G)
            bad += not only_base_atoms(f)
            for _ in range(10):
                env = {"x": element(G, rng)}
                checked += 1
                bad += evaluate(f, G, env) != eval_atom(a, G, env)
    return record(8, bad == 0, f"{len(DERIVED_KINDS)}x100 derived atoms, {checked - bad}/{checked} evaluations agree", time.time() - t)


def _random_profile(rng: random.Random) -> GroupSpec:
    comps = []
    for i in range(rng.randint(1, 3)):
        exc = {p: rng.choice([ExtNat(0), ExtNat(1), ExtNat(2), INF]) for p in rng.sample([2, 3, 5], rng.randint(0, 2))}
        comps.append(ArchComponent(f"c{i}", PrimeDimProfile.make(exc, rng.choice([ExtNat(0), ExtNat(1)]))))
    return GroupSpec(tuple(comps))


def crit9() -> bool:
    t = time.time()
    rng = random.Random(9)
    good = 0
    for _ in range(50):
        G, H = _random_profile(rng), _random_profile(rng)
        s = dp_rank(G.concat(H))
        good += s.value == dp_rank(G).value + dp_rank(H).value - 1 and recount_dp_rank(G.concat(H)) == s
    return record(9, good == 50, f"lexicographic sums {good}/50 with dp(G)+dp(H)-1", time.time() - t)


CRITERIA = [crit1, crit2, crit3, crit4, crit5, crit6, crit7, crit8, crit9]


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"criterion{i + 1}" for i in range(len(CRITERIA))])
def test_criterion(crit):
    assert crit()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
