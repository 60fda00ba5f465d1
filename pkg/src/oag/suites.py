"""Fuzz comparisons between the algebraic modules and the enumeration oracle."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import oracle
from .core import GroupElement, GroupSpec, SpecError
from .patterns import Pattern, Row, check
from .qe import eliminate_exists, language_ok
from .solver import CongruenceSystem, SolutionCoset, solve
from .staircase import StairExpr, StaircaseSubgroup
from .syntax import Cong, Exists, Formula, Not, Order, Term, conj, disj, negate, print_formula

SUITES = ("crt", "staircase", "qe", "patterns")
DIVISORS_72 = (1, 2, 3, 4, 6, 8, 9, 12, 18, 24, 36, 72)


@dataclass
class SuiteResult:
    name: str
    total: int = 0
    failed: int = 0
    counterexamples: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failed == 0

    def fail(self, text: str, keep: int = 5) -> None:
        self.failed += 1
        if len(self.counterexamples) < keep:
            self.counterexamples.append(text)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} suite={self.name} cases={self.total} failures={self.failed}"


# Random generators

def random_element(G: GroupSpec, rng: random.Random, radius: int = 6) -> GroupElement:
    dens = [d for _, _, d in oracle.Box.default(G).ranges]
    return GroupElement(tuple(Fraction(rng.randint(-radius * d, radius * d), d) for d in dens))


def random_modulus(G: GroupSpec, rng: random.Random, tails=DIVISORS_72[1:], convex: bool = True) -> StairExpr:
    """c*CS(l) + n*G with finite index (or n*G)."""
    n = rng.choice(tails)
    if not convex or G.k == 1 or rng.random() < 0.5:
        return StairExpr((), n)
    level = rng.randint(1, G.k - 1)
    c = rng.choice([d for d in DIVISORS_72 if n % d == 0] if n else (1,))
    return StairExpr(((level, c),), n)


def random_system(G: GroupSpec, rng: random.Random, max_constraints: int = 4) -> list[tuple[GroupElement, StairExpr]]:
    return [(random_element(G, rng), random_modulus(G, rng)) for _ in range(rng.randint(1, max_constraints))]


def _denominators(G: GroupSpec, i: int) -> list[int]:
    real = G.component(i).realization
    if real.is_rationals:
        return [1, 2]
    return [1] + sorted(real.invertible_primes)


def random_atom(G: GroupSpec, rng: random.Random, variables: list[str], x: str = "x") -> Formula:
    coeffs = {v: rng.randint(-4, 4) for v in variables}
    if not coeffs.get(x):
        coeffs[x] = rng.choice([-2, -1, 1, 2, 3])
    const = [Fraction(rng.randint(-4, 4), rng.choice(_denominators(G, i + 1))) for i in range(G.k)]
    t = Term.make(coeffs, const)
    if rng.random() < 0.5:
        return Order(t, rng.choice(["<", "<=", "="]))
    n = rng.choice([2, 3, 4, 6, 8, 9])
    if G.k == 1 or rng.random() < 0.5:
        return Cong(t, StairExpr((), n))
    return Cong(t, StairExpr(((rng.randint(1, G.k), 1),), n if rng.random() < 0.8 else 0))


def random_body(G: GroupSpec, rng: random.Random, variables: list[str], n: int) -> Formula:
    atoms = [random_atom(G, rng, variables) for _ in range(n)]
    atoms = [Not(a) if rng.random() < 0.3 else a for a in atoms]
    if n >= 3 and rng.random() < 0.5:
        return disj([conj(atoms[:2]), conj(atoms[2:])])
    return rng.choice([conj, disj])(atoms)


# Suites

def crt_suite(G: GroupSpec, cases: int = 200, seed: int = 0) -> SuiteResult:
    """Solver verdict and solution coset against enumeration of a finite quotient."""
    rng = random.Random(seed)
    res = SuiteResult("crt")
    for _ in range(cases):
        cons = random_system(G, rng)
        res.total += 1
        text = "; ".join(f"x == {a} mod {m}" for a, m in cons)
        sol = solve(CongruenceSystem(G, tuple((a, StaircaseSubgroup.from_expr(G, m)) for a, m in cons)))
        truth = oracle.oracle_solve(G, cons)
        if isinstance(sol, SolutionCoset) != truth.solvable:
            res.fail(f"{text}: solver={sol} oracle solvable={truth.solvable}")
            continue
        if isinstance(sol, SolutionCoset):
            mask = oracle.coset_mask(truth.quotient, sol.base, sol.modulus.to_expr())
            if not np.array_equal(mask, truth.mask):
                res.fail(f"{text}: solution coset {sol} differs from the enumerated solutions")
        else:
            i, j = sol.pair
            if oracle.oracle_solve(G, [cons[i], cons[j]]).solvable:
                res.fail(f"{text}: reported pair {sol.pair} is compatible")
    return res


def staircase_suite(G: GroupSpec, cases: int = 200, seed: int = 0, samples: int = 10) -> SuiteResult:
    """Membership in H, K, H+K and H&K, and the index of H, against the oracle."""
    rng = random.Random(seed)
    res = SuiteResult("staircase")
    for _ in range(cases):
        eh, ek = random_modulus(G, rng), random_modulus(G, rng)
        H, K = StaircaseSubgroup.from_expr(G, eh), StaircaseSubgroup.from_expr(G, ek)
        S, I = H.sum(K), H.intersect(K)
        res.total += 1
        size = oracle.quotient(G, eh).size
        idx = StaircaseSubgroup.whole(G).index_of(H)
        if idx.value != size:
            res.fail(f"[G:{eh}] = {idx}, oracle {size}")
        for _ in range(samples):
            g = random_element(G, rng, 40)
            in_h, in_k = oracle.member(G, eh, g), oracle.member(G, ek, g)
            in_sum = oracle.oracle_solve(G, [(G.zero(), eh), (g, ek)]).solvable
            got = (H.contains(g), K.contains(g), S.contains(g), I.contains(g))
            want = (in_h, in_k, in_sum, in_h and in_k)
            if got != want:
                res.fail(f"g={g} H={eh} K={ek}: got {got} oracle {want}")
                break
    return res


def qe_suite(G: GroupSpec, cases: int = 60, seed: int = 0, box: oracle.Box | None = None) -> SuiteResult:
    """Eliminated formula against direct evaluation of the existential on a box of parameters."""
    rng = random.Random(seed)
    res = SuiteResult("qe")
    variables = ["x", "y", "z"] if G.k == 1 else ["x", "y"]
    params = variables[1:]
    if box is None:
        box = oracle.Box.default(G, 50 if G.k == 1 else 6)
    for _ in range(cases):
        body = random_body(G, rng, variables, rng.randint(1, 4))
        f = Exists("x", body)
        out = eliminate_exists(f, G)
        res.total += 1
        if not language_ok(out):
            res.fail(f"{print_formula(f)}: output leaves the language")
            continue
        dens = [a * b for a, b in zip(oracle.formula_dens(G, f), oracle.formula_dens(G, out))]
        env = oracle.box_env(G, box, params, dens)
        truth = oracle.decide_exists(f, G, env)
        got = oracle.eval_vec(out, G, env)
        bad = np.nonzero(truth != got)[0]
        if len(bad):
            i = int(bad[0])
            at = ", ".join(f"{v}={env.element(v, i)}" for v in params)
            res.fail(f"{print_formula(f)} at {at}: oracle {bool(truth[i])}, eliminated {print_formula(out)}")
    return res


def oracle_sat(f: Formula, G: GroupSpec, x: str = "x") -> bool:
    """Does some x satisfy the ground formula f?  Exact per-coordinate search of the oracle."""
    ex = Exists(x, f)
    env = oracle.box_env(G, oracle.Box.default(G, 0), [], oracle.formula_dens(G, ex))
    return bool(oracle.decide_exists(ex, G, env)[0])


def oracle_check(p: Pattern, G: GroupSpec) -> bool:
    """Validity of a small pattern with every satisfiability question sent to the oracle."""
    M = p.columns
    for path in itertools.product(range(M), repeat=p.depth):
        parts: list[Formula] = []
        for row, fj in zip(p.rows, path):
            parts.append(row.instance(fj, p.var))
            if p.kind != "inp":
                parts += [negate(row.instance(j, p.var)) for j in range(M) if j != fj and not (p.kind == "wict" and j < fj)]
        if not oracle_sat(conj(parts), G, p.var):
            return False
    if p.kind == "inp":
        for row in p.rows:
            for subset in itertools.combinations(range(M), row.k):
                if oracle_sat(conj(row.instance(j, p.var) for j in subset), G, p.var):
                    return False
    return True


def random_pattern(G: GroupSpec, rng: random.Random) -> Pattern:
    kind = rng.choice(["inp", "ict", "wict"])
    depth = rng.randint(1, 2)
    M = 2 if depth == 2 and kind != "inp" else rng.randint(2, 3)
    rows = []
    for _ in range(depth):
        if rng.random() < 0.6:
            f = Cong(Term.var("x") - Term.var("a"), random_modulus(G, rng, (2, 3, 4, 6)))
        else:
            f = Order(Term.var("x") - Term.var("a"), rng.choice(["<", "<="]))
        cols = [(random_element(G, rng, 4),) for _ in range(M)]
        if rng.random() < 0.5:
            cols.sort(key=lambda c: c[0].coords)
        rows.append(Row(f, ("a",), cols))
    return Pattern(kind, rows)


def patterns_suite(G: GroupSpec, cases: int = 60, seed: int = 0, pairs: int = 100) -> SuiteResult:
    """Pattern checker against oracle path checks; congruence-pair consistency against oracle_solve."""
    from .patterns import satisfiable

    rng = random.Random(seed)
    res = SuiteResult("patterns")
    for _ in range(cases):
        p = random_pattern(G, rng)
        res.total += 1
        got, want = check(p, G).valid, oracle_check(p, G)
        if got != want:
            rows = " / ".join(f"{print_formula(r.formula)} cols {[str(c[0]) for c in r.columns]}" for r in p.rows)
            res.fail(f"{p.kind}: {rows}: checker {got}, oracle {want}")
    for _ in range(pairs):
        (a, h), (b, k) = [(random_element(G, rng), random_modulus(G, rng)) for _ in range(2)]
        f = conj([Cong(Term.var("x") - Term.element(a), h), Cong(Term.var("x") - Term.element(b), k)])
        res.total += 1
        if satisfiable(f, G) != oracle.oracle_solve(G, [(a, h), (b, k)]).solvable:
            res.fail(f"{print_formula(f)}: pair consistency disagrees")
    return res


def run_suite(name: str, G: GroupSpec, seed: int = 0, box: oracle.Box | None = None) -> SuiteResult:
    G.require_computable()
    if name == "crt":
        return crt_suite(G, seed=seed)
    if name == "staircase":
        return staircase_suite(G, seed=seed)
    if name == "qe":
        return qe_suite(G, seed=seed, box=box)
    if name == "patterns":
        return patterns_suite(G, seed=seed)
    raise SpecError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
