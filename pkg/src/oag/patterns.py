"""Finite ict / wict / special / inp patterns: checking, construction, transforms.

A pattern is a list of rows.  Each row is a formula in the object variable
x and some parameter variables, together with one parameter tuple per
column.  All arrays are finite; validity is decided exactly for the given
columns.
"""
from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    INF,
    Cmp,
    ExtNat,
    GroupElement,
    GroupSpec,
    SpecError,
    compare,
    prime_factors,
)
from .invariants import dim_p, infinite_jumps, regular_jumps, relevant_primes
from .qe import eliminate_exists, fold
from .rewrite import staircase_of
from .solver import OrderWindow, decide_closed, linear_solutions, verify_distributivity
from .staircase import StaircaseSubgroup, intersect_all
from .syntax import (
    And,
    Cong,
    Exists,
    FalseF,
    Formula,
    Not,
    Or,
    Order,
    Term,
    TrueF,
    conj,
    free_vars,
    negate,
    parse,
    print_formula,
    substitute,
)

KINDS = ("ict", "wict", "special", "inp")


class PatternError(SpecError):
    pass


@dataclass
class Row:
    formula: Formula
    params: tuple[str, ...]
    columns: list[tuple[GroupElement, ...]]
    k: int = 2  # inconsistency bound, inp only

    def instance(self, j: int, var: str = "x") -> Formula:
        f = self.formula
        for name, g in zip(self.params, self.columns[j]):
            f = substitute(f, name, Term.element(g))
        return f


@dataclass
class Pattern:
    kind: str
    rows: list[Row]
    var: str = "x"
    notes: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise PatternError(f"unknown pattern kind {self.kind!r}")
        widths = {len(r.columns) for r in self.rows}
        if len(widths) > 1:
            raise PatternError("pattern is not rectangular")
        for r in self.rows:
            extra = free_vars(r.formula) - {self.var} - set(r.params)
            if extra:
                raise PatternError(f"row formula has unbound variables {sorted(extra)}")
            for col in r.columns:
                if len(col) != len(r.params):
                    raise PatternError("parameter tuple length does not match the row's parameters")

    @property
    def depth(self) -> int:
        return len(self.rows)

    @property
    def columns(self) -> int:
        return len(self.rows[0].columns) if self.rows else 0


@dataclass
class PatternReport:
    kind: str
    valid: bool
    paths: int
    failures: list[str]
    checks: int = 0

    def summary(self) -> str:
        word = "VALID" if self.valid else "INVALID"
        return f"{word} kind={self.kind} paths={self.paths} failures={len(self.failures)}"


# Satisfiability of a formula in one variable with ground parameters

_REV = {"<": ">", "<=": ">=", "=": "=", ">": "<", ">=": "<="}
_NEG = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def _fast_form(spec: GroupSpec, atom: Formula, var: str):
    """('ord', op, q) meaning x op q, ('cong', base, H) meaning x in base + H, or ('never',); None otherwise.

    For c*x op g the threshold q = g/c lies in the divisible hull and may be
    outside G: the order extends there and the window routines take rational
    bounds, so c*x < g holds exactly when x < g/c.
    """
    if not isinstance(atom, (Order, Cong)):
        return None
    t = atom.term
    if t.variables() != {var}:
        return None
    c = t.coeff(var)
    g = t.drop(var).value(spec)
    if isinstance(atom, Order):
        q = GroupElement(tuple(-v / c for v in g.coords))
        return ("ord", atom.op, q) if c > 0 else ("ord", _REV[atom.op], q)
    H = staircase_of(spec, atom.mod)
    if c in (1, -1):
        return ("cong", (-c) * g, H)
    sol = linear_solutions(spec, c, g, H)
    return ("never",) if sol is None else ("cong", sol.base, sol.modulus)


def _literals(f: Formula) -> list[tuple[Formula, bool]] | None:
    parts = f.args if isinstance(f, And) else (f,)
    out = []
    for p in parts:
        if isinstance(p, Not) and isinstance(p.arg, (Order, Cong)):
            out.append((p.arg, False))
        elif isinstance(p, (Order, Cong)):
            out.append((p, True))
        else:
            return None
    return out


def _tighter(a, b, lower: bool):
    if a is None:
        return b
    c = compare(a[0], b[0])
    if c == Cmp.EQ:
        return (a[0], a[1] or b[1])
    if lower:
        return a if c == Cmp.GT else b
    return a if c == Cmp.LT else b


@dataclass(frozen=True)
class WindowState:
    """Accumulated conjunction of fast-form literals: order window, cosets, excluded points."""

    lower: tuple | None = None
    upper: tuple | None = None
    excluded: tuple = ()
    pos: tuple = ()  # (H, reduced base), at most one per H
    neg: frozenset = frozenset()  # (reduced base, H)

    def add(self, form: tuple, positive: bool) -> WindowState | None:
        """The state with one more literal, or None when that is plainly contradictory."""
        if form[0] == "ord":
            _, op, q = form
            if not positive:
                if op == "=":
                    return WindowState(self.lower, self.upper, self.excluded + (q,), self.pos, self.neg)
                op = _NEG[op]
            lower, upper = self.lower, self.upper
            if op in ("<", "<=", "="):
                upper = _tighter(upper, (q, op == "<"), lower=False)
            if op in (">", ">=", "="):
                lower = _tighter(lower, (q, op == ">"), lower=True)
            out = WindowState(lower, upper, self.excluded, self.pos, self.neg)
            return None if OrderWindow(lower, upper).is_empty() else out
        if form[0] == "never":
            return None if positive else self
        _, base, H = form
        if all(c == 1 for c in H.coeffs):
            return self if positive else None
        b = H.reduce(base)
        if positive:
            for h, prev in self.pos:
                if h == H:
                    return self if prev == b else None
            if (b, H) in self.neg:
                return None
            return WindowState(self.lower, self.upper, self.excluded, self.pos + ((H, b),), self.neg)
        if (H, b) in self.pos:
            return None
        return WindowState(self.lower, self.upper, self.excluded, self.pos, self.neg | {(b, H)})

    def decide(self, spec: GroupSpec) -> bool | None:
        window = OrderWindow(self.lower, self.upper)
        if window.is_empty():
            return False
        positives = [(b, H) for H, b in self.pos]
        negatives = list(self.neg)
        points = sorted({p for p in self.excluded if window.contains(p)}, key=lambda g: g.coords)
        if not points:
            return decide_closed(spec, positives, negatives, window)
        cuts = [self.lower] + [(p, True) for p in points]
        tops = [(p, True) for p in points] + [self.upper]
        undecided = False
        for lo, hi in zip(cuts, tops):
            sub = OrderWindow(lo, hi)
            if sub.is_empty():
                continue
            r = decide_closed(spec, positives, negatives, sub)
            if r:
                return True
            if r is None:
                undecided = True
        return None if undecided else False


def fast_conjunction_sat(spec: GroupSpec, forms: Iterable[tuple[tuple, bool]]) -> bool | None:
    """Decide a conjunction of literals in fast form; None when the solver cannot."""
    state: WindowState | None = WindowState()
    for form, positive in forms:
        state = state.add(form, positive)
        if state is None:
            return False
    return state.decide(spec)


def _clause(f: Formula) -> list[tuple[Formula, bool]] | None:
    """A disjunction of literals as a list, or None."""
    if isinstance(f, Not) and isinstance(f.arg, And):
        lits = _literals(f.arg)
        return None if lits is None else [(a, not s) for a, s in lits]
    if isinstance(f, Or):
        out = []
        for g in f.args:
            lits = _literals(g)
            if lits is None or len(lits) != 1:
                return None
            out += lits
        return out
    lits = _literals(f)
    return lits if lits is not None and len(lits) == 1 else None


def _branch_sat(spec: GroupSpec, state: WindowState, clauses: list, var: str, lits: list) -> bool | None:
    """Pick one literal per clause, pruning with the window state."""
    if not clauses:
        r = state.decide(spec)
        if r is None:
            out = eliminate_exists(Exists(var, conj(a if s else negate(a) for a, s in lits)), spec)
            return isinstance(out, TrueF)
        return r
    first, rest = clauses[0], clauses[1:]
    for (form, positive), lit in first:
        nxt = state.add(form, positive)
        if nxt is not None and _branch_sat(spec, nxt, rest, var, lits + [lit]):
            return True
    return False


def satisfiable(f: Formula, spec: GroupSpec, var: str = "x") -> bool:
    """Is there x in G with f(x)?  The parameters of f must already be ground."""
    f = fold(f, spec)
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    parts = f.args if isinstance(f, And) else (f,)
    clauses = [_clause(p) for p in parts]
    if all(c is not None for c in clauses):
        fast = [[((_fast_form(spec, a, var), s), (a, s)) for a, s in c] for c in clauses]
        if all(fm[0] is not None for c in fast for fm, _ in c):
            units = [c[0] for c in fast if len(c) == 1]
            state: WindowState | None = WindowState()
            for (form, positive), _ in units:
                state = state.add(form, positive)
                if state is None:
                    return False
            others = sorted((c for c in fast if len(c) > 1), key=len)
            return _branch_sat(spec, state, others, var, [lit for _, lit in units])
    out = eliminate_exists(Exists(var, f), spec)
    if isinstance(out, TrueF):
        return True
    if isinstance(out, FalseF):
        return False
    raise PatternError(f"formula has free parameters: {print_formula(out)}")


# Checking

def _path_formula(p: Pattern, path: Sequence[int], strict_after: bool) -> Formula:
    parts: list[Formula] = []
    for row, fj in zip(p.rows, path):
        parts.append(row.instance(fj, p.var))
        for j in range(p.columns):
            if j == fj or (strict_after and j < fj):
                continue
            parts.append(negate(row.instance(j, p.var)))
    return conj(parts)


def check(p: Pattern, G: GroupSpec, max_failures: int = 20) -> PatternReport:
    G.require_computable()
    failures: list[str] = []
    checks = 0
    M = p.columns
    if p.kind == "special":
        if M < 2:
            raise PatternError("a special pattern needs two columns")
        parts = []
        for row in p.rows:
            parts += [row.instance(0, p.var), negate(row.instance(1, p.var))]
        checks = 1
        ok = satisfiable(conj(parts), G, p.var)
        if not ok:
            failures.append("special system unsatisfiable")
        return PatternReport(p.kind, ok, 1, failures, checks)
    paths = list(itertools.product(range(M), repeat=p.depth))
    for path in paths:
        if p.kind == "inp":
            f = conj(row.instance(j, p.var) for row, j in zip(p.rows, path))
        else:
            f = _path_formula(p, path, strict_after=(p.kind == "wict"))
        checks += 1
        if not satisfiable(f, G, p.var):
            failures.append(f"path {tuple(path)}: unsatisfiable")
            if len(failures) >= max_failures:
                break
    if p.kind == "inp":
        for i, row in enumerate(p.rows):
            if row.k > M:
                failures.append(f"row {i}: k={row.k} exceeds the {M} columns")
                continue
            for subset in itertools.combinations(range(M), row.k):
                checks += 1
                if satisfiable(conj(row.instance(j, p.var) for j in subset), G, p.var):
                    failures.append(f"row {i} columns {subset}: jointly satisfiable")
                    break
    return PatternReport(p.kind, not failures, len(paths), failures, checks)


def rows_tight(p: Pattern, G: GroupSpec) -> bool:
    """Every single instance is satisfiable (so k_i = 2 rows are exactly 2-inconsistent)."""
    return all(satisfiable(r.instance(j, p.var), G, p.var) for r in p.rows for j in range(p.columns))


# Constructors

def _first_reps(big: StaircaseSubgroup, small: StaircaseSubgroup, M: int) -> list[GroupElement]:
    """M canonical representatives of big/small, first coordinate varying fastest."""
    spec = big.spec
    per = []
    for i in range(spec.k):
        b, s = big.coeffs[i], small.coeffs[i]
        comp = spec.component(i + 1)
        if b == 0:
            per.append([Fraction(0)])
        elif s == 0:
            vals = [Fraction(0)]
            n = 1
            while len(vals) < M:
                vals += [Fraction(b * n), Fraction(-b * n)]
                n += 1
            per.append(vals[:M])
        else:
            count = comp.strip(s) // comp.strip(b)
            per.append([Fraction(b * r) for r in range(min(count, M))])
    out = []
    for combo in itertools.product(*reversed(per)):
        out.append(GroupElement(tuple(reversed(combo))))
        if len(out) == M:
            break
    return out


def congruence_row(H: StaircaseSubgroup, elems: Sequence[GroupElement], param: str = "a") -> Row:
    f = Cong(Term.var("x") - Term.var(param), H.to_expr())
    return Row(f, (param,), [(g,) for g in elems], 2)


def chain_conditions(hs: Sequence[StaircaseSubgroup]) -> tuple[list[StaircaseSubgroup], list[ExtNat]]:
    """K_i = intersection over j != i of (H_j + H_i), and the indices [K_i : H_i]."""
    spec = hs[0].spec
    ks = [intersect_all(spec, (hs[j].sum(hs[i]) for j in range(len(hs)) if j != i)) for i in range(len(hs))]
    return ks, [k.index_of(h) for k, h in zip(ks, hs)]


def construct_inp_from_chain(G: GroupSpec, hs: Sequence[StaircaseSubgroup], M: int) -> Pattern:
    """Rows x == a_j mod H_i with a_j in K_i pairwise incongruent mod H_i; k_i = 2."""
    G.require_computable()
    if not hs:
        raise PatternError("empty chain")
    # commutativity holds in any abelian group
    if not verify_distributivity(list(hs)):
        raise PatternError("distributivity: intersection of (H_i + H_r) differs from (intersection of H_i) + H_r")
    ks, idx = chain_conditions(hs)
    for i, n in enumerate(idx):
        if n.is_finite and n.value < M:
            raise PatternError(f"infinity: [K_{i + 1}:H_{i + 1}] = {n} is smaller than {M} columns")
    rows = [congruence_row(h, _first_reps(k, h, M)) for k, h in zip(ks, hs)]
    notes = [f"row {i + 1}: H={h} K={k} index={n}" for i, (h, k, n) in enumerate(zip(hs, ks, idx))]
    if all(not n.is_finite for n in idx):
        notes.append("capacity infinite: the construction extends to any number of columns")
    return Pattern("inp", rows, "x", notes)


@dataclass(frozen=True)
class FamilyMember:
    """H_(i,j) = D_level + p^e G, the j-th prime attached to the i-th jump (smallest jump first)."""

    i: int
    j: int
    level: int
    prime: int
    e: int
    H: StaircaseSubgroup


def jump_family(G: GroupSpec, chosen: dict[int, list[int]]) -> list[FamilyMember]:
    """Build the H_(i,j) family from the chosen jump levels per prime."""
    levels = sorted({l for ls in chosen.values() for l in ls}, reverse=True)  # smallest subgroup first
    out = []
    for i, level in enumerate(levels, start=1):
        primes = sorted(p for p, ls in chosen.items() if level in ls)
        for j, p in enumerate(primes, start=1):
            e = sum(1 for l in chosen[p] if l >= level)
            out.append(FamilyMember(i, j, level, p, e, StaircaseSubgroup.convex_plus(G, level, p ** e)))
    return out


def witness_jumps(G: GroupSpec) -> dict[int, list[int]]:
    """Jumps with infinite p-dimension gap to the next jump, per relevant prime."""
    out = {}
    for p in relevant_primes(G):
        js = [d.level for d in infinite_jumps(G, p)]
        if js:
            out[p] = js
    return out


def _power(p: int, d: ExtNat) -> ExtNat:
    if not d.is_finite:
        return INF
    return ExtNat(p ** d.value)


def jump_capacities(G: GroupSpec, p: int) -> list[tuple[int, ExtNat]]:
    """(level, p^dim_p(G/D_level)) for every p-jump, top down."""
    levels = sorted(d.level for d in regular_jumps(G, p).jumps)
    return [(l, _power(p, dim_p(G, p, (0, l)))) for l in levels]


def capacity_jumps(G: GroupSpec, p: int, M: int) -> list[int]:
    """Greedy top-down choice of jumps each at least M cosets below the previous one."""
    chosen = []
    top = 0
    for l in sorted(d.level for d in regular_jumps(G, p).jumps):
        cap = _power(p, dim_p(G, p, (top, l)))
        if not cap.is_finite or cap.value >= M:
            chosen.append(l)
            top = l
    return chosen


def _primes(limit: int) -> list[int]:
    out, n = [], 2
    while len(out) < limit:
        if prime_factors(n) == (n,):
            out.append(n)
        n += 1
    return out


def verify_claims(G: GroupSpec, family: Sequence[FamilyMember], chosen: dict[int, list[int]]) -> list[tuple[str, bool, str]]:
    """Check the sum/intersection/index identities of the H_(i,j) family."""
    out: list[tuple[str, bool, str]] = []
    S = StaircaseSubgroup
    fam = sorted(family, key=lambda m: (m.i, m.j))
    whole = S.whole(G)
    n_row: dict[int, int] = {}
    for m in fam:
        n_row[m.i] = n_row.get(m.i, 1) * m.prime ** m.e
    for pos, m in enumerate(fam):
        before = fam[:pos]
        r, s = m.i, m.j
        # 2(a): intersection of earlier members
        left = intersect_all(G, (b.H for b in before))
        terms = []
        acc = 1
        levels = {b.i: b.level for b in fam}
        for i in range(1, r + 1):
            terms.append((levels[i], acc))
            if i < r:
                acc = math.lcm(acc, n_row[i])
        n_rs = 1
        for b in fam:
            if b.i == r and b.j < s:
                n_rs *= b.prime ** b.e
        tail = math.lcm(acc, n_rs)
        right = S.from_terms(G, terms, tail) if before else whole
        out.append((f"2(a) at ({r},{s})", left == right, f"{left} vs {right}"))
        # 2(b)
        lb = intersect_all(G, (b.H.sum(m.H) for b in before))
        rb = S.convex_plus(G, m.level, m.prime ** (m.e - 1))
        dist = left.sum(m.H)
        out.append((f"2(b) at ({r},{s})", lb == rb == dist, f"{lb} vs {rb} vs {dist}"))
        # 2(c)/(d)
        K = intersect_all(G, (b.H.sum(m.H) for b in fam if b is not m))
        ups = [l for l in chosen[m.prime] if l < m.level]
        if ups:
            up = max(ups)
            rk = S.from_terms(G, [(m.level, 1), (up, m.prime ** (m.e - 1))], m.prime ** m.e)
            tag, size = "2(c)", dim_p(G, m.prime, (up, m.level))
        else:
            rk = S.convex_plus(G, m.level, m.prime ** (m.e - 1))
            tag, size = "2(d)", dim_p(G, m.prime, (0, m.level))
        out.append((f"{tag} at ({r},{s})", K == rk, f"{K} vs {rk}"))
        # 2(e)/(f): the index of H in K
        idx = K.index_of(m.H)
        want = _power(m.prime, size)
        out.append((f"2({'e' if ups else 'f'}) at ({r},{s})", idx == want, f"{idx} vs {want}"))
    return out


def verify_claim1(G: GroupSpec, rng: random.Random, trials: int = 20) -> list[tuple[str, bool, str]]:
    """Sum/intersection identities for groups D + mG on random data."""
    S = StaircaseSubgroup
    out = []
    for _ in range(trials):
        n, m = rng.randint(1, 36), rng.randint(1, 36)
        left, right = S.multiple(G, n).sum(S.multiple(G, m)), S.multiple(G, math.gcd(n, m))
        out.append((f"1(a) n={n} m={m}", left == right, f"{left} vs {right}"))
        level = rng.randint(0, G.k)
        ms = [rng.randint(1, 12) for _ in range(rng.randint(1, 3))]
        left = intersect_all(G, (S.convex_plus(G, level, x) for x in ms))
        right = S.convex_plus(G, level, math.lcm(*ms))
        out.append((f"1(b) D{level} m={ms}", left == right, f"{left} vs {right}"))
        t = rng.randint(1, G.k + 1)
        levels = sorted(rng.sample(range(G.k + 1), min(t, G.k + 1)), reverse=True)  # increasing subgroups
        ms = [rng.randint(1, 12) for _ in levels]
        left = intersect_all(G, (S.convex_plus(G, l, x) for l, x in zip(levels, ms)))
        terms, acc = [], 1
        for l, x in zip(levels, ms):
            terms.append((l, acc))
            acc = math.lcm(acc, x)
        right = S.from_terms(G, terms, acc)
        out.append((f"1(c) levels={levels} m={ms}", left == right, f"{left} vs {right}"))
    return out


def dp_family(G: GroupSpec, depth: int, M: int) -> tuple[list[FamilyMember], dict[int, list[int]], dict[int, list]]:
    """Pick depth - 1 congruence rows from finite capacities (prime by prime, top-down)."""
    want = depth - 1
    taken: dict[int, list[int]] = {}
    capacities: dict[int, list] = {}
    total = 0
    primes = sorted(set(_primes(6)) | set(relevant_primes(G)))
    for p in primes:
        if total >= want:
            break
        capacities[p] = jump_capacities(G, p)
        js = capacity_jumps(G, p, M)[: want - total]
        if js:
            taken[p] = js
            total += len(js)
    if total < want:
        caps = "; ".join(f"p={p}: " + ", ".join(f"D{l}:{c}" for l, c in cs) for p, cs in capacities.items())
        raise PatternError(f"depth {depth} unrealizable at {M} columns (at most {total + 1}); capacities {caps}")
    return jump_family(G, taken), taken, capacities


def construct_dp_witness(G: GroupSpec, depth_budget: int, M: int) -> Pattern:
    """Congruence rows x == a mod D_i + p^e G plus one order row of disjoint intervals."""
    G.require_computable()
    if depth_budget < 1:
        raise PatternError("depth must be at least 1")
    if G.k == 0:
        raise PatternError("trivial group has no patterns")
    family, taken, _ = dp_family(G, depth_budget, M)
    notes = []
    bad = [c for c in verify_claims(G, family, taken) if not c[1]]
    if bad:
        raise PatternError("claim identities failed: " + "; ".join(f"{n}: {d}" for n, _, d in bad))
    rows = []
    if family:
        pat = construct_inp_from_chain(G, [m.H for m in family], M)
        rows = pat.rows
        notes += [f"H({m.i},{m.j}) = {m.H} (p={m.prime}, e={m.e})" for m in family]
    # the solution cosets of all paths are cosets of S; S has a nonzero top coefficient
    S = intersect_all(G, (m.H for m in family))
    L = S.coeffs[0]
    if L == 0:
        raise PatternError("solution cosets do not spread at the top coordinate")
    top = G.unit(1)
    bs = [(2 * L * j) * top for j in range(M + 1)]
    order = Row(
        conj([Order(Term.var("u") - Term.var("x"), "<"), Order(Term.var("x") - Term.var("v"), "<")]),
        ("u", "v"),
        [(bs[j], bs[j + 1]) for j in range(M)],
        2,
    )
    notes.append(f"order row: intervals of length {2 * L} at the top coordinate")
    return Pattern("inp", rows + [order], "x", notes)


def tower_truncation(G: GroupSpec, n: int) -> GroupSpec:
    """Replace the omega tower marker by n copies of its template."""
    if G.omega_tower is None:
        return G
    return GroupSpec(G.components + (G.omega_tower,) * n)


# Transforms

@dataclass
class TransformResult:
    pattern: Pattern
    status: str  # "OK" or "EXPECTED_LIMITATION"
    report: PatternReport
    detail: str = ""


def _special_to_ict(p: Pattern, G: GroupSpec) -> TransformResult:
    if p.kind != "special":
        raise PatternError("special_to_ict needs a special pattern")
    if not check(p, G).valid:
        raise PatternError("input pattern is not valid")
    rows = []
    for row in p.rows:
        if len(row.columns) < 4:
            raise PatternError("special_to_ict needs at least 4 columns (2 per new column)")
        ys = tuple(f"{n}1" for n in row.params)
        zs = tuple(f"{n}2" for n in row.params)
        fy, fz = row.formula, row.formula
        for old, a, b in zip(row.params, ys, zs):
            fy = substitute(fy, old, Term.var(a))
            fz = substitute(fz, old, Term.var(b))
        psi = Or((And((fy, Not(fz))), And((Not(fy), fz))))  # fy <-> not fz
        cols = [row.columns[2 * j] + row.columns[2 * j + 1] for j in range(len(row.columns) // 2)]
        rows.append(Row(psi, ys + zs, cols, row.k))
    out = Pattern("ict", rows, p.var, ["biconditional rows over column pairs (2j, 2j+1)"])
    rep = check(out, G)
    return TransformResult(out, "OK" if rep.valid else "EXPECTED_LIMITATION", rep)


def _split(p: Pattern, G: GroupSpec, cls: type) -> TransformResult:
    if p.kind not in ("ict", "wict"):
        raise PatternError("split rules apply to ict and wict patterns")
    if cls is And and p.kind != "wict":
        raise PatternError("split_conjunction applies to wict patterns only")
    targets = [i for i, r in enumerate(p.rows) if isinstance(r.formula, cls)]
    if not targets:
        raise PatternError(f"no row is a {'conjunction' if cls is And else 'disjunction'}")
    last = check(p, G)
    if not last.valid:
        raise PatternError("input pattern is not valid")
    rows = list(p.rows)
    picked = []
    for i in targets:
        row = rows[i]
        found = False
        for part in row.formula.args:
            cand = Row(part, row.params, row.columns, row.k)
            trial = Pattern(p.kind, rows[:i] + [cand] + rows[i + 1:], p.var)
            rep = check(trial, G)
            if rep.valid:
                rows[i] = cand
                picked.append(f"row {i}: {print_formula(part)}")
                last = rep
                found = True
                break
        if not found:
            out = Pattern(p.kind, rows, p.var, [f"no single part of row {i} keeps the pattern valid"])
            return TransformResult(out, "EXPECTED_LIMITATION", check(out, G), f"row {i}")
    out = Pattern(p.kind, rows, p.var, picked)
    return TransformResult(out, "OK", last, "; ".join(picked))


def transform(p: Pattern, rule: str, G: GroupSpec) -> TransformResult:
    if rule == "special_to_ict":
        return _special_to_ict(p, G)
    if rule == "split_disjunction":
        return _split(p, G, Or)
    if rule == "split_conjunction":
        return _split(p, G, And)
    raise PatternError(f"unknown rule {rule!r}")


# Adversarial two-row candidates from one directed family

_INTERVAL_TEMPLATES = ("x < y", "x <= y")
_COSET_MODULI = ("2G", "4G", "8G")


def _random_element(G: GroupSpec, rng: random.Random, radius: int) -> GroupElement:
    return GroupElement(tuple(Fraction(rng.randint(-radius, radius)) for _ in range(G.k)))


def adversarial_wict(G: GroupSpec, count: int = 100, M: int = 3, seed: int = 0) -> list[Pattern]:
    """Two-row wict candidates whose rows are (negated) instances of one directed family."""
    rng = random.Random(seed)
    out = []
    for n in range(count):
        if n % 2 == 0:
            bases = [parse(rng.choice(_INTERVAL_TEMPLATES)) for _ in range(2)]
        else:
            bases = [parse(f"x == y mod {rng.choice(_COSET_MODULI)}") for _ in range(2)]
        rows = []
        for b in bases:
            f = Not(b) if rng.random() < 0.4 else b
            cols = [(_random_element(G, rng, 12),) for _ in range(M)]
            if rng.random() < 0.5:
                cols.sort(key=lambda c: c[0].coords, reverse=rng.random() < 0.5)
            rows.append(Row(f, ("y",), cols, 2))
        out.append(Pattern("wict", rows, "x", ["interval family" if n % 2 == 0 else "coset family"]))
    return out


def instances_directed(G: GroupSpec, p: Pattern, box_radius: int = 30) -> bool:
    """Every two instance sets (before negation) are nested or disjoint on a box."""
    from .oracle import Box, box_env, eval_vec

    box = Box.default(G, radius=box_radius, den=1)
    env = box_env(G, box, [p.var])
    sets = []
    for row in p.rows:
        base = row.formula.arg if isinstance(row.formula, Not) else row.formula
        r = Row(base, row.params, row.columns, row.k)
        for j in range(p.columns):
            sets.append(eval_vec(r.instance(j, p.var), G, env))
    for a, b in itertools.combinations(sets, 2):
        inter = a & b
        if inter.any() and not ((inter == a).all() or (inter == b).all()):
            return False
    return True


# Pattern files

_TUPLE = re.compile(r"\(([^()]*)\)")


def _parse_elements(text: str) -> tuple[GroupElement, ...]:
    out = []
    for m in _TUPLE.finditer(text):
        coords = [Fraction(c.strip()) for c in m.group(1).split(",") if c.strip()]
        out.append(GroupElement(tuple(coords)))
    return tuple(out)


def parse_pattern(text: str) -> Pattern:
    kind = None
    var = "x"
    rows: list[Row] = []
    cur: dict | None = None

    def flush() -> None:
        if cur is not None:
            if cur.get("cols") is None:
                raise PatternError("row without cols")
            rows.append(Row(cur["formula"], cur["params"], cur["cols"], cur["k"]))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise PatternError(f"line {lineno}: expected 'key: value'")
        key, val = (s.strip() for s in line.split(":", 1))
        if key == "kind":
            kind = val
        elif key == "var":
            var = val
        elif key == "row":
            flush()
            cur = {"formula": parse(val), "params": (), "cols": None, "k": 2}
        elif cur is None:
            raise PatternError(f"line {lineno}: {key} before any row")
        elif key == "params":
            cur["params"] = tuple(s.strip() for s in val.split(",") if s.strip())
        elif key == "k":
            cur["k"] = int(val)
        elif key == "cols":
            cur["cols"] = [_parse_elements(c) for c in val.split("|")]
        else:
            raise PatternError(f"line {lineno}: unknown key {key!r}")
    flush()
    if kind is None:
        raise PatternError("missing kind")
    return Pattern(kind, rows, var)


def format_pattern(p: Pattern) -> str:
    lines = [f"kind: {p.kind}"]
    if p.var != "x":
        lines.append(f"var: {p.var}")
    for r in p.rows:
        lines.append(f"row: {print_formula(r.formula)}")
        lines.append(f"params: {', '.join(r.params)}")
        if p.kind == "inp":
            lines.append(f"k: {r.k}")
        lines.append("cols: " + " | ".join(" ".join(str(g) for g in col) for col in r.columns))
    return "\n".join(lines) + "\n"


def load_pattern(path: str) -> Pattern:
    with open(path) as fh:
        return parse_pattern(fh.read())
