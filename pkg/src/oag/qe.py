"""One-variable quantifier elimination, full elimination, atom classes and directed families.

Elimination of `exists x` works per disjunct of a DNF:

* congruences modulo a staircase with a zero prefix z are split into
  "projection to levels 1..z vanishes" plus a finite-index congruence;
* x-coefficients are scaled to a common L (adding x' in LG);
* every literal then reads pi_l(x' - s) op 0 or x' - s in H (or not in H),
  where pi_l keeps coordinates 1..l;
* the solution set, if nonempty, contains a point just above some lower
  bound b: b + j*one@i + (very negative element of CS(i)) for discrete i,
  b + (tiny positive at level i) for dense i, or b + (very negative element
  of CS(l)) for a non-strict bound at level l.  Without lower bounds the
  point is very negative in G.  Each such symbolic point is evaluated
  literal by literal; positive congruences are merged by the pairwise
  compatibility test, negative ones by enumerating residues.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

from .core import GroupSpec, SpecError, factorization
from .invariants import _effective_components, _rj_prime_levels, dim_p
from .rewrite import _prime_power_parts, eval_atom, expand_derived, staircase_of
from .staircase import StairExpr, StaircaseSubgroup, intersect_all
from .syntax import (
    FALSE,
    TRUE,
    And,
    Cong,
    Exists,
    FalseF,
    Forall,
    Formula,
    Not,
    Or,
    Order,
    Term,
    TrueF,
    conj,
    disj,
    free_vars,
    has_derived,
    iter_atoms,
    negate,
    print_formula,
)


class QEError(SpecError):
    pass


class BudgetExceeded(QEError):
    pass


def default_budget() -> int:
    return int(os.environ.get("OAG_QE_BUDGET", "200000"))


# Internal literals

@dataclass(frozen=True)
class Lvl:
    """pi_level(term) op 0 with op in < <= = > >=."""

    term: Term
    level: int
    op: str


@dataclass(frozen=True)
class Cg:
    """term in H (positive) or term not in H."""

    term: Term
    H: StaircaseSubgroup
    positive: bool


_FLIP = {"<": ">", "<=": ">=", "=": "=", ">": "<", ">=": "<="}


def level_formula(spec: GroupSpec, w: Term, level: int, op: str) -> Formula:
    """pi_level(w) op 0 as a formula over order and congruence atoms."""
    k = spec.k
    if level == 0:
        return TRUE if op in ("<=", ">=", "=") else FALSE
    if level == k:
        if op == "<":
            return Order(w, "<")
        if op == "<=":
            return Order(w, "<=")
        if op == "=":
            return Order(w, "=")
        if op == ">":
            return Order(-w, "<")
        return Order(-w, "<=")
    in_d = Cong(w, StairExpr(((level, 1),), 0))
    if op == "=":
        return in_d
    if op == ">":
        return conj([Order(-w, "<"), Not(in_d)])
    if op == ">=":
        return disj([Order(-w, "<"), in_d])
    if op == "<":
        return conj([Order(w, "<"), Not(in_d)])
    return disj([Order(w, "<"), in_d])


def cong_formula(w: Term, H: StaircaseSubgroup) -> Formula:
    if all(c == 1 for c in H.coeffs):
        return TRUE
    if w.coeffs and all(c < 0 for _, c in w.coeffs):
        w = -w  # same membership, reads better
    return Cong(w, H.to_expr())


# Ground folding

def fold(f: Formula, spec: GroupSpec) -> Formula:
    """Evaluate variable-free atoms and simplify the boolean structure."""
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return negate(fold(f.arg, spec))
    if isinstance(f, And):
        return conj(fold(a, spec) for a in f.args)
    if isinstance(f, Or):
        return disj(fold(a, spec) for a in f.args)
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, fold(f.body, spec))
    if isinstance(f, Cong) and all(c == 1 for c in staircase_of(spec, f.mod).coeffs):
        return TRUE
    if not f.term.variables():
        return TRUE if eval_atom(f, spec, {}) else FALSE
    return f


# Trace

@dataclass
class EliminationStep:
    variable: str
    input: Formula
    output: Formula
    notes: list[str] = field(default_factory=list)


@dataclass
class EliminationTrace:
    input: Formula | None = None
    output: Formula | None = None
    steps: list[EliminationStep] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"input: {print_formula(self.input)}" if self.input is not None else "input: -"]
        for n, s in enumerate(self.steps, start=1):
            out.append(f"step {n}: eliminate {s.variable}")
            out.append(f"  in: {print_formula(s.input)}")
            out.extend(f"  {note}" for note in s.notes)
            out.append(f"  out: {print_formula(s.output)}")
        out.append(f"output: {print_formula(self.output)}" if self.output is not None else "output: -")
        return out

    def replay(self, spec: GroupSpec) -> bool:
        """Re-run every recorded step and compare with the recorded outputs."""
        for s in self.steps:
            if eliminate_exists(Exists(s.variable, s.input), spec) != s.output:
                return False
        return True


# NNF / DNF over internal literals

def _atom_node(a: Formula, x: str, neg: bool, spec: GroupSpec):
    t = a.term
    k = spec.k
    if isinstance(a, Order):
        if not neg:
            return ("lit", Lvl(t, k, a.op))
        if a.op == "<=":
            return ("lit", Lvl(t, k, ">"))
        if a.op == "<":
            return ("lit", Lvl(t, k, ">="))
        return ("or", [("lit", Lvl(t, k, "<")), ("lit", Lvl(t, k, ">"))])
    if isinstance(a, Cong):
        H = staircase_of(spec, a.mod)
        z = H.zero_prefix()
        if z == k:
            return _atom_node(Order(t, "="), x, neg, spec)
        rest = StaircaseSubgroup.from_coeffs(spec, [H.coeffs[z]] * z + list(H.coeffs[z:]))
        whole = all(c == 1 for c in rest.coeffs)
        if not neg:
            parts = []
            if z:
                parts.append(("lit", Lvl(t, z, "=")))
            if not whole:
                parts.append(("lit", Cg(t, rest, True)))
            return ("and", parts)
        parts = []
        if z:
            parts += [("lit", Lvl(t, z, "<")), ("lit", Lvl(t, z, ">"))]
        if not whole:
            parts.append(("lit", Cg(t, rest, False)))
        return ("or", parts)
    raise QEError(f"unexpanded atom {type(a).__name__}; call expand_derived first")


def _nnf(f: Formula, x: str, spec: GroupSpec, neg: bool = False):
    if x not in free_vars(f):
        return ("lit", negate(f) if neg else f)
    if isinstance(f, Not):
        return _nnf(f.arg, x, spec, not neg)
    if isinstance(f, (And, Or)):
        kind = "and" if isinstance(f, And) != neg else "or"
        return (kind, [_nnf(a, x, spec, neg) for a in f.args])
    if isinstance(f, (Exists, Forall)):
        raise QEError("eliminate_exists needs a quantifier-free body")
    return _atom_node(f, x, neg, spec)


def _dnf(node, budget: int) -> list[list]:
    kind, payload = node
    if kind == "lit":
        if isinstance(payload, TrueF):
            return [[]]
        if isinstance(payload, FalseF):
            return []
        return [[payload]]
    if kind == "or":
        out = []
        for child in payload:
            out.extend(_dnf(child, budget))
            if len(out) > budget:
                raise BudgetExceeded(f"DNF exceeds the budget of {budget} disjuncts")
        return out
    out = [[]]
    for child in payload:
        sub = _dnf(child, budget)
        out = [a + b for a in out for b in sub]
        if sum(len(c) for c in out) > budget:
            raise BudgetExceeded(f"DNF exceeds the budget of {budget} literals")
    return out


# Elimination of one existential

@dataclass(frozen=True)
class _Norm:
    """pi_level(x' - s) op 0, or x' - s in H / not in H."""

    s: Term
    level: int = 0
    op: str = ""
    H: StaircaseSubgroup | None = None
    positive: bool = True


def _normalize(lits: list, x: str, spec: GroupSpec) -> tuple[int, list[_Norm]]:
    coefs = [l.term.coeff(x) for l in lits]
    L = 1
    for a in coefs:
        L = L * abs(a) // math.gcd(L, abs(a))
    out = []
    for lit, a in zip(lits, coefs):
        mult = L // abs(a)
        sgn = 1 if a > 0 else -1
        s = -(lit.term.drop(x).scale(mult * sgn))
        if isinstance(lit, Lvl):
            op = lit.op if sgn > 0 else _FLIP[lit.op]
            out.append(_Norm(s, lit.level, op))
        else:
            out.append(_Norm(s, H=lit.H.scale(mult), positive=lit.positive))
    if L > 1:
        out.append(_Norm(Term(), H=StaircaseSubgroup.multiple(spec, L), positive=True))
    return L, out


def _eval_bound(spec: GroupSpec, lit: _Norm, v: Term, kind: str, m: int) -> Formula:
    """Truth of pi_level(v' - s) op 0 at the symbolic point (kind, m) anchored at v."""
    w = v - lit.s
    l, op = lit.level, lit.op
    if kind == "real" or (kind == "below" and l <= m) or (kind == "tiny" and l <= m - 1):
        return level_formula(spec, w, l, op)
    if op == "=":
        return FALSE
    if kind == "below":
        return level_formula(spec, w, m, ">" if op in (">", ">=") else "<=")
    return level_formula(spec, w, m, ">=" if op in (">", ">=") else "<")


def _test_points(spec: GroupSpec, bounds: list[_Norm], congs: list[_Norm]) -> list[tuple[Term, str, int]]:
    """(anchor, kind, level); kind 'below': anchor + very negative element of CS(level),
    'tiny': anchor + arbitrarily small positive element leading at level, 'real': anchor."""
    k = spec.k
    per = [1] * k
    for c in congs:
        for i, ci in enumerate(c.H.coeffs):
            per[i] = per[i] * ci // math.gcd(per[i], ci)
    lowers = [b for b in bounds if b.op in (">", ">=", "=")]
    pts: list[tuple[Term, str, int]] = []
    if not lowers:
        pts.append((Term(), "below", 0))
    for b in lowers:
        for i in range(1, b.level + 1):
            if spec.is_discrete(i):
                for j in range(1, per[i - 1] + 1):
                    pts.append((b.s + Term.one(i, j), "real" if i == k else "below", i))
            else:
                pts.append((b.s, "tiny", i))
        if b.op in (">=", "="):
            pts.append((b.s, "real" if b.level == k else "below", b.level))
    seen = set()
    out = []
    for p in pts:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _congruence_clause(spec: GroupSpec, v: Term, free_level: int, pos: list[_Norm], neg: list[_Norm], budget: int) -> Formula:
    """Exists e in CS(free_level) with v + e meeting every positive and avoiding every negative congruence."""
    D = StaircaseSubgroup.convex(spec, free_level)
    if not neg:
        return conj(cong_formula(v - p.s, p.H.sum(D)) for p in pos)
    fine = intersect_all(spec, [D] + [n.H for n in neg])
    idx = D.index_of(fine)
    if not idx.is_finite or idx.value > budget:
        raise BudgetExceeded(f"negated congruences need {idx} residue cases")
    out = []
    for r in D.coset_representatives(fine):
        rt = v + Term.element(r)
        clause = [Not(cong_formula(rt - n.s, n.H)) for n in neg]
        clause += [cong_formula(p.s - rt, p.H.sum(fine)) for p in pos]
        out.append(conj(clause))
    return disj(out)


def _eliminate_conjunct(spec: GroupSpec, x: str, lits: list, budget: int, notes: list[str]) -> Formula:
    keep = [l for l in lits if isinstance(l, Formula)]
    xl = [l for l in lits if not isinstance(l, Formula)]
    free_part = conj(keep)
    if not xl:
        return free_part
    L, norm = _normalize(xl, x, spec)
    bounds = [n for n in norm if n.H is None]
    congs = [n for n in norm if n.H is not None]
    pos = [c for c in congs if c.positive]
    neg = [c for c in congs if not c.positive]

    # exact value available: substitute
    for b in bounds:
        if b.level == spec.k and b.op == "=":
            notes.append(f"L={L}; substitute x' = {b.s}")
            parts = [free_part]
            for o in bounds:
                parts.append(level_formula(spec, b.s - o.s, o.level, o.op))
            for c in congs:
                f = cong_formula(b.s - c.s, c.H)
                parts.append(f if c.positive else negate(f))
            return conj(parts)

    side = []
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            side.append(cong_formula(pos[i].s - pos[j].s, pos[i].H.sum(pos[j].H)))
    pts = _test_points(spec, bounds, congs)
    notes.append(f"L={L}; {len(bounds)} bounds, {len(pos)} positive and {len(neg)} negated congruences; {len(pts)} test points")
    cases = []
    for v, kind, m in pts:
        free_level = spec.k if kind == "real" else (m if kind == "below" else m - 1)
        parts = [_eval_bound(spec, b, v, kind, m) for b in bounds]
        if any(isinstance(p, FalseF) for p in parts):
            continue
        parts.append(_congruence_clause(spec, v, free_level, pos, neg, budget))
        cases.append(fold(conj(parts), spec))
        if sum(_size(c) for c in cases) > budget:
            raise BudgetExceeded(f"elimination output exceeds the budget of {budget} atoms")
    return conj([free_part] + side + [disj(cases)])


def _size(f: Formula) -> int:
    return sum(1 for _ in iter_atoms(f))


def eliminate_exists(f: Formula, spec: GroupSpec, trace: EliminationTrace | None = None, budget: int | None = None) -> Formula:
    """Quantifier-free equivalent of `exists x. body` with body quantifier-free over base atoms."""
    if not isinstance(f, Exists):
        raise QEError("eliminate_exists needs a formula of the form exists x. body")
    spec.require_computable()
    budget = default_budget() if budget is None else budget
    if has_derived(f):
        raise QEError("unexpanded derived atoms; call expand_derived first")
    x, body = f.var, f.body
    notes: list[str] = []
    if x not in free_vars(body):
        out = fold(body, spec)
    else:
        conjuncts = _dnf(_nnf(body, x, spec), budget)
        notes.append(f"{len(conjuncts)} disjuncts")
        out = fold(disj(_eliminate_conjunct(spec, x, c, budget, notes) for c in conjuncts), spec)
    if trace is not None:
        trace.steps.append(EliminationStep(x, body, out, notes))
    return out


def eliminate_all(f: Formula, spec: GroupSpec, trace: EliminationTrace | None = None, budget: int | None = None) -> Formula:
    """Quantifier-free equivalent of f, eliminating innermost quantifiers first."""
    spec.require_computable()
    if trace is not None and trace.input is None:
        trace.input = f
    if has_derived(f):
        f = expand_derived(f, spec)

    def go(g: Formula) -> Formula:
        if isinstance(g, Exists):
            return eliminate_exists(Exists(g.var, go(g.body)), spec, trace, budget)
        if isinstance(g, Forall):
            inner = eliminate_exists(Exists(g.var, negate(go(g.body))), spec, trace, budget)
            return fold(negate(inner), spec)
        if isinstance(g, Not):
            return Not(go(g.arg)) if not isinstance(g.arg, (TrueF, FalseF)) else negate(g.arg)
        if isinstance(g, And):
            return And(tuple(go(a) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(go(a) for a in g.args))
        return g

    if all(not isinstance(g, (Exists, Forall)) for g in _subformulas(f)):
        out = f
    else:
        out = fold(go(f), spec)
    if trace is not None:
        trace.output = out
    return out


def _subformulas(f: Formula):
    yield f
    if isinstance(f, Not):
        yield from _subformulas(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from _subformulas(a)
    elif isinstance(f, (Exists, Forall)):
        yield from _subformulas(f.body)


def language_ok(f: Formula) -> bool:
    """Quantifier-free and built from order and congruence atoms only."""
    return all(not isinstance(g, (Exists, Forall)) for g in _subformulas(f)) and all(
        isinstance(a, (Order, Cong)) for a in iter_atoms(f)
    )


# Atom classes and directed families

@dataclass(frozen=True)
class AtomClass:
    tag: str  # "order_convex", "congruence" or "NA"
    prime: int | None = None
    level: int | None = None
    index: object = None

    def __str__(self) -> str:
        if self.tag == "congruence":
            return f"congruence({self.prime}, D{self.level})"
        return self.tag


def _class_bottom(spec: GroupSpec, p: int, level: int) -> int:
    """Largest level of the class of `level` in the p-jump chain (finite p-dimension gaps)."""
    comps = _effective_components(spec)
    chain = sorted(_rj_prime_levels(comps, p) | {0})
    bottom = level
    for nxt in chain:
        if nxt <= bottom:
            continue
        if dim_p(spec, p, (bottom, nxt)).is_finite:
            bottom = nxt
        else:
            break
    return bottom


def _cong_parts(spec: GroupSpec, H: StaircaseSubgroup) -> list[tuple[int | None, int, int]]:
    """(prime or None for a plain convex piece, level, exponent) for each prime-power piece."""
    out = []
    for part in _prime_power_parts(spec, H):
        if part.tail == 0:
            out.append((None, part.terms[0][0], 0))
            continue
        ((p, e),) = factorization(part.tail)
        level = part.terms[0][0] if part.terms else spec.k
        out.append((p, level, e))
    return out


def classify_atom(a: Formula, spec: GroupSpec) -> AtomClass:
    if isinstance(a, Order):
        return AtomClass("order_convex")
    if not isinstance(a, Cong):
        raise QEError(f"cannot classify {type(a).__name__}")
    H = staircase_of(spec, a.mod)
    idx = StaircaseSubgroup.whole(spec).index_of(H)
    if idx.is_finite:
        return AtomClass("NA", index=idx)
    for p, level, e in _cong_parts(spec, H):
        if p is None:
            continue
        if not dim_p(spec, p, (0, level)).is_finite:
            return AtomClass("congruence", p, _class_bottom(spec, p, level), idx)
    # only a convex piece has infinite index: a coset of a convex subgroup
    return AtomClass("order_convex", index=idx)


@dataclass
class Family:
    kind: str  # "order" or "congruence"
    prime: int | None
    level: int | None
    atoms: list[Formula]
    generators: list[Formula]  # instance formulas; their instances are nested or disjoint

    def label(self) -> str:
        return "order" if self.kind == "order" else f"congruence({self.prime}, D{self.level})"


def _order_generators(spec: GroupSpec, t: Term, x: str, level: int) -> list[Formula]:
    """Initial segments pi_level(t) < 0 and <= 0 with t increasing in x."""
    if t.coeff(x) < 0:
        t = -t
    return [level_formula(spec, t, level, "<"), level_formula(spec, t, level, "<=")]


def directed_family_partition(f: Formula, spec: GroupSpec, x: str = "x") -> tuple[list[Family], list[Formula]]:
    """Split the x-atoms of f into directed families plus NA atoms.

    Order atoms and cosets of convex subgroups join one order family of
    initial segments.  A congruence with modulus pieces D_l + p^e G joins
    the family of (p, bottom of the class of l), the class being the jumps a
    finite p-dimension apart; pieces of finite index are NA.
    """
    order = Family("order", None, None, [], [])
    congs: dict[tuple[int, int], Family] = {}
    na: list[Formula] = []
    for a in dict.fromkeys(iter_atoms(f)):
        if x not in a.term.variables():
            continue
        if isinstance(a, Order):
            order.atoms.append(a)
            order.generators += _order_generators(spec, a.term, x, spec.k)
            continue
        if not isinstance(a, Cong):
            raise QEError("directed families need base atoms")
        cls = classify_atom(a, spec)
        if cls.tag == "NA":
            na.append(a)
            continue
        H = staircase_of(spec, a.mod)
        placed = False
        for p, level, e in _cong_parts(spec, H):
            if p is None:
                order.generators += _order_generators(spec, a.term, x, level)
                if a not in order.atoms:
                    order.atoms.append(a)
                placed = True
                continue
            piece = StairExpr((), p ** e) if level == spec.k else StairExpr(((level, 1),), p ** e)
            if dim_p(spec, p, (0, level)).is_finite:
                na.append(Cong(a.term, piece))  # finite-index piece
                placed = True
                continue
            bottom = _class_bottom(spec, p, level)
            fam = congs.setdefault((p, bottom), Family("congruence", p, bottom, [], []))
            if a not in fam.atoms:
                fam.atoms.append(a)
            mod = StairExpr((), p ** e) if bottom == spec.k else StairExpr(((bottom, 1),), p ** e)
            if bottom == level or not spec.computable:
                fam.generators.append(Cong(a.term, mod))
            else:
                # the piece is a finite union of cosets of the bottom-level group
                big, small = staircase_of(spec, piece), staircase_of(spec, mod)
                for r in big.coset_representatives(small):
                    fam.generators.append(Cong(a.term - Term.element(r), mod))
            placed = True
        if not placed:
            na.append(a)
    fams = ([order] if order.atoms else []) + [congs[key] for key in sorted(congs)]
    return fams, na
