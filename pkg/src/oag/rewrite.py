"""Formula evaluation and the rewrites that remove derived atoms and composite moduli."""
from __future__ import annotations

import itertools
from fractions import Fraction

from .core import (
    EMPTY,
    A_n_of,
    ConvexSubgroup,
    F_n_of,
    GroupElement,
    GroupSpec,
    SpecError,
    factorization,
    subgroup_leq,
    valuation,
)
from .invariants import regular_jumps
from .staircase import StairExpr, StaircaseSubgroup
from .syntax import (
    TRUE,
    AnAtom,
    And,
    Cong,
    DAtom,
    EAtom,
    Exists,
    FalseF,
    FnAtom,
    Forall,
    Formula,
    MAtom,
    Not,
    Or,
    Order,
    Term,
    TrueF,
    conj,
    disj,
    map_atoms,
)


class RewriteError(ValueError):
    pass


_STAIR_CACHE: dict[tuple[int, StairExpr], StaircaseSubgroup] = {}


def staircase_of(spec: GroupSpec, expr: StairExpr) -> StaircaseSubgroup:
    key = (id(spec), expr)
    h = _STAIR_CACHE.get(key)
    if h is None or h.spec is not spec:
        h = StaircaseSubgroup.from_expr(spec, expr)
        _STAIR_CACHE[key] = h
    return h


# Direct semantics of derived predicates

def semantic_M(spec: GroupSpec, g: GroupElement, k: int) -> bool:
    i = g.leading_index()
    return i > 0 and spec.is_discrete(i) and g.coords[i - 1] == k


def _residues(spec: GroupSpec, m: int, n: int) -> list[Fraction]:
    comp = spec.component(m)
    return [Fraction(r) for r in range(comp.strip(n))] if comp.realization is not None else [Fraction(0)]


def semantic_E(spec: GroupSpec, g: GroupElement, n: int, k: int) -> bool:
    """exists h: F_n(g) = A_n(h), M_1(h), F_n(g - k h) strictly inside F_n(g).

    The search is exact: h must lead at a discrete coordinate with value 1,
    A_n(h) only depends on that coordinate, and F_n(g - k h) only depends on
    the lower coordinates of h modulo n.
    """
    target = F_n_of(spec, g, n)
    if target is EMPTY:
        return False
    for i in range(1, spec.k + 1):
        if not spec.is_discrete(i):
            continue
        lead = GroupElement(tuple(Fraction(int(j == i - 1)) for j in range(spec.k)))
        if A_n_of(spec, lead, n) != target:
            continue
        lower = [_residues(spec, m, n) for m in range(i + 1, spec.k + 1)]
        for combo in itertools.product(*lower):
            h = GroupElement(tuple(Fraction(0) for _ in range(i - 1)) + (Fraction(1),) + tuple(combo))
            f = F_n_of(spec, g - k * h, n)
            if subgroup_leq(f, target) and f != target:
                return True
    return False


def semantic_D(spec: GroupSpec, g: GroupElement, p: int, r: int, i: int) -> bool:
    q = p ** r
    if StaircaseSubgroup.multiple(spec, q).contains(g):
        return True
    a = F_n_of(spec, p ** (r - i) * g, q)
    b = F_n_of(spec, g, q)
    return subgroup_leq(a, b) and a != b


def _validate_derived(a: Formula) -> None:
    if isinstance(a, (AnAtom, FnAtom)) and a.n < 2:
        raise RewriteError("A[n] and F[n] need n >= 2")
    if isinstance(a, MAtom) and a.k == 0:
        raise RewriteError("M[k] needs k != 0")
    if isinstance(a, EAtom) and not (a.n >= 2 and 0 < a.k < a.n):
        raise RewriteError("E[n,k] needs n >= 2 and 0 < k < n")
    if isinstance(a, DAtom):
        from .core import prime_factors

        if prime_factors(a.p) != (a.p,) or not 0 < a.i < a.r:
            raise RewriteError("D[p,r,i] needs p prime and 0 < i < r")


def eval_atom(a: Formula, spec: GroupSpec, env: dict[str, GroupElement]) -> bool:
    if isinstance(a, Order):
        s = a.term.value(spec, env).sign()
        if a.op == "<=":
            return s <= 0
        if a.op == "<":
            return s < 0
        return s == 0
    if isinstance(a, Cong):
        return staircase_of(spec, a.mod).contains(a.term.value(spec, env))
    _validate_derived(a)
    g = a.term.value(spec, env)
    if isinstance(a, AnAtom):
        return A_n_of(spec, g, a.n) == ConvexSubgroup(a.level)
    if isinstance(a, FnAtom):
        return F_n_of(spec, g, a.n) == ConvexSubgroup(a.level)
    if isinstance(a, MAtom):
        return semantic_M(spec, g, a.k)
    if isinstance(a, EAtom):
        return semantic_E(spec, g, a.n, a.k)
    if isinstance(a, DAtom):
        return semantic_D(spec, g, a.p, a.r, a.i)
    raise TypeError(a)


def evaluate(f: Formula, spec: GroupSpec, env: dict[str, GroupElement] | None = None) -> bool:
    """Truth of a quantifier-free formula under an assignment."""
    env = env or {}
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Not):
        return not evaluate(f.arg, spec, env)
    if isinstance(f, And):
        return all(evaluate(a, spec, env) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, spec, env) for a in f.args)
    if isinstance(f, (Exists, Forall)):
        raise SpecError("evaluate handles quantifier-free formulas; eliminate quantifiers first")
    return eval_atom(f, spec, env)


# Composite moduli

def _prime_power_parts(spec: GroupSpec, H: StaircaseSubgroup) -> list[StairExpr]:
    """H as an intersection of convex subgroups and D_l + p^e G pieces, promoted to jumps."""
    k = spec.k
    c = H.coeffs
    z = H.zero_prefix()
    parts: list[StairExpr] = []
    if z > 0:
        parts.append(StairExpr(((z, 1),), 0))
    primes = sorted({p for ci in c if ci for p, _ in factorization(ci)})
    for p in primes:
        rj = set(regular_jumps(spec, p).levels()) | {0}
        exps = [valuation(ci, p) if ci else None for ci in c]
        seen: set[tuple[int, int]] = set()
        for l in range(max(z, 1), k + 1):
            e = exps[l - 1]
            if not e:
                continue
            if l < k and exps[l] == e:
                continue  # not a block boundary
            promoted = max(j for j in rj if j <= l)
            if promoted == 0:
                continue  # G + p^e G = G
            if (promoted, e) in seen:
                continue
            seen.add((promoted, e))
            if promoted == k:
                parts.append(StairExpr((), p ** e))
            else:
                parts.append(StairExpr(((promoted, 1),), p ** e))
    return parts


def expand_composite_modulus(f: Formula, spec: GroupSpec) -> Formula:
    """Split congruence moduli into prime-power pieces D + p^e G with D a regular jump."""

    def rw(a: Formula) -> Formula:
        if not isinstance(a, Cong):
            return a
        H = staircase_of(spec, a.mod)
        parts = _prime_power_parts(spec, H)
        if len(parts) == 1 and parts[0] == a.mod:
            return a
        atoms = [Cong(a.term, p) for p in parts]
        if not atoms:
            return TRUE
        return atoms[0] if len(atoms) == 1 else And(tuple(atoms))

    return map_atoms(f, rw)


# Derived atoms

def _jump_successor(spec: GroupSpec, n: int, level: int, what: str) -> int:
    rj = regular_jumps(spec, n)
    if ConvexSubgroup(level) not in rj:
        raise RewriteError(f"{what}: D{level} is not among the {n}-regular jumps (jumps: {rj})")
    return rj.successor(ConvexSubgroup(level)).level


def _cong(t: Term, level: int, n: int, spec: GroupSpec) -> Formula:
    """t == 0 mod D_level + nG (n = 0: mod D_level); trivial pieces become true."""
    if level == 0 or n == 1:
        return TRUE
    if level == spec.k and n:
        return Cong(t, StairExpr((), n))
    return Cong(t, StairExpr(((level, 1),), n))


def _expand_atom(a: Formula, spec: GroupSpec) -> Formula:
    if not isinstance(a, (AnAtom, FnAtom, MAtom, EAtom, DAtom)):
        return a
    _validate_derived(a)
    t = a.term
    k = spec.k
    discrete = [l for l in range(1, k + 1) if spec.is_discrete(l)]
    if isinstance(a, AnAtom):
        succ = _jump_successor(spec, a.n, a.level, "A[n](x) = D")
        return conj([Not(_cong(t, a.level, 0, spec)), _cong(t, succ, 0, spec)])
    if isinstance(a, FnAtom):
        succ = _jump_successor(spec, a.n, a.level, "F[n](x) = D")
        return conj([Not(_cong(t, a.level, a.n, spec)), _cong(t, succ, a.n, spec)])
    if isinstance(a, MAtom):
        return disj([_cong(t - Term.one(l, a.k), l, 0, spec) for l in discrete])
    if isinstance(a, EAtom):
        out = []
        for l in discrete:
            succ = _jump_successor(spec, a.n, l, "E[n,k]")
            out.append(conj([_cong(t, succ, a.n, spec), _cong(t - Term.one(l, a.k), l, a.n, spec)]))
        return disj(out)
    if isinstance(a, DAtom):
        p, r, i = a.p, a.r, a.i
        out = [_cong(t, k, p ** r, spec)]
        rj = regular_jumps(spec, p)
        for delta in rj.jumps:
            succ = rj.successor(delta).level
            out.append(conj([
                _cong(t, delta.level, p ** i, spec),
                _cong(t, succ, p ** r, spec),
                Not(_cong(t, delta.level, p ** r, spec)),
            ]))
        return disj(out)
    raise TypeError(a)


def expand_derived(f: Formula, spec: GroupSpec) -> Formula:
    """Replace derived atoms by quantifier-free combinations of base atoms."""
    if spec.omega_tower is not None:
        raise RewriteError("derived atoms need a finite spec")
    return map_atoms(f, lambda a: _expand_atom(a, spec))


def only_base_atoms(f: Formula) -> bool:
    from .syntax import iter_atoms

    return all(isinstance(a, (Order, Cong)) for a in iter_atoms(f))
