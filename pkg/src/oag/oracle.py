"""Brute-force ground truth by enumeration.

Nothing here calls the staircase, solver or qe code: subgroup membership,
order, quotients and one-variable existentials are recomputed from the
syntax tree and the component realizations.  Values are held as int64
numerator arrays over a fixed denominator per coordinate.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import EMPTY, ConvexSubgroup, GroupElement, GroupSpec, SpecError
from .staircase import StairExpr
from .syntax import (
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
    free_vars,
    iter_atoms,
)


class OracleRefusal(RuntimeError):
    """Raised instead of silently truncating an enumeration."""


def max_enum() -> int:
    return int(os.environ.get("OAG_MAX_ENUM", "4000000"))


# Component facts, recomputed locally

def _kind(spec: GroupSpec, i: int) -> tuple[str, frozenset[int]]:
    real = spec.component(i).realization
    if real is None:
        raise SpecError("oracle needs realized components")
    if real.is_rationals:
        return "Q", frozenset()
    if not real.invertible_primes:
        return "Z", frozenset()
    return "Zinv", frozenset(real.invertible_primes)


def _strip_primes(m: int, primes: frozenset[int]) -> int:
    for p in primes:
        while m % p == 0:
            m //= p
    return m


def coordinate_moduli(spec: GroupSpec, expr: StairExpr) -> list[int]:
    """Per-coordinate multipliers of a staircase written as a sum of terms."""
    k = spec.k
    out = []
    for i in range(1, k + 1):
        m = expr.tail
        for level, mult in expr.terms:
            if i > level:
                m = math.gcd(m, mult)
        out.append(m)
    return out


def effective_moduli(spec: GroupSpec, expr: StairExpr) -> list[int]:
    """Multipliers with the primes invertible in each component removed (0 kept)."""
    out = []
    for i, m in enumerate(coordinate_moduli(spec, expr), start=1):
        kind, primes = _kind(spec, i)
        if m == 0:
            out.append(0)
        elif kind == "Q":
            out.append(1)
        else:
            out.append(_strip_primes(m, primes))
    return out


def member(spec: GroupSpec, expr: StairExpr, g: GroupElement) -> bool:
    """Scalar membership test g in the subgroup written by expr."""
    for i, (m, v) in enumerate(zip(effective_moduli(spec, expr), g.coords), start=1):
        kind, primes = _kind(spec, i)
        if m == 0:
            if v != 0:
                return False
            continue
        if kind == "Q":
            continue
        den = _strip_primes(v.denominator, primes)
        if den != 1:
            raise SpecError(f"{v} is not in component {i}")
        if v.numerator % m:
            return False
    return True


# Boxes

@dataclass(frozen=True)
class Box:
    """Per coordinate: values n/den with lo <= n/den <= hi."""

    ranges: tuple[tuple[int, int, int], ...]

    @staticmethod
    def default(spec: GroupSpec, radius: int = 50, den: int = 2) -> Box:
        rs = []
        for i in range(1, spec.k + 1):
            kind, primes = _kind(spec, i)
            if kind == "Z":
                d = 1
            elif kind == "Q":
                d = den
            else:
                d = min(primes)
            rs.append((-radius, radius, d))
        return Box(tuple(rs))

    def values(self, i: int) -> np.ndarray:
        lo, hi, d = self.ranges[i]
        return np.arange(lo * d, hi * d + 1, dtype=np.int64)

    def denominator(self, i: int) -> int:
        return self.ranges[i][2]

    def size(self) -> int:
        return math.prod((hi - lo) * d + 1 for lo, hi, d in self.ranges)

    def elements(self) -> list[GroupElement]:
        if self.size() > max_enum():
            raise OracleRefusal(f"box of size {self.size()} exceeds OAG_MAX_ENUM={max_enum()}")
        axes = [[Fraction(int(n), self.ranges[i][2]) for n in self.values(i)] for i in range(len(self.ranges))]
        return [GroupElement(c) for c in itertools.product(*axes)]


def parse_box(spec: GroupSpec, text: str) -> Box:
    """`R` or `R/D`: radius R, denominator D for dense components."""
    if "/" in text:
        r, d = text.split("/", 1)
        return Box.default(spec, int(r), int(d))
    return Box.default(spec, int(text))


# Vectorised environments

@dataclass
class VecEnv:
    """Assignments for several variables at once; arrays[var][i] holds numerators at dens[i]."""

    dens: list[int]
    arrays: dict[str, list[np.ndarray]]
    size: int

    def rescale(self, dens: list[int]) -> VecEnv:
        out = {}
        for v, coords in self.arrays.items():
            out[v] = [c * (nd // od) for c, nd, od in zip(coords, dens, self.dens)]
        return VecEnv(list(dens), out, self.size)

    def element(self, var: str, idx: int) -> GroupElement:
        return GroupElement(tuple(Fraction(int(c[idx]), d) for c, d in zip(self.arrays[var], self.dens)))


def box_env(spec: GroupSpec, box: Box, variables: Sequence[str], extra_den: Sequence[int] | None = None) -> VecEnv:
    """All assignments of the variables to box elements (last variable fastest)."""
    k = spec.k
    per_var = box.size()
    total = per_var ** len(variables)
    if total > max_enum():
        raise OracleRefusal(f"{total} assignments exceed OAG_MAX_ENUM={max_enum()}")
    dens = [box.denominator(i) * (extra_den[i] if extra_den else 1) for i in range(k)]
    axes = [box.values(i) for i in range(k)]
    grids = np.meshgrid(*axes, indexing="ij") if k else []
    flat = [g.reshape(-1) for g in grids]  # one box element per row
    nvar = len(variables)
    arrays: dict[str, list[np.ndarray]] = {}
    for vi, v in enumerate(variables):
        reps_before = per_var ** vi
        reps_after = per_var ** (nvar - vi - 1)
        coords = []
        for i in range(k):
            base = np.repeat(flat[i], reps_after)
            base = np.tile(base, reps_before)
            coords.append(base * (dens[i] // box.denominator(i)))
        arrays[v] = coords
    return VecEnv(dens, arrays, total if variables else 1)


def _term_dens(t: Term) -> list[int]:
    if t.const is None:
        return []
    return [c.denominator for c in t.const]


def formula_dens(spec: GroupSpec, f: Formula) -> list[int]:
    out = [1] * spec.k
    for a in iter_atoms(f):
        for i, d in enumerate(_term_dens(a.term)):
            out[i] = out[i] * d // math.gcd(out[i], d)
    return out


def term_values(spec: GroupSpec, t: Term, env: VecEnv) -> list[np.ndarray]:
    k = spec.k
    out = []
    for i in range(k):
        den = env.dens[i]
        acc = np.zeros(env.size, dtype=np.int64)
        for v, c in t.coeffs:
            if v not in env.arrays:
                raise SpecError(f"unbound variable {v}")
            acc = acc + c * env.arrays[v][i]
        if t.const is not None:
            q = t.const[i] * den
            if q.denominator != 1:
                raise SpecError("environment denominator too small for a literal")
            acc = acc + int(q)
        for l, m in t.ones:
            if l == i + 1:
                acc = acc + m * den
        if t.scalar and i == 0:
            if k != 1:
                raise SpecError("bare integer constant in a multi-component group")
            acc = acc + t.scalar * den
        out.append(acc)
    return out


def _lex_sign(vals: list[np.ndarray], size: int) -> np.ndarray:
    sign = np.zeros(size, dtype=np.int8)
    open_ = np.ones(size, dtype=bool)
    for v in vals:
        s = np.sign(v).astype(np.int8)
        hit = open_ & (s != 0)
        sign[hit] = s[hit]
        open_ &= s == 0
    return sign


def _member_vec(spec: GroupSpec, expr: StairExpr, vals: list[np.ndarray], dens: list[int]) -> np.ndarray:
    ok = np.ones(vals[0].shape if vals else (1,), dtype=bool)
    for i, m in enumerate(effective_moduli(spec, expr), start=1):
        kind, primes = _kind(spec, i)
        v = vals[i - 1]
        if m == 0:
            ok &= v == 0
        elif kind == "Q":
            continue
        else:
            # v/den in m*A: den is a unit (product of invertible primes or 1)
            ok &= v % m == 0
    return ok


def eval_vec(f: Formula, spec: GroupSpec, env: VecEnv) -> np.ndarray:
    """Truth of a quantifier-free formula on every assignment of env."""
    if isinstance(f, TrueF):
        return np.ones(env.size, dtype=bool)
    if isinstance(f, FalseF):
        return np.zeros(env.size, dtype=bool)
    if isinstance(f, Not):
        return ~eval_vec(f.arg, spec, env)
    if isinstance(f, And):
        out = np.ones(env.size, dtype=bool)
        for a in f.args:
            out &= eval_vec(a, spec, env)
        return out
    if isinstance(f, Or):
        out = np.zeros(env.size, dtype=bool)
        for a in f.args:
            out |= eval_vec(a, spec, env)
        return out
    if isinstance(f, Order):
        s = _lex_sign(term_values(spec, f.term, env), env.size)
        if f.op == "<=":
            return s <= 0
        if f.op == "<":
            return s < 0
        return s == 0
    if isinstance(f, Cong):
        # numerators sit over a unit denominator, so v/den in mA iff m | v
        return _member_vec(spec, f.mod, term_values(spec, f.term, env), env.dens)
    raise SpecError(f"oracle cannot evaluate {type(f).__name__}; expand derived atoms first")


def env_for(spec: GroupSpec, f: Formula, box: Box, variables: Sequence[str]) -> VecEnv:
    return box_env(spec, box, variables, formula_dens(spec, f))


def enumerate_sat(f: Formula, spec: GroupSpec, box: Box, variables: Sequence[str] | None = None) -> list[dict[str, GroupElement]]:
    """All box assignments satisfying f, in enumeration order."""
    spec.require_computable()
    variables = sorted(free_vars(f)) if variables is None else list(variables)
    env = env_for(spec, f, box, variables)
    if isinstance(f, Exists) and all(not isinstance(a, (Exists, Forall)) for a in [f.body]):
        mask = decide_exists(f, spec, env)
    else:
        mask = eval_vec(f, spec, env)
    idx = np.nonzero(mask)[0]
    return [{v: env.element(v, int(j)) for v in variables} for j in idx]


# One existential quantifier, decided exactly

_F, _T, _P = 0, 1, 2


def _truth_table(body: Formula, atoms: list[Formula]) -> np.ndarray:
    """tt[mask] = truth of body when atom j has truth bit j of mask."""
    nat = len(atoms)
    masks = np.arange(2 ** nat)
    pos = {a: j for j, a in enumerate(atoms)}

    def ev(f: Formula) -> np.ndarray:
        if isinstance(f, TrueF):
            return np.ones(masks.shape, dtype=bool)
        if isinstance(f, FalseF):
            return np.zeros(masks.shape, dtype=bool)
        if isinstance(f, Not):
            return ~ev(f.arg)
        if isinstance(f, And):
            out = np.ones(masks.shape, dtype=bool)
            for a in f.args:
                out &= ev(a)
            return out
        if isinstance(f, Or):
            out = np.zeros(masks.shape, dtype=bool)
            for a in f.args:
                out |= ev(a)
            return out
        if isinstance(f, (Order, Cong)):
            return ((masks >> pos[f]) & 1).astype(bool)
        raise SpecError(f"oracle cannot decide {type(f).__name__}")

    return ev(body)


def _digits(codes: np.ndarray, nat: int) -> np.ndarray:
    """codes (...,) in base 3 -> (..., nat) digits."""
    out = np.empty(codes.shape + (nat,), dtype=np.int8)
    c = codes.copy()
    for j in range(nat):
        out[..., j] = c % 3
        c //= 3
    return out


def _final_truth(atoms: list[Formula], tt: np.ndarray) -> np.ndarray:
    """truth of body for every combined status code (pending resolved)."""
    nat = len(atoms)
    codes = np.arange(3 ** nat)
    digits = _digits(codes, nat)
    bits = np.zeros(codes.shape, dtype=np.int64)
    for j, a in enumerate(atoms):
        d = digits[:, j]
        if isinstance(a, Order):
            pend = a.op in ("<=", "=")
        else:
            pend = True
        val = (d == _T) | ((d == _P) & pend)
        bits |= val.astype(np.int64) << j
    return tt[bits]


def _merge_table(nat: int) -> np.ndarray:
    codes = np.arange(3 ** nat)
    a = _digits(codes, nat)[:, None, :]
    b = _digits(codes, nat)[None, :, :]
    merged = np.where(a == _P, b, a).astype(np.int64)
    weights = 3 ** np.arange(nat)
    return (merged * weights).sum(-1)


def _lcm_list(xs: Iterable[int]) -> int:
    out = 1
    for x in xs:
        if x:
            out = out * x // math.gcd(out, x)
    return out


def decide_exists(f: Formula, spec: GroupSpec, env: VecEnv) -> np.ndarray:
    """Truth of `exists x. body` (body quantifier-free) on every assignment of env.

    Coordinates of x are chosen independently: each coordinate yields, per
    assignment, the set of reachable per-atom statuses (false / true /
    undecided at this level); statuses combine most significant level first.
    Candidate values per coordinate cover every cell of the arrangement cut
    out by the atoms' critical values and residue classes.
    """
    if not isinstance(f, Exists):
        raise SpecError("decide_exists needs an existential formula")
    x, body = f.var, f.body
    atoms: list[Formula] = []
    for a in iter_atoms(body):
        if not isinstance(a, (Order, Cong)):
            raise SpecError("oracle needs base atoms only")
        if a not in atoms:
            atoms.append(a)
    for i in range(1, spec.k + 1):
        if _kind(spec, i)[0] == "Zinv":
            raise OracleRefusal("existential oracle supports Z and Q components only")
    nat = len(atoms)
    n = env.size
    tt = _truth_table(body, atoms)
    if nat == 0:
        return np.full(n, bool(tt[0]))
    if 3 ** nat > 3 ** 7:
        raise OracleRefusal("too many distinct atoms for the existential oracle")
    coefs = [a.term.coeff(x) for a in atoms]
    rests = [a.term.drop(x) for a in atoms]
    lcm_a = _lcm_list(abs(c) for c in coefs)
    # working denominators: room for critical values and midpoints on dense levels
    dens = []
    for i in range(spec.k):
        kind = _kind(spec, i + 1)[0]
        d = env.dens[i]
        for a in atoms:
            if a.term.const is not None:
                cd = a.term.const[i].denominator
                d = d * cd // math.gcd(d, cd)
        dens.append(d if kind == "Z" else 2 * lcm_a * d)
    wenv = env.rescale(dens) if dens != env.dens else env
    rest_vals = [term_values(spec, r, wenv) for r in rests]
    mods = [effective_moduli(spec, a.mod) if isinstance(a, Cong) else None for a in atoms]

    reach_levels = []
    weights = (3 ** np.arange(nat)).astype(np.int64)
    for i in range(spec.k):
        kind = _kind(spec, i + 1)[0]
        cand = _candidates(kind, i, coefs, rest_vals, mods, n)
        status = np.empty(cand.shape + (nat,), dtype=np.int8)
        for j, a in enumerate(atoms):
            v = coefs[j] * cand + rest_vals[j][i][:, None]
            if isinstance(a, Order):
                st = np.where(v > 0, _F, np.where(v < 0, _T if a.op != "=" else _F, _P))
            else:
                m = mods[j][i]
                if m == 0:
                    st = np.where(v == 0, _P, _F)
                elif kind == "Q":
                    st = np.full(v.shape, _P)
                else:
                    st = np.where(v % m == 0, _P, _F)
            status[..., j] = st
        codes = (status.astype(np.int64) * weights).sum(-1)
        reach = np.zeros((n, 3 ** nat), dtype=bool)
        rows = np.repeat(np.arange(n), codes.shape[1])
        reach[rows, codes.reshape(-1)] = True
        reach_levels.append(reach)

    final = _final_truth(atoms, tt)
    if spec.k == 1:
        return (reach_levels[0] & final[None, :]).any(1)
    merge = _merge_table(nat)
    acc = reach_levels[0]
    for lvl in range(1, spec.k - 1):
        nxt = np.zeros_like(acc)
        for c in np.nonzero(acc.any(0))[0]:
            contrib = acc[:, c][:, None] & reach_levels[lvl]
            targets = merge[c]
            for e in np.unique(targets):
                nxt[:, e] |= contrib[:, targets == e].any(1)
        acc = nxt
    # last level: combine with the truth table by a matrix product
    table = final[merge].astype(np.int32)  # (prefix code, last code)
    hits = acc.astype(np.int32) @ table
    return ((hits > 0) & reach_levels[-1]).any(1)


def _candidates(kind: str, i: int, coefs: list[int], rest_vals: list[list[np.ndarray]], mods: list, n: int) -> np.ndarray:
    if kind == "Z":
        L = _lcm_list(m[i] for m in mods if m is not None)
        cols = [np.broadcast_to(np.arange(L, dtype=np.int64), (n, L))]
        for a, r in zip(coefs, rest_vals):
            if a == 0:
                continue
            R = r[i]
            # beta = -R / a
            num, den = -R * np.sign(a), abs(a)
            fl = np.floor_divide(num, den)  # floor(beta)
            exact = (num % den) == 0
            # largest integer strictly below beta, smallest strictly above
            below = np.where(exact, fl - 1, fl)
            above = fl + 1
            res = np.arange(L, dtype=np.int64)[None, :]
            up = above[:, None] + (res - above[:, None]) % L
            down = below[:, None] - (below[:, None] - res) % L
            at = np.where(exact, fl, above)[:, None]
            cols += [up, down, at]
        return np.concatenate(cols, axis=1)
    # dense: values at the working denominator
    betas = []
    for a, r in zip(coefs, rest_vals):
        if a == 0:
            continue
        betas.append(-r[i] // a)
    cols = [np.zeros((n, 1), dtype=np.int64)]
    if betas:
        B = np.stack(betas, axis=1)
        cols += [B, B - 1, B + 1]
        for p, q in itertools.combinations(range(B.shape[1]), 2):
            cols.append(((B[:, p] + B[:, q]) // 2)[:, None])
    return np.concatenate(cols, axis=1)


def bounded_truth(f: Formula, spec: GroupSpec, box: Box, env: dict[str, GroupElement] | None = None) -> bool:
    """Truth with every quantifier ranging over the box only (small boxes)."""
    env = dict(env or {})
    elems = box.elements()
    variables = sorted(free_vars(f) - set(env))
    if variables:
        raise SpecError(f"unbound variables {variables}")

    def go(g: Formula, e: dict[str, GroupElement]) -> bool:
        if isinstance(g, Exists):
            return any(go(g.body, {**e, g.var: el}) for el in elems)
        if isinstance(g, Forall):
            return all(go(g.body, {**e, g.var: el}) for el in elems)
        if isinstance(g, Not):
            return not go(g.arg, e)
        if isinstance(g, And):
            return all(go(a, e) for a in g.args)
        if isinstance(g, Or):
            return any(go(a, e) for a in g.args)
        if isinstance(g, TrueF):
            return True
        if isinstance(g, FalseF):
            return False
        single = VecEnv([1] * spec.k, {}, 1)
        dens = formula_dens(spec, g)
        for i in range(spec.k):
            for el in e.values():
                dens[i] = dens[i] * el.coords[i].denominator // math.gcd(dens[i], el.coords[i].denominator)
        arrays = {v: [np.array([int(el.coords[i] * dens[i])], dtype=np.int64) for i in range(spec.k)] for v, el in e.items()}
        single = VecEnv(dens, arrays, 1)
        return bool(eval_vec(g, spec, single)[0])

    return go(f, env)


# Finite quotients and congruence systems

@dataclass(frozen=True)
class FiniteQuotient:
    spec: GroupSpec
    moduli: tuple[int, ...]  # per coordinate, after removing invertible primes

    @property
    def size(self) -> int:
        return math.prod(self.moduli)

    def project(self, g: GroupElement) -> tuple[int, ...]:
        out = []
        for i, (m, v) in enumerate(zip(self.moduli, g.coords), start=1):
            out.append(_residue(v, m))
        return tuple(out)

    def elements(self) -> np.ndarray:
        if self.size > max_enum():
            raise OracleRefusal(f"quotient of size {self.size} exceeds OAG_MAX_ENUM")
        if not self.moduli:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.meshgrid(*[np.arange(m, dtype=np.int64) for m in self.moduli], indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)

    def add(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        return tuple((x + y) % m for x, y, m in zip(a, b, self.moduli))


def _residue(v: Fraction, m: int) -> int:
    if m == 1:
        return 0
    return (v.numerator * pow(v.denominator, -1, m)) % m


def quotient(spec: GroupSpec, expr: StairExpr) -> FiniteQuotient:
    spec.require_computable()
    mods = effective_moduli(spec, expr)
    if any(m == 0 for m in mods):
        raise OracleRefusal("infinite index: no finite quotient")
    return FiniteQuotient(spec, tuple(mods))


def _mask_in(q: FiniteQuotient, elems: np.ndarray, base: GroupElement, expr: StairExpr) -> np.ndarray:
    """Residues r with r - base in the subgroup (which must contain the quotient's kernel)."""
    mods = effective_moduli(q.spec, expr)
    ok = np.ones(elems.shape[0], dtype=bool)
    for i, (m, M) in enumerate(zip(mods, q.moduli)):
        if m == 0 or M % m:
            raise OracleRefusal("subgroup does not contain the quotient kernel")
        b = _residue(base.coords[i], M)
        ok &= ((elems[:, i] - b) % m) == 0
    return ok


@dataclass
class OracleSolution:
    solvable: bool
    quotient: FiniteQuotient
    mask: np.ndarray  # over quotient.elements()


def oracle_solve(spec: GroupSpec, constraints: Sequence[tuple[GroupElement, StairExpr]]) -> OracleSolution:
    """Enumerate G/LG where L*G lies inside every modulus."""
    spec.require_computable()
    k = spec.k
    lcms = [1] * k
    for _, expr in constraints:
        for i, m in enumerate(effective_moduli(spec, expr)):
            if m == 0:
                raise OracleRefusal("modulus of infinite index")
            lcms[i] = lcms[i] * m // math.gcd(lcms[i], m)
    q = FiniteQuotient(spec, tuple(lcms))
    elems = q.elements()
    mask = np.ones(elems.shape[0], dtype=bool)
    for a, expr in constraints:
        mask &= _mask_in(q, elems, a, expr)
    return OracleSolution(bool(mask.any()), q, mask)


def coset_mask(q: FiniteQuotient, base: GroupElement, expr: StairExpr) -> np.ndarray:
    return _mask_in(q, q.elements(), base, expr)


# Brute-force convex-subgroup operators from their definitions

def _component_divisible(spec: GroupSpec, i: int, n: int) -> bool:
    """Is component i n-divisible?  Checked on the generator: 1/n must lie in it."""
    kind, primes = _kind(spec, i) if spec.component(i).realization is not None else ("profile", frozenset())
    if kind == "profile":
        p = 2
        m = n
        ok = True
        while m > 1:
            if m % p == 0:
                if spec.component(i).dims.dim(p) != 0:
                    ok = False
                while m % p == 0:
                    m //= p
            p += 1
        return ok
    if kind == "Q":
        return True
    if kind == "Z":
        return n == 1
    return _strip_primes(n, primes) == 1


def brute_A_n(spec: GroupSpec, g: GroupElement, n: int):
    """Smallest convex C with B(g)/C n-regular, by trying every convex subgroup."""
    lead = next((i + 1 for i, c in enumerate(g.coords) if c != 0), 0)
    if lead == 0:
        return EMPTY
    best = None
    for j in range(lead - 1, spec.k + 1):  # C = CS(j) inside B(g) = CS(lead-1)
        # B/C is the lex product of components lead..j; n-regular iff every
        # quotient by a nonzero convex subgroup, i.e. components lead..m for
        # lead-1 <= m < j, is n-divisible
        regular = all(
            all(_component_divisible(spec, c, n) for c in range(lead, m + 1))
            for m in range(lead - 1, j)
        )
        if regular:
            best = j
    return ConvexSubgroup(best)


def brute_F_n(spec: GroupSpec, g: GroupElement, n: int):
    """Largest convex C disjoint from g + nG."""
    def meets(level: int) -> bool:
        # C meets g + nG iff some h gives g + n h vanishing on coordinates 1..level
        for i in range(level):
            kind, primes = _kind(spec, i + 1)
            v = g.coords[i] / n
            if kind == "Q":
                continue
            den = v.denominator if kind == "Z" else _strip_primes(v.denominator, primes)
            if den != 1:
                return False
        return True

    best = None
    for level in range(spec.k + 1):
        if not meets(level):
            best = level
            break
    return EMPTY if best is None else ConvexSubgroup(best)
