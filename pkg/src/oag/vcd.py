"""Counting realized sign vectors |S^phi(A)| and estimating dual VC-density.

Two exact routes.  The cell route cuts the line at every order threshold and
G at the intersection of all congruence moduli, then reads one truth
assignment off each (interval, class) pair that meets.  The refinement route
adds the x-atoms one at a time and splits every cell into the part where the
atom holds and the part where it fails, deciding emptiness with the solver
fast path or QE.  count_atoms uses cells when they apply and refinement
otherwise.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import GroupElement, GroupSpec, SpecError
from .patterns import Pattern, WindowState, _fast_form, satisfiable
from .qe import classify_atom, directed_family_partition, fold
from .rewrite import staircase_of
from .syntax import (
    And,
    Cong,
    FalseF,
    Formula,
    Not,
    Or,
    Term,
    TrueF,
    conj,
    free_vars,
    iter_atoms,
    negate,
    substitute,
)


@dataclass(frozen=True)
class AtomCount:
    parameter_set_size: int
    atom_count: int
    formula: str


def _instance(f: Formula, params: Sequence[str], a: Sequence[GroupElement]) -> Formula:
    for name, g in zip(params, a):
        f = substitute(f, name, Term.element(g))
    return f


def _truth(f: Formula, val: dict) -> bool:
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Not):
        return not _truth(f.arg, val)
    if isinstance(f, And):
        return all(_truth(a, val) for a in f.args)
    if isinstance(f, Or):
        return any(_truth(a, val) for a in f.args)
    return val[f]


def _compile(f: Formula, index: dict):
    """f as a function of a list of atom truth values."""
    if isinstance(f, TrueF):
        return lambda v: True
    if isinstance(f, FalseF):
        return lambda v: False
    if isinstance(f, Not):
        g = _compile(f.arg, index)
        return lambda v: not g(v)
    if isinstance(f, (And, Or)):
        gs = [_compile(a, index) for a in f.args]
        if isinstance(f, And):
            return lambda v: all(g(v) for g in gs)
        return lambda v: any(g(v) for g in gs)
    i = index[f]
    return lambda v: v[i]


def parameter_vars(phi: Formula, var: str = "x") -> list[str]:
    return sorted(free_vars(phi) - {var})


@dataclass
class _Cell:
    values: dict
    state: WindowState | None  # None: some literal has no fast form
    literals: list = field(default_factory=list)


def _cell_sat(spec: GroupSpec, cell: _Cell, var: str) -> bool:
    if cell.state is not None:
        r = cell.state.decide(spec)
        if r is not None:
            return r
    parts = [a if s else negate(a) for a, s in cell.literals]
    return satisfiable(conj(parts), spec, var)


def _cell_form(G: GroupSpec, atom: Formula, var: str):
    """Fast form, but ('lin', c, g, H) for c*x + g in H, evaluated class by class without solving."""
    if isinstance(atom, Cong) and atom.term.variables() == {var}:
        t = atom.term
        return ("lin", t.coeff(var), t.drop(var).value(G), staircase_of(G, atom.mod))
    return _fast_form(G, atom, var)


def _cell_decomposition(G: GroupSpec, atoms: list, forms: list, max_classes: int = 50000):
    """Truth assignments realized by (order cell, class mod P) pairs; None if not applicable.

    A staircase H has a block of zero coefficients in front, so c*x + g in H
    splits into an equality of the first z coordinates and a congruence modulo
    H' (H with those zeros replaced by 1), which has finite index.  The prefix
    equality is an interval cut out by the two cuts (p, -inf) and (p, +inf),
    a single point when z = k.  Boundaries are all order thresholds and all
    such cuts; every atom is constant on each cell between boundaries
    intersected with each class of P, the intersection of all H'.
    """
    from .core import Cmp, compare
    from .solver import Cut, OrderWindow, SolutionCoset, coset_meets_window
    from .staircase import StaircaseSubgroup, intersect_all

    if any(f is None for f in forms):
        return None
    k = G.k
    points: set = {f[2] for f in forms if f[0] == "ord"}
    cuts: set = set()
    prefix: dict[int, tuple | None] = {}  # atom -> (low cut, high cut), point, or None when never true
    tails: dict[int, StaircaseSubgroup] = {}
    for i, f in enumerate(forms):
        if f[0] != "lin":
            continue
        _, c, g, H = f
        z = H.zero_prefix()
        tails[i] = StaircaseSubgroup.from_coeffs(G, [h if h else 1 for h in H.coeffs])
        if z == 0:
            prefix[i] = ()
            continue
        p = tuple(-v / c for v in g.coords[:z])
        if not all(G.component(j + 1).in_multiple(v, 1) for j, v in enumerate(p)):
            prefix[i] = None
        elif z == k:
            q = GroupElement(p)
            points.add(q)
            prefix[i] = (q,)
        else:
            lo_cut = Cut(p + (-math.inf,) * (k - z))
            hi_cut = Cut(p + (math.inf,) * (k - z))
            cuts |= {lo_cut, hi_cut}
            prefix[i] = (lo_cut, hi_cut)
    P = intersect_all(G, tails.values())
    idx = StaircaseSubgroup.whole(G).index_of(P)
    if not idx.is_finite or idx.value > max_classes:
        return None
    classes = list(StaircaseSubgroup.whole(G).coset_representatives(P))
    bounds = sorted(points | cuts, key=lambda g: g.coords)
    windows = []
    lo = None
    for q in bounds:
        windows.append((OrderWindow(lo, (q, True)), None))
        if q in points:
            windows.append((OrderWindow((q, False), (q, False)), q))
        lo = (q, True)
    windows.append((OrderWindow(lo, None), None))

    def inside(w, point, pre) -> bool:
        if pre is None:
            return False
        if not pre:
            return True
        if len(pre) == 1:
            return point is not None and point == pre[0]
        if point is not None:
            return compare(pre[0], point) == Cmp.LT and compare(point, pre[1]) == Cmp.LT
        return (
            w.lower is not None and compare(w.lower[0], pre[0]) != Cmp.LT
            and w.upper is not None and compare(w.upper[0], pre[1]) != Cmp.GT
        )

    order = [(i, f) for i, f in enumerate(forms) if f[0] == "ord"]
    lin = [(i, f) for i, f in enumerate(forms) if f[0] == "lin"]
    groups: dict[tuple, list] = {}  # classes with the same congruence truths are interchangeable
    for r in classes:
        groups.setdefault(tuple(tails[i].contains(f[1] * r + f[2]) for i, f in lin), []).append(r)
    out = []
    for w, point in windows:
        if w.is_empty():
            continue
        vals = [False] * len(atoms)
        for i, f in order:
            vals[i] = _order_truth(f[1], f[2], w, point)
        pre = {i: inside(w, point, p) for i, p in prefix.items()}
        for cv, reps in groups.items():
            if point is not None:
                meets = any(P.contains(point - r) for r in reps)
            else:
                meets = any(coset_meets_window(SolutionCoset(r, P), w) for r in reps)
            if not meets:
                continue
            row = list(vals)
            for (i, _), v in zip(lin, cv):
                row[i] = pre[i] and v
            out.append(row)
    return out


def _order_truth(op: str, q: GroupElement, w, point) -> bool:
    """Truth of x op q on a cell: a threshold point or an open interval between thresholds."""
    from .core import Cmp, compare

    if point is not None:
        c = compare(point, q)
    else:
        # q is never inside an open cell: compare against a bound of the cell
        if w.upper is not None and compare(w.upper[0], q) != Cmp.GT:
            c = Cmp.LT
        else:
            c = Cmp.GT
    return {
        "<": c == Cmp.LT,
        "<=": c != Cmp.GT,
        "=": c == Cmp.EQ,
        ">": c == Cmp.GT,
        ">=": c != Cmp.LT,
    }[op]


def sign_vectors(
    phi: Formula,
    A: Sequence[Sequence[GroupElement]],
    G: GroupSpec,
    var: str = "x",
    params: Sequence[str] | None = None,
    method: str = "auto",
) -> set[tuple[bool, ...]]:
    """All realized vectors (phi(x, a))_{a in A} as x ranges over G.

    method: "cells" (cell decomposition), "refine" (cell splitting) or "auto".
    """
    G.require_computable()
    params = parameter_vars(phi, var) if params is None else list(params)
    insts = [fold(_instance(phi, params, a), G) for a in A]
    atoms = list(dict.fromkeys(at for f in insts for at in iter_atoms(f)))
    if method != "refine":
        forms = [_cell_form(G, a, var) for a in atoms]
        cells = _cell_decomposition(G, atoms, forms)
        if cells is not None:
            index = {a: i for i, a in enumerate(atoms)}
            fs = [_compile(f, index) for f in insts]
            return {tuple(g(c) for g in fs) for c in cells}
        if method == "cells":
            raise SpecError("cell decomposition does not apply")
    atoms.sort(key=lambda a: _fast_form(G, a, var) is None)  # fast literals first
    cells = [_Cell({}, WindowState(), [])]
    for atom in atoms:
        form = _fast_form(G, atom, var)
        nxt = []
        for cell in cells:
            for positive in (True, False):
                state = None
                if cell.state is not None and form is not None:
                    state = cell.state.add(form, positive)
                    if state is None:
                        continue
                child = _Cell({**cell.values, atom: positive}, state, cell.literals + [(atom, positive)])
                if _cell_sat(G, child, var):
                    nxt.append(child)
        cells = nxt
    return {tuple(_truth(f, c.values) for f in insts) for c in cells}


def count_atoms(phi: Formula, A: Sequence[Sequence[GroupElement]], G: GroupSpec, var: str = "x", params: Sequence[str] | None = None) -> AtomCount:
    vecs = sign_vectors(phi, A, G, var, params)
    return AtomCount(len(A), len(vecs), str(phi))


def product_bound(families: Sequence[int], A_size: int, na_formulas: int = 0, na_sets: int = 2) -> int:
    """2^(N^|U|) * prod(|Psi_i| * |A| + 1); the NA factor is 1 when there are no NA formulas."""
    out = 2 ** (na_sets ** na_formulas) if na_formulas else 1
    for s in families:
        out *= s * A_size + 1
    return out


@dataclass(frozen=True)
class BoundData:
    family_sizes: tuple[int, ...]
    na_formulas: int
    na_sets: int

    def bound(self, A_size: int) -> int:
        return product_bound(self.family_sizes, A_size, self.na_formulas, self.na_sets)


def bound_data(phi: Formula, G: GroupSpec, var: str = "x") -> BoundData:
    """Family sizes and NA data of phi's atoms, read off the directed-family partition."""
    fams, na = directed_family_partition(phi, G, var)
    sets = 2
    for a in na:
        idx = classify_atom(a, G).index
        if idx is not None and idx.is_finite:
            sets = max(sets, idx.value)
    return BoundData(tuple(len(f.generators) for f in fams), len(na), sets)


def random_parameters(G: GroupSpec, n: int, arity: int, rng: random.Random, radius: int = 50) -> list[tuple[GroupElement, ...]]:
    def one() -> GroupElement:
        coords = []
        for i in range(G.k):
            comp = G.component(i + 1)
            v = Fraction(rng.randint(-radius, radius))
            if comp.realization is not None and comp.realization.is_rationals:
                v = v / rng.choice((1, 2, 3))
            coords.append(v)
        return GroupElement(tuple(coords))

    return [tuple(one() for _ in range(arity)) for _ in range(n)]


@dataclass
class VCEstimate:
    slope: float
    table: list[tuple[int, int, int]]  # size, max count, product bound
    bound_ok: bool


def _slope(sizes: Sequence[int], counts: Sequence[int]) -> float:
    xs = np.log(np.asarray(sizes, dtype=float))
    ys = np.log(np.asarray(counts, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])


def estimate_dual_vc(phi: Formula, G: GroupSpec, sizes: Sequence[int], trials: int, seed: int = 0, var: str = "x") -> VCEstimate:
    """Max atom count over random parameter sets per size, and the log-log slope."""
    rng = random.Random(seed)
    params = parameter_vars(phi, var)
    data = bound_data(phi, G, var)
    table = []
    ok = True
    for n in sizes:
        best = 0
        radius = max(50, 4 * n)
        for _ in range(trials):
            A = random_parameters(G, n, len(params), rng, radius)
            best = max(best, count_atoms(phi, A, G, var, params).atom_count)
        b = data.bound(n)
        ok = ok and best <= b
        table.append((n, best, b))
    return VCEstimate(_slope([t[0] for t in table], [t[1] for t in table]), table, ok)


def psi_disjunction(p: Pattern, M: int) -> tuple[Formula, list[str], list[tuple[GroupElement, ...]]]:
    """psi = OR_i phi_i(x, y_i) with parameter tuples b_(i,j), j < M, from a pattern with M + 1 columns.

    b_(i,j) uses column j in row i and the spare column M in every other row,
    so a path through the first M columns is read back as a sign vector.
    """
    if p.columns < M + 1:
        raise SpecError(f"pattern needs {M + 1} columns")
    renamed = []
    names: list[str] = []
    for i, row in enumerate(p.rows):
        f = row.formula
        new = []
        for n in row.params:
            nn = f"{n}r{i}"
            f = substitute(f, n, Term.var(nn))
            new.append(nn)
        renamed.append(f)
        names += new
    psi = Or(tuple(renamed)) if len(renamed) > 1 else renamed[0]
    B = []
    for i in range(p.depth):
        for j in range(M):
            tup: tuple[GroupElement, ...] = ()
            for r, row in enumerate(p.rows):
                tup += row.columns[j if r == i else M]
            B.append(tup)
    return psi, names, B
