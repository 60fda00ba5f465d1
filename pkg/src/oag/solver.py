"""Congruence systems modulo staircase subgroups, and cosets against order windows."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import Cmp, GroupElement, GroupSpec, compare
from .staircase import StaircaseSubgroup, intersect_all, reduce_coordinate


@dataclass(frozen=True)
class CongruenceSystem:
    spec: GroupSpec
    constraints: tuple[tuple[GroupElement, StaircaseSubgroup], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "constraints", tuple(self.constraints))


@dataclass(frozen=True)
class SolutionCoset:
    base: GroupElement
    modulus: StaircaseSubgroup

    def contains(self, g: GroupElement) -> bool:
        return self.modulus.contains(g - self.base)

    def __str__(self) -> str:
        return f"base={self.base} modulus={self.modulus}"


@dataclass(frozen=True)
class Unsolvable:
    pair: tuple[int, int]

    def __str__(self) -> str:
        return f"pair=({self.pair[0]},{self.pair[1]})"


@dataclass(frozen=True)
class Cut:
    """A gap of the order: a prefix followed by -inf (just below it) or +inf (just above it)."""

    coords: tuple


@dataclass(frozen=True)
class OrderWindow:
    """Bounds are elements, points of the divisible hull, or cuts whose coordinates end in -inf/+inf."""

    lower: tuple[GroupElement, bool] | None = None  # (bound, strict)
    upper: tuple[GroupElement, bool] | None = None

    def is_empty(self) -> bool:
        if self.lower is None or self.upper is None:
            return False
        c = compare(self.lower[0], self.upper[0])
        if c == Cmp.GT:
            return True
        return c == Cmp.EQ and (self.lower[1] or self.upper[1])

    def contains(self, g: GroupElement) -> bool:
        if self.lower is not None:
            c = compare(g, self.lower[0])
            if c == Cmp.LT or (c == Cmp.EQ and self.lower[1]):
                return False
        if self.upper is not None:
            c = compare(g, self.upper[0])
            if c == Cmp.GT or (c == Cmp.EQ and self.upper[1]):
                return False
        return True


def check_compatibility(sys: CongruenceSystem) -> tuple[bool, tuple[int, int] | None]:
    """Pairwise test: a_j - a_i in H_i + H_j for all i < j."""
    cs = sys.constraints
    for j in range(len(cs)):
        for i in range(j):
            (ai, hi), (aj, hj) = cs[i], cs[j]
            if not hi.sum(hj).contains(aj - ai):
                return False, (i, j)
    return True, None


def verify_distributivity(hs: Sequence[StaircaseSubgroup]) -> bool:
    """For every r: intersection over i<r of (H_i + H_r) equals (intersection over i<r of H_i) + H_r."""
    if not hs:
        return True
    spec = hs[0].spec
    for r in range(1, len(hs)):
        left = intersect_all(spec, (hs[i].sum(hs[r]) for i in range(r)))
        right = intersect_all(spec, hs[:r]).sum(hs[r])
        if left != right:
            return False
    return True


def _merge(spec: GroupSpec, b: GroupElement, K: StaircaseSubgroup, a: GroupElement, H: StaircaseSubgroup) -> GroupElement | None:
    """A common element of b + K and a + H, or None.

    Coordinatewise Bezout: with g = gcd(k, h) = u*k + v*h and
    d = a - b = q*g (inside the component), b + u*k*q works.
    """
    d = a - b
    coords = list(b.coords)
    for i in range(spec.k):
        comp = spec.component(i + 1)
        k, h = K.coeffs[i], H.coeffs[i]
        di = d.coords[i]
        g = math.gcd(k, h)
        if not comp.in_multiple(di, g):
            return None
        if di == 0 or k == 0:
            continue
        if h == 0:
            coords[i] = a.coords[i]
            continue
        gg, u, _v = _ext_gcd(k, h)
        q = di / g
        coords[i] = coords[i] + u * k * q
    return GroupElement(tuple(coords))


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _greedy_solve(sys: CongruenceSystem) -> SolutionCoset | Unsolvable:
    """Fallback: coordinatewise CRT without the pairwise merge."""
    spec = sys.spec
    cs = sys.constraints
    base = spec.zero()
    modulus = StaircaseSubgroup.whole(spec)
    for idx, (a, h) in enumerate(cs):
        merged = _merge(spec, base, modulus, a, h)
        if merged is None:
            for i in range(idx):
                if not cs[i][1].sum(h).contains(a - cs[i][0]):
                    return Unsolvable((i, idx))
            return Unsolvable((0, idx))
        base, modulus = merged, modulus.intersect(h)
    return SolutionCoset(modulus.reduce(base), modulus)


def solve(sys: CongruenceSystem, flags: list[str] | None = None) -> SolutionCoset | Unsolvable:
    spec = sys.spec
    spec.require_computable()
    cs = sys.constraints
    if not cs:
        return SolutionCoset(spec.zero(), StaircaseSubgroup.whole(spec))
    moduli = [h for _, h in cs]
    if not verify_distributivity(moduli):
        if flags is not None:
            flags.append("distributivity failed; greedy fallback used")
        return _greedy_solve(sys)
    ok, pair = check_compatibility(sys)
    if not ok:
        return Unsolvable(pair)
    base, modulus = cs[0][0], cs[0][1]
    for a, h in cs[1:]:
        merged = _merge(spec, base, modulus, a, h)
        if merged is None:  # cannot happen once compatibility and distributivity hold
            raise AssertionError("pairwise compatible system failed to merge")
        base, modulus = merged, modulus.intersect(h)
    return SolutionCoset(modulus.reduce(base), modulus)


def solve_constraints(spec: GroupSpec, constraints: Iterable[tuple[GroupElement, StaircaseSubgroup]]) -> SolutionCoset | Unsolvable:
    return solve(CongruenceSystem(spec, tuple(constraints)))


def linear_solutions(spec: GroupSpec, c: int, g: GroupElement, H: StaircaseSubgroup) -> SolutionCoset | None:
    """{x : c*x + g in H} as a coset of (H : c) = {x : c*x in H}; None when empty."""
    if c == 0:
        raise ValueError("coefficient must be nonzero")
    base, coeffs = [], []
    for i, (v, h) in enumerate(zip(g.coords, H.coeffs)):
        comp = spec.component(i + 1)
        if h == 0:
            x = -Fraction(v) / c
            if not comp.in_multiple(x, 1):
                return None
            base.append(x)
            coeffs.append(0)
            continue
        m = comp.strip(h)
        if m == 1:
            base.append(Fraction(0))
            coeffs.append(1)
            continue
        # A_i / m*A_i is cyclic of order m with integer representatives
        r = int(reduce_coordinate(spec, i + 1, -Fraction(v), h))
        d = math.gcd(c, m)
        if r % d:
            return None
        n = m // d
        base.append(Fraction((r // d) * pow(c // d, -1, n) % n if n > 1 else 0))
        coeffs.append(n)
    K = StaircaseSubgroup.from_coeffs(spec, coeffs)
    return SolutionCoset(K.reduce(GroupElement(tuple(base))), K)


# Cosets against order windows

def _first_above(comp, v: Fraction, base: Fraction, c: int, strict: bool) -> Fraction | None:
    """Least element of base + c*A at or above v (A discrete); None if c == 0 and none."""
    if c == 0:
        ok = base > v or (base == v and not strict)
        return base if ok else None
    # A = Z here
    r = (base - v) % c  # base, v integers
    cand = v + r
    if strict and cand == v:
        cand += c
    return cand


def coset_meets_window(coset: SolutionCoset, window: OrderWindow) -> bool:
    """Does base + modulus meet the window?  Decided coordinate by coordinate."""
    spec = coset.modulus.spec
    spec.require_computable()
    if window.is_empty():
        return False
    k = spec.k
    b = coset.base.coords
    cs = coset.modulus.coeffs
    lo = window.lower
    hi = window.upper

    def in_coset(i: int, v: Fraction) -> bool:
        return spec.component(i + 1).in_multiple(v - b[i], cs[i])

    def free(i: int) -> bool:
        # coordinates i.. can be chosen freely in their cosets: always possible
        return True

    def step(i: int, tight_lo: bool, tight_hi: bool) -> bool:
        if i == k:
            if tight_lo and lo[1]:
                return False
            if tight_hi and hi[1]:
                return False
            return True
        lv = lo[0].coords[i] if tight_lo else None
        hv = hi[0].coords[i] if tight_hi else None
        # a cut bound carries -inf/+inf after its prefix
        if lv == math.inf or hv == -math.inf:
            return False
        if lv == -math.inf:
            tight_lo, lv = False, None
        if hv == math.inf:
            tight_hi, hv = False, None
        if not tight_lo and not tight_hi:
            return free(i)
        comp = spec.component(i + 1)
        c = cs[i]
        # strictly inside at this coordinate releases both constraints
        if _interior_hit(comp, b[i], c, lv, hv):
            return True
        if tight_lo and in_coset(i, lv):
            still_hi = tight_hi and lv == hv
            if step(i + 1, True, still_hi):
                return True
        if tight_hi and in_coset(i, hv) and not (tight_lo and lv == hv):
            if step(i + 1, False, True):
                return True
        return False

    return step(0, lo is not None, hi is not None)


def _interior_hit(comp, base: Fraction, c: int, lv: Fraction | None, hv: Fraction | None) -> bool:
    """Is there x in base + c*A with lv < x < hv (None = unbounded)?"""
    if lv is not None and hv is not None and lv >= hv:
        return False
    if c == 0:
        return (lv is None or base > lv) and (hv is None or base < hv)
    if lv is None or hv is None:
        return True
    if not comp.discrete:
        return True  # dense coset of c*A
    x = _first_above(comp, lv, base, c, strict=True)
    return x < hv


def canonical_base(coset: SolutionCoset) -> GroupElement:
    return coset.modulus.reduce(coset.base)


def decide_closed(
    spec: GroupSpec,
    positives: Sequence[tuple[GroupElement, StaircaseSubgroup]],
    negatives: Sequence[tuple[GroupElement, StaircaseSubgroup]],
    window: OrderWindow,
    max_residues: int = 100000,
) -> bool | None:
    """Is there x with x = a mod H (positives), x != a mod H (negatives), x in window?

    Returns None when the negatives need an infinite case split.
    """
    sol = solve(CongruenceSystem(spec, tuple(positives)))
    if isinstance(sol, Unsolvable):
        return False
    if not negatives:
        return coset_meets_window(sol, window)
    K = sol.modulus
    fine = intersect_all(spec, [K] + [h for _, h in negatives])
    idx = K.index_of(fine)
    if not idx.is_finite or idx.value > max_residues:
        return None
    for r in K.coset_representatives(fine):
        x = sol.base + r
        if any(h.contains(x - a) for a, h in negatives):
            continue
        if coset_meets_window(SolutionCoset(x, fine), window):
            return True
    return False
