"""Subgroups of the form D_l1 + m1*D_l2 + ... + mt*G.

Every such subgroup of a lexicographic product of rank-one groups is a
direct sum c_1*A_1 + ... + c_k*A_k where the coefficient vector is a
divisibility chain read bottom up (c_{i+1} | c_i) and zeros occupy a top
prefix.  Sums and intersections act coordinatewise by gcd and lcm, so the
coefficient vector is the working normal form.  A coefficient is kept in
canonical form c_i = lcm(r_i, ..., r_k) where r_j is the j-th coefficient
with the primes invertible in A_j removed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Sequence

from .core import (
    INF,
    ONE,
    ExtNat,
    GroupElement,
    GroupSpec,
    SpecError,
    factorization,
    lcm0,
)


@dataclass(frozen=True)
class StairExpr:
    """Spec-independent textual form: terms (level, multiplier) plus a tail on G.

    A term (l, m) contributes m*CS(l); the tail n contributes n*G (0: absent).
    """

    terms: tuple[tuple[int, int], ...] = ()
    tail: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple((int(l), int(m)) for l, m in self.terms))
        for l, m in self.terms:
            if l < 0 or m < 0:
                raise SpecError("staircase levels and multipliers must be non-negative")
        if self.tail < 0:
            raise SpecError("negative tail modulus")

    def __str__(self) -> str:
        terms = [t for t in self.terms if t[1] != 0]
        if not terms:
            if self.tail == 1:
                return "G"
            if self.tail == 0:
                return "0"
            return f"{self.tail}G"
        if len(terms) == 1 and terms[0][1] == 1:
            l = terms[0][0]
            if self.tail == 0:
                return f"D{l}"
            if self.tail == 1:
                return "G"
            return f"D{l}+{self.tail}G"
        items = []
        for l, m in terms:
            items.append(f"D{l}" if m == 1 else f"{m}*D{l}")
        if self.tail:
            items.append("G" if self.tail == 1 else f"{self.tail}*G")
        return "stair[" + ", ".join(items) + "]"


def _raw_coefficients(spec: GroupSpec, expr: StairExpr) -> list[int]:
    k = spec.k
    coeffs = [expr.tail] * k
    for level, mult in expr.terms:
        if level > k:
            raise SpecError(f"level D{level} out of range for a {k}-component group")
        for i in range(level, k):
            coeffs[i] = math.gcd(coeffs[i], mult)
    return coeffs


def canonical_coefficients(spec: GroupSpec, raw: Sequence[int]) -> tuple[int, ...]:
    """Canonical chain for the subgroup sum of raw[i]*A_i; error if not a staircase."""
    k = spec.k
    if len(raw) != k:
        raise SpecError("coefficient vector has wrong length")
    stripped = [spec.component(i + 1).strip(abs(c)) for i, c in enumerate(raw)]
    out = [0] * k
    acc = 1
    for i in range(k - 1, -1, -1):
        acc = lcm0(acc, stripped[i])
        out[i] = acc
    for i in range(k):
        if spec.component(i + 1).strip(out[i]) != stripped[i]:
            raise SpecError(f"coefficient vector {tuple(raw)} is not of staircase shape")
    return tuple(out)


@dataclass(frozen=True)
class StaircaseSubgroup:
    spec: GroupSpec
    coeffs: tuple[int, ...]

    # Construction

    @staticmethod
    def from_coeffs(spec: GroupSpec, raw: Sequence[int]) -> StaircaseSubgroup:
        return StaircaseSubgroup(spec, canonical_coefficients(spec, raw))

    @staticmethod
    def from_expr(spec: GroupSpec, expr: StairExpr) -> StaircaseSubgroup:
        return StaircaseSubgroup.from_coeffs(spec, _raw_coefficients(spec, expr))

    @staticmethod
    def from_terms(spec: GroupSpec, terms: Iterable[tuple[int, int]], tail: int) -> StaircaseSubgroup:
        return StaircaseSubgroup.from_expr(spec, StairExpr(tuple(terms), tail))

    @staticmethod
    def convex(spec: GroupSpec, level: int) -> StaircaseSubgroup:
        return StaircaseSubgroup.from_terms(spec, [(level, 1)], 0)

    @staticmethod
    def convex_plus(spec: GroupSpec, level: int, n: int) -> StaircaseSubgroup:
        """CS(level) + n*G."""
        return StaircaseSubgroup.from_terms(spec, [(level, 1)], n)

    @staticmethod
    def multiple(spec: GroupSpec, n: int) -> StaircaseSubgroup:
        return StaircaseSubgroup.from_terms(spec, [], n)

    @staticmethod
    def whole(spec: GroupSpec) -> StaircaseSubgroup:
        return StaircaseSubgroup.multiple(spec, 1)

    @staticmethod
    def zero(spec: GroupSpec) -> StaircaseSubgroup:
        return StaircaseSubgroup(spec, (0,) * spec.k)

    # Structure

    def _same(self, other: StaircaseSubgroup) -> None:
        if other.spec is not self.spec and other.spec != self.spec:
            raise SpecError("staircases over different groups")

    def coefficient(self, i: int) -> int:
        """1-based coefficient c_i."""
        return self.coeffs[i - 1]

    @property
    def tail(self) -> int:
        return self.coeffs[0] if self.coeffs else 1

    def zero_prefix(self) -> int:
        """Number of leading zero coefficients: the subgroup lies in CS(z)."""
        z = 0
        for c in self.coeffs:
            if c != 0:
                break
            z += 1
        return z

    def is_full_rank(self) -> bool:
        return all(c != 0 for c in self.coeffs)

    def to_expr(self) -> StairExpr:
        k = self.spec.k
        c = self.coeffs
        if k == 0:
            return StairExpr((), 1)
        terms: list[tuple[int, int]] = []
        tail = c[0]
        # Walk upward from the bottom: each new nonzero value w starting at
        # coordinate i (1-based, first coordinate carrying w) gives w*CS(i-1).
        i = k
        values: list[tuple[int, int]] = []
        while i >= 1:
            w = c[i - 1]
            if w == 0:
                break
            j = i
            while j - 1 >= 1 and c[j - 2] == w:
                j -= 1
            values.append((j - 1, w))
            i = j - 1
        if tail != 0:
            values = values[:-1]  # the top block is the tail itself
        terms.extend(values)
        return StairExpr(tuple(terms), tail)

    def __str__(self) -> str:
        return str(self.to_expr())

    # Lattice operations

    def sum(self, other: StaircaseSubgroup) -> StaircaseSubgroup:
        self._same(other)
        return StaircaseSubgroup.from_coeffs(self.spec, [math.gcd(a, b) for a, b in zip(self.coeffs, other.coeffs)])

    def intersect(self, other: StaircaseSubgroup) -> StaircaseSubgroup:
        self._same(other)
        return StaircaseSubgroup.from_coeffs(self.spec, [lcm0(a, b) for a, b in zip(self.coeffs, other.coeffs)])

    __add__ = sum
    __and__ = intersect

    def scale(self, n: int) -> StaircaseSubgroup:
        """n*H."""
        return StaircaseSubgroup.from_coeffs(self.spec, [n * c for c in self.coeffs])

    def issubset(self, other: StaircaseSubgroup) -> bool:
        return self.intersect(other) == self

    __le__ = issubset

    def contains(self, g: GroupElement) -> bool:
        self.spec.require_computable()
        return all(comp.in_multiple(v, c) for comp, v, c in zip(self.spec.components, g.coords, self.coeffs))

    __contains__ = contains

    def coordinate_index(self, i: int, small: int) -> ExtNat:
        """[c_i A_i : small*A_i] for a single coordinate, c_i dividing small."""
        comp = self.spec.component(i)
        big = self.coeffs[i - 1]
        if big == 0:
            return ONE
        if small == 0:
            return INF
        rb, rs = comp.strip(big), comp.strip(small)
        ratio = rs // rb
        out = ONE
        for p, e in factorization(ratio):
            out = out * _power(p, e, comp.dim(p))
        return out

    def index_of(self, small: StaircaseSubgroup) -> ExtNat:
        """[self : small]."""
        self._same(small)
        if not small.issubset(self):
            raise SpecError(f"{small} is not contained in {self}")
        out = ONE
        for i in range(1, self.spec.k + 1):
            out = out * self.coordinate_index(i, small.coeffs[i - 1])
        return out

    # Element helpers

    def reduce(self, g: GroupElement) -> GroupElement:
        """Canonical representative of g + H: coordinates reduced to the smallest non-negative residue."""
        return GroupElement(tuple(reduce_coordinate(self.spec, i + 1, v, c) for i, (v, c) in enumerate(zip(g.coords, self.coeffs))))

    def coset_representatives(self, small: StaircaseSubgroup) -> Iterator[GroupElement]:
        """Canonical representatives of self/small in a fixed order (may be infinite)."""
        self._same(small)
        if not small.issubset(self):
            raise SpecError(f"{small} is not contained in {self}")
        per = [_coordinate_reps(self.spec, i + 1, b, s) for i, (b, s) in enumerate(zip(self.coeffs, small.coeffs))]
        return _product_lazy(per)


def _power(p: int, e: int, d: ExtNat) -> ExtNat:
    if e == 0 or d == 0:
        return ONE
    if not d.is_finite:
        return INF
    return ExtNat(p ** (e * d.value))


def reduce_coordinate(spec: GroupSpec, i: int, v: Fraction, c: int) -> Fraction:
    """Smallest non-negative representative of v modulo c*A_i."""
    comp = spec.component(i)
    if c == 0:
        return Fraction(v)
    real = comp.realization
    if real is None:
        raise SpecError("reduction needs a realized component")
    if real.is_rationals:
        return Fraction(0)
    m = comp.strip(c)
    if m == 1:
        return Fraction(0)
    v = Fraction(v)
    num, den = v.numerator, v.denominator
    # den is a product of invertible primes, hence a unit modulo m
    return Fraction((num * pow(den, -1, m)) % m)


def _coordinate_reps(spec: GroupSpec, i: int, big: int, small: int):
    """Representatives of big*A_i / small*A_i as an iterable (list or generator)."""
    comp = spec.component(i)
    if big == 0:
        return [Fraction(0)]
    if small == 0:
        def gen():
            yield Fraction(0)
            n = 1
            while True:
                yield Fraction(big * n)
                yield Fraction(-big * n)
                n += 1
        return gen()
    rb, rs = comp.strip(big), comp.strip(small)
    return [Fraction(big * r) for r in range(rs // rb)] if comp.realization is not None else []


def _product_lazy(per: list) -> Iterator[GroupElement]:
    """Cartesian product where later coordinates vary fastest; infinite factors are diagonalised."""
    finite = all(isinstance(p, list) for p in per)
    if finite:
        import itertools

        for combo in itertools.product(*per):
            yield GroupElement(combo)
        return
    # Enumerate by growing prefixes of each infinite generator.
    caches: list[list[Fraction]] = []
    gens = []
    for p in per:
        if isinstance(p, list):
            caches.append(p)
            gens.append(None)
        else:
            caches.append([])
            gens.append(iter(p))
    seen = set()
    size = 1
    import itertools

    while True:
        for idx, g in enumerate(gens):
            if g is not None:
                while len(caches[idx]) < size:
                    caches[idx].append(next(g))
        for combo in itertools.product(*caches):
            if combo not in seen:
                seen.add(combo)
                yield GroupElement(combo)
        size += 1


def intersect_all(spec: GroupSpec, hs: Iterable[StaircaseSubgroup]) -> StaircaseSubgroup:
    return reduce(lambda a, b: a.intersect(b), hs, StaircaseSubgroup.whole(spec))


def sum_all(spec: GroupSpec, hs: Iterable[StaircaseSubgroup]) -> StaircaseSubgroup:
    return reduce(lambda a, b: a.sum(b), hs, StaircaseSubgroup.zero(spec))


def index(big: StaircaseSubgroup, small: StaircaseSubgroup) -> ExtNat:
    return big.index_of(small)


def parse_staircase(spec: GroupSpec, text: str) -> StaircaseSubgroup:
    from .syntax import parse_subgroup

    return StaircaseSubgroup.from_expr(spec, parse_subgroup(text))
