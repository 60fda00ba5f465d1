"""Group specifications, convex subgroups and element arithmetic.

A group is a finite lexicographic product of rank-one archimedean
components, most significant component first.  Coordinates are numbered
1..k; the convex subgroup CS(l) consists of the elements vanishing at
coordinates 1..l, so CS(0) = G and CS(k) = {0}.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Iterable, Sequence

from sympy import factorint


class SpecError(ValueError):
    """Raised for malformed or inapplicable group specifications."""


@lru_cache(maxsize=4096)
def prime_factors(n: int) -> tuple[int, ...]:
    """Distinct prime divisors of |n| in increasing order."""
    n = abs(n)
    if n < 2:
        return ()
    return tuple(sorted(factorint(n)))


@lru_cache(maxsize=4096)
def factorization(n: int) -> tuple[tuple[int, int], ...]:
    n = abs(n)
    if n < 2:
        return ()
    return tuple(sorted(factorint(n).items()))


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def lcm0(a: int, b: int) -> int:
    """lcm on natural numbers where 0 is absorbing (0 is the trivial ideal)."""
    if a == 0 or b == 0:
        return 0
    return a * b // math.gcd(a, b)


@total_ordering
@dataclass(frozen=True)
class ExtNat:
    """A natural number or infinity."""

    value: int | None  # None stands for infinity

    def __post_init__(self) -> None:
        if self.value is not None and self.value < 0:
            raise ValueError("ExtNat must be non-negative")

    @staticmethod
    def of(v: int | ExtNat) -> ExtNat:
        return v if isinstance(v, ExtNat) else ExtNat(int(v))

    @property
    def is_finite(self) -> bool:
        return self.value is not None

    def __add__(self, other: int | ExtNat) -> ExtNat:
        other = ExtNat.of(other)
        if self.value is None or other.value is None:
            return INF
        return ExtNat(self.value + other.value)

    __radd__ = __add__

    def __mul__(self, other: int | ExtNat) -> ExtNat:
        other = ExtNat.of(other)
        if self.value == 0 or other.value == 0:
            return ExtNat(0)
        if self.value is None or other.value is None:
            return INF
        return ExtNat(self.value * other.value)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            return self.value == other
        if isinstance(other, ExtNat):
            return self.value == other.value
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def __lt__(self, other: int | ExtNat) -> bool:
        other = ExtNat.of(other)
        if self.value is None:
            return False
        if other.value is None:
            return True
        return self.value < other.value

    def __int__(self) -> int:
        if self.value is None:
            raise OverflowError("infinite ExtNat")
        return self.value

    def __str__(self) -> str:
        return "inf" if self.value is None else str(self.value)

    def __repr__(self) -> str:
        return f"ExtNat({self})"


INF = ExtNat(None)
ZERO = ExtNat(0)
ONE = ExtNat(1)


def parse_extnat(text: str) -> ExtNat:
    text = text.strip()
    if text in ("inf", "infinity", "oo"):
        return INF
    try:
        return ExtNat(int(text))
    except ValueError:
        raise SpecError(f"bad dimension {text!r}") from None


@dataclass(frozen=True)
class PrimeDimProfile:
    """dim_p for every prime p: finitely many exceptions plus a default."""

    exceptions: tuple[tuple[int, ExtNat], ...] = ()
    default: ExtNat = ONE

    def __post_init__(self) -> None:
        cleaned = {}
        for p, d in self.exceptions:
            if prime_factors(p) != (p,):
                raise SpecError(f"{p} is not a prime")
            d = ExtNat.of(d)
            if d != self.default:
                cleaned[p] = d
        object.__setattr__(self, "exceptions", tuple(sorted(cleaned.items())))
        object.__setattr__(self, "default", ExtNat.of(self.default))

    @staticmethod
    def make(exceptions: dict[int, int | ExtNat] | None = None, default: int | ExtNat = 1) -> PrimeDimProfile:
        exc = tuple((p, ExtNat.of(d)) for p, d in (exceptions or {}).items())
        return PrimeDimProfile(exc, ExtNat.of(default))

    def dim(self, p: int) -> ExtNat:
        for q, d in self.exceptions:
            if q == p:
                return d
        return self.default

    def exception_primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.exceptions)

    def __str__(self) -> str:
        inner = ",".join(f"{p}:{d}" for p, d in self.exceptions)
        return f"dims{{{inner}}} default {self.default}"


ALL = "all"


@dataclass(frozen=True)
class RankOneRealization:
    """A subgroup of Q: Z with the listed primes inverted, or Q itself."""

    invertible_primes: frozenset[int] | str = frozenset()

    def __post_init__(self) -> None:
        inv = self.invertible_primes
        if inv != ALL:
            inv = frozenset(inv)
            for p in inv:
                if prime_factors(p) != (p,):
                    raise SpecError(f"{p} is not a prime")
            object.__setattr__(self, "invertible_primes", inv)

    @property
    def is_rationals(self) -> bool:
        return self.invertible_primes == ALL

    def profile(self) -> PrimeDimProfile:
        if self.is_rationals:
            return PrimeDimProfile((), ZERO)
        return PrimeDimProfile(tuple((p, ZERO) for p in self.invertible_primes), ONE)

    def inverts(self, p: int) -> bool:
        return self.is_rationals or p in self.invertible_primes

    def __str__(self) -> str:
        if self.is_rationals:
            return "Q"
        if not self.invertible_primes:
            return "Z"
        return "Z_inv{" + ",".join(str(p) for p in sorted(self.invertible_primes)) + "}"


@dataclass(frozen=True)
class ArchComponent:
    name: str
    dims: PrimeDimProfile
    discrete: bool = False
    realization: RankOneRealization | None = None

    def __post_init__(self) -> None:
        if self.discrete and (self.dims.default != 1 or self.dims.exceptions):
            raise SpecError(f"component {self.name}: discrete needs dims default 1 with no exceptions")
        if self.realization is not None:
            if self.realization.profile() != self.dims:
                raise SpecError(f"component {self.name}: dims do not match realization {self.realization}")
            is_z = not self.realization.is_rationals and not self.realization.invertible_primes
            if self.discrete != is_z:
                raise SpecError(f"component {self.name}: discrete iff realized as Z")

    @staticmethod
    def realized(name: str, realization: RankOneRealization) -> ArchComponent:
        discrete = not realization.is_rationals and not realization.invertible_primes
        return ArchComponent(name, realization.profile(), discrete, realization)

    def dim(self, p: int) -> ExtNat:
        return self.dims.dim(p)

    def divisible_by(self, n: int) -> bool:
        """n-divisible iff dim_p = 0 for every prime p dividing n."""
        return all(self.dims.dim(p) == 0 for p in prime_factors(n))

    def strip(self, m: int) -> int:
        """Remove from m the primes by which this component is divisible."""
        if m == 0:
            return 0
        m = abs(m)
        for p, e in factorization(m):
            if self.dims.dim(p) == 0:
                m //= p ** e
        return m

    def in_multiple(self, v: Fraction, m: int) -> bool:
        """Is v in m*A for the realized component A?"""
        if m == 0:
            return v == 0
        real = self.realization
        if real is None:
            raise SpecError(f"component {self.name} has no realization")
        q = Fraction(v) / m
        if real.is_rationals:
            return True
        den = q.denominator
        for p in real.invertible_primes:
            while den % p == 0:
                den //= p
        return den == 1

    def admits(self, v: Fraction) -> bool:
        return self.in_multiple(v, 1)

    def __str__(self) -> str:
        parts = [f"component {self.name}: {self.dims}"]
        if self.discrete:
            parts.append("discrete")
        if self.realization is not None:
            parts.append(f"realize {self.realization}")
        return " ".join(parts)


class Cmp(enum.Enum):
    LT = -1
    EQ = 0
    GT = 1


@dataclass(frozen=True)
class GroupElement:
    coords: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))

    def __add__(self, other: GroupElement) -> GroupElement:
        if len(other.coords) != len(self.coords):
            raise SpecError("elements of different groups")
        return GroupElement(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> GroupElement:
        return GroupElement(tuple(-a for a in self.coords))

    def __sub__(self, other: GroupElement) -> GroupElement:
        return self + (-other)

    def __rmul__(self, n: int) -> GroupElement:
        if not isinstance(n, int):
            return NotImplemented
        return GroupElement(tuple(n * a for a in self.coords))

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, i: int) -> Fraction:
        return self.coords[i]

    def is_zero(self) -> bool:
        return not any(self.coords)

    def leading_index(self) -> int:
        """1-based index of the first nonzero coordinate, 0 for the zero element."""
        for i, c in enumerate(self.coords):
            if c != 0:
                return i + 1
        return 0

    def sign(self) -> int:
        for c in self.coords:
            if c != 0:
                return 1 if c > 0 else -1
        return 0

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coords) + ")"


def add(a: GroupElement, b: GroupElement) -> GroupElement:
    return a + b


def neg(a: GroupElement) -> GroupElement:
    return -a


def scalar_mul(n: int, a: GroupElement) -> GroupElement:
    return n * a


def compare(a: GroupElement, b: GroupElement) -> Cmp:
    for x, y in zip(a.coords, b.coords):
        if x != y:
            return Cmp.LT if x < y else Cmp.GT
    return Cmp.EQ


@dataclass(frozen=True)
class ConvexSubgroup:
    level: int

    def contains_subgroup(self, other: ConvexSubgroup) -> bool:
        return self.level <= other.level

    def __str__(self) -> str:
        return f"D{self.level}"


class EmptyMarker:
    """The value of A_n(0) and F_n(g) for g in nG: the empty set."""

    _instance: EmptyMarker | None = None

    def __new__(cls) -> EmptyMarker:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EMPTY"

    __str__ = __repr__


EMPTY = EmptyMarker()


@dataclass(frozen=True)
class GroupSpec:
    components: tuple[ArchComponent, ...] = ()
    omega_tower: ArchComponent | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def computable(self) -> bool:
        return self.omega_tower is None and all(c.realization is not None for c in self.components)

    @property
    def trivial(self) -> bool:
        return self.k == 0 and self.omega_tower is None

    def component(self, i: int) -> ArchComponent:
        """1-based component access."""
        return self.components[i - 1]

    def require_computable(self) -> None:
        if not self.computable:
            raise SpecError("operation needs a computable spec (all components realized, no omega tower)")

    def is_discrete(self, i: int) -> bool:
        return self.components[i - 1].discrete

    def element(self, coords: Iterable) -> GroupElement:
        self.require_computable()
        g = GroupElement(tuple(Fraction(c) for c in coords))
        if len(g) != self.k:
            raise SpecError(f"element {g} has {len(g)} coordinates, group has {self.k}")
        for c, comp in zip(g.coords, self.components):
            if not comp.admits(c):
                raise SpecError(f"coordinate {c} not in component {comp.name} ({comp.realization})")
        return g

    def zero(self) -> GroupElement:
        return GroupElement((Fraction(0),) * self.k)

    def unit(self, level: int) -> GroupElement:
        """The element with 1 at coordinate `level` and 0 elsewhere."""
        if not 1 <= level <= self.k:
            raise SpecError(f"level {level} out of range 1..{self.k}")
        return GroupElement(tuple(Fraction(int(i == level - 1)) for i in range(self.k)))

    def convex(self, level: int) -> ConvexSubgroup:
        if not 0 <= level <= self.k:
            raise SpecError(f"convex subgroup level {level} out of range 0..{self.k}")
        return ConvexSubgroup(level)

    def convex_subgroups(self) -> list[ConvexSubgroup]:
        return [ConvexSubgroup(l) for l in range(self.k + 1)]

    def in_convex(self, g: GroupElement, c: ConvexSubgroup) -> bool:
        return not any(g.coords[: c.level])

    def concat(self, other: GroupSpec) -> GroupSpec:
        """Lexicographic sum: self most significant, other below."""
        if self.omega_tower is not None:
            raise SpecError("cannot place a group below an omega tower")
        return GroupSpec(self.components + other.components, other.omega_tower)

    def __str__(self) -> str:
        lines = [str(c) for c in self.components]
        if self.omega_tower is not None:
            lines.append("omega_tower: " + str(self.omega_tower))
        return "\n".join(lines)


def realized_spec(*kinds: str | Sequence[int]) -> GroupSpec:
    """Shorthand: realized_spec('Z', 'Q', (2,)) builds [Z, Q, Z[1/2]]."""
    comps = []
    for i, kind in enumerate(kinds):
        if kind == "Z":
            real = RankOneRealization(frozenset())
        elif kind == "Q":
            real = RankOneRealization(ALL)
        else:
            real = RankOneRealization(frozenset(kind))
        comps.append(ArchComponent.realized(f"c{i + 1}", real))
    return GroupSpec(tuple(comps))


def profile_spec(*dims: dict[int, int | ExtNat] | tuple[dict, int | ExtNat]) -> GroupSpec:
    """Classification-only spec from per-component profiles."""
    comps = []
    for i, d in enumerate(dims):
        if isinstance(d, tuple):
            exc, default = d
        else:
            exc, default = d, 0
        comps.append(ArchComponent(f"c{i + 1}", PrimeDimProfile.make(exc, default)))
    return GroupSpec(tuple(comps))


# Elementary operators A, B, A_n, F_n, B_n on a lexicographic product.

def A_of(G: GroupSpec, g: GroupElement) -> ConvexSubgroup | EmptyMarker:
    """Largest convex subgroup not containing g."""
    i = g.leading_index()
    if i == 0:
        return EMPTY
    return ConvexSubgroup(i)


def B_of(G: GroupSpec, g: GroupElement) -> ConvexSubgroup | EmptyMarker:
    """Smallest convex subgroup containing g."""
    i = g.leading_index()
    if i == 0:
        return EMPTY
    return ConvexSubgroup(i - 1)


def _check_n(n: int) -> None:
    if n < 2:
        raise SpecError("n must be at least 2")


def A_n_of(G: GroupSpec, g: GroupElement, n: int) -> ConvexSubgroup | EmptyMarker:
    """Smallest convex C with B(g)/C n-regular."""
    _check_n(n)
    i = g.leading_index()
    if i == 0:
        return EMPTY
    for m in range(i, G.k + 1):
        if not G.component(m).divisible_by(n):
            return ConvexSubgroup(m)
    return ConvexSubgroup(G.k)


def B_n_of(G: GroupSpec, g: GroupElement, n: int) -> ConvexSubgroup:
    """Largest convex C with C/A(g) n-regular; h in B_n(g) iff A_n(h) is inside A_n(g)."""
    _check_n(n)
    i = g.leading_index()
    if i == 0:
        return ConvexSubgroup(G.k)
    for m in range(i - 1, 0, -1):
        if not G.component(m).divisible_by(n):
            return ConvexSubgroup(m)
    return ConvexSubgroup(0)


def F_n_of(G: GroupSpec, g: GroupElement, n: int) -> ConvexSubgroup | EmptyMarker:
    """Largest convex C with C disjoint from g + nG."""
    _check_n(n)
    for i, (c, comp) in enumerate(zip(g.coords, G.components), start=1):
        if not comp.in_multiple(c, n):
            return ConvexSubgroup(i)
    return EMPTY


def subgroup_leq(a: ConvexSubgroup | EmptyMarker, b: ConvexSubgroup | EmptyMarker) -> bool:
    """Inclusion a ⊆ b where EMPTY is below everything."""
    if a is EMPTY:
        return True
    if b is EMPTY:
        return False
    return a.level >= b.level
