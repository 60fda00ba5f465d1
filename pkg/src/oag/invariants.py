"""p-dimensions, regular jumps, infinite jumps, dp-rank and classification."""
from __future__ import annotations

from dataclasses import dataclass

from .core import (
    INF,
    ZERO,
    ArchComponent,
    ConvexSubgroup,
    ExtNat,
    GroupSpec,
    PrimeDimProfile,
    SpecError,
    prime_factors,
)


def _effective_components(G: GroupSpec) -> tuple[ArchComponent, ...]:
    """Components used for jump computations.

    A divisible omega tower behaves like one extra divisible component at the
    bottom: it creates no jumps and adds nothing to any dim_p.
    """
    comps = G.components
    if G.omega_tower is not None and tower_is_divisible(G):
        comps = comps + (ArchComponent("tower", PrimeDimProfile((), ZERO)),)
    return comps


def tower_is_divisible(G: GroupSpec) -> bool:
    t = G.omega_tower
    return t is not None and t.dims.default == 0 and all(d == 0 for _, d in t.dims.exceptions)


def dim_p(G: GroupSpec, p: int, between: tuple[int, int] | None = None) -> ExtNat:
    """dim_p of CS(hi)/CS(lo) for between = (hi, lo) with hi <= lo; default G/{0}."""
    comps = _effective_components(G)
    k = len(comps)
    hi, lo = (0, k) if between is None else between
    if isinstance(hi, ConvexSubgroup):
        hi = hi.level
    if isinstance(lo, ConvexSubgroup):
        lo = lo.level
    if not 0 <= hi <= lo <= k:
        raise SpecError(f"bad level pair ({hi}, {lo})")
    total = ZERO
    for c in comps[hi:lo]:
        total = total + c.dim(p)
    return total


@dataclass(frozen=True)
class RegularJumpSet:
    n: int
    jumps: tuple[ConvexSubgroup, ...]  # increasing as subgroups (decreasing level)

    def levels(self) -> tuple[int, ...]:
        return tuple(j.level for j in self.jumps)

    def successor(self, delta: ConvexSubgroup) -> ConvexSubgroup:
        """Next larger jump, or G."""
        larger = [j for j in self.jumps if j.level < delta.level]
        return max(larger, key=lambda j: j.level) if larger else ConvexSubgroup(0)

    def __len__(self) -> int:
        return len(self.jumps)

    def __contains__(self, delta: ConvexSubgroup) -> bool:
        return delta in self.jumps

    def __str__(self) -> str:
        return "{" + ", ".join(str(j) for j in self.jumps) + "}"


def _rj_prime_levels(comps: tuple[ArchComponent, ...], p: int) -> set[int]:
    k = len(comps)
    levels = {j for j in range(1, k + 1) if comps[j - 1].dim(p) != 0}
    if k >= 1:
        levels.add(k)
    return levels


def regular_jumps(G: GroupSpec, n: int) -> RegularJumpSet:
    """RJ_n(G) as the union of RJ_p(G) over primes p dividing n."""
    if n < 2:
        raise SpecError("n must be at least 2")
    if G.omega_tower is not None and not tower_is_divisible(G):
        raise SpecError("omega tower with non-divisible template has infinitely many jumps")
    comps = _effective_components(G)
    levels: set[int] = set()
    for p in prime_factors(n):
        levels |= _rj_prime_levels(comps, p)
    jumps = tuple(ConvexSubgroup(l) for l in sorted(levels, reverse=True))
    return RegularJumpSet(n, jumps)


def infinite_jumps(G: GroupSpec, p: int) -> list[ConvexSubgroup]:
    rj = regular_jumps(G, p)
    out = []
    for delta in rj.jumps:
        succ = rj.successor(delta)
        if not dim_p(G, p, (succ.level, delta.level)).is_finite:
            out.append(delta)
    return out


def relevant_primes(G: GroupSpec) -> list[int]:
    """Primes listed as exceptions in some profile; every other prime behaves like the defaults."""
    ps: set[int] = set()
    comps = list(G.components) + ([G.omega_tower] if G.omega_tower is not None else [])
    for c in comps:
        ps.update(c.dims.exception_primes())
    return sorted(ps)


def generic_prime(G: GroupSpec) -> int:
    """A prime behaving like the default at every component."""
    rel = set(relevant_primes(G))
    p = 2
    while p in rel or prime_factors(p) != (p,):
        p += 1
    return p


@dataclass(frozen=True)
class PrimeWitness:
    prime: int | None  # None: summary for every prime not listed
    dim: ExtNat
    jumps: tuple[int, ...]
    infinite: tuple[int, ...]


@dataclass(frozen=True)
class Classification:
    kind: str
    dp_rank: ExtNat
    witnesses: tuple[PrimeWitness, ...] = ()
    reason: str = ""

    def machine(self) -> str:
        return f"kind={self.kind} dp_rank={self.dp_rank}"


def _witness(G: GroupSpec, p: int, label: int | None) -> PrimeWitness:
    rj = regular_jumps(G, p)
    inf = infinite_jumps(G, p)
    return PrimeWitness(label, dim_p(G, p), rj.levels(), tuple(d.level for d in inf))


def classify(G: GroupSpec) -> Classification:
    if G.trivial:
        return Classification("trivial", ZERO, (), "trivial group; dp-rank formula needs a nontrivial group")
    if G.omega_tower is not None and not tower_is_divisible(G):
        return Classification("not_strong", INF, (), "omega tower of non-divisible components: unbounded regular rank")
    if any(c.dims.default == INF for c in G.components):
        return Classification("not_strong", INF, (), "some component has infinite default dimension: infinitely many primes with dim_p infinite")
    primes = relevant_primes(G)
    witnesses = [_witness(G, p, p) for p in primes]
    witnesses.append(_witness(G, generic_prime(G), None))
    total = sum(len(w.infinite) for w in witnesses if w.prime is not None)
    rank = ExtNat(1 + total)
    finite = all(w.dim.is_finite for w in witnesses)
    kind = "dp_minimal" if finite else "strong_finite_rank"
    return Classification(kind, rank, tuple(witnesses))


def dp_rank(G: GroupSpec) -> ExtNat:
    return classify(G).dp_rank


def vca_number(G: GroupSpec) -> ExtNat:
    """Number of directed families needed: 1 for the order plus one per surviving (p, D).

    For each prime the chain RJ_p + {G} is cut into classes of members a
    finite p-dimension apart (their congruences differ by finitely many
    cosets, so they collapse to NA formulas); a class needs its own family
    exactly when the quotient of G by its bottom member has infinite p-dimension.
    """
    if G.trivial:
        return ZERO
    if G.omega_tower is not None and not tower_is_divisible(G):
        return INF
    comps = _effective_components(G)
    if any(c.dims.default == INF for c in comps):
        return INF
    total = 1
    for p in relevant_primes(G):
        chain = sorted(_rj_prime_levels(comps, p) | {0}, reverse=True)  # bottom first
        bottoms = [chain[0]]
        current = chain[0]
        for nxt in chain[1:]:
            gap = sum((c.dim(p) for c in comps[nxt:current]), ZERO)
            if not gap.is_finite:
                bottoms.append(nxt)
            current = nxt
        total += sum(1 for b in bottoms if not sum((c.dim(p) for c in comps[0:b]), ZERO).is_finite)
    return ExtNat(total)
