"""Seeded random generators shared by the rewrite tests and the acceptance suite."""
from __future__ import annotations

import random
from fractions import Fraction

from oag.core import GroupElement, GroupSpec
from oag.invariants import regular_jumps
from oag.syntax import AnAtom, DAtom, EAtom, FnAtom, MAtom, Term

DERIVED_KINDS = ("A", "F", "M", "E", "D")


def dens(G: GroupSpec, i: int) -> list[int]:
    real = G.component(i).realization
    if real.is_rationals:
        return [1, 2, 3, 4]
    return [1] + [p ** e for p in sorted(real.invertible_primes) for e in (1, 2)]


def element(G: GroupSpec, rng: random.Random, radius: int = 20) -> GroupElement:
    return GroupElement(tuple(Fraction(rng.randint(-radius, radius), rng.choice(dens(G, i + 1))) for i in range(G.k)))


def term(G: GroupSpec, rng: random.Random) -> Term:
    c = rng.choice([1, 1, 2, 3, -1])
    const = element(G, rng, 6) if rng.random() < 0.5 else None
    return Term.make({"x": c}, tuple(const.coords) if const is not None else None)


def derived_atom(G: GroupSpec, rng: random.Random, kind: str):
    t = term(G, rng)
    if kind in "AF":
        # the language indexes these atoms by n-regular jumps only
        n = rng.choice([2, 3, 4, 6, 9])
        level = rng.choice(regular_jumps(G, n).levels())
        return (AnAtom if kind == "A" else FnAtom)(n, t, level)
    if kind == "M":
        return MAtom(rng.choice([1, 2, -1, 3]), t)
    if kind == "E":
        n = rng.choice([2, 3, 4, 6])
        return EAtom(n, rng.randint(1, n - 1), t)
    p = rng.choice([2, 3])
    r = rng.randint(2, 3)
    return DAtom(p, r, rng.randint(1, r - 1), t)
