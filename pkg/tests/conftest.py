from __future__ import annotations

import os
import sys
from fractions import Fraction

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from oag.core import GroupElement, realized_spec
from oag.staircase import StairExpr, StaircaseSubgroup
from oag.syntax import load_group_spec

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SPECS = os.path.join(ROOT, "specs")

KINDS = [("Z",), ("Q",), ("Z", "Z"), ("Z", "Q"), ("Q", "Z"), ("Z", "Q", "Z"), ((2,),), ("Z", (3,))]


def spec_path(name: str) -> str:
    return os.path.join(SPECS, name)


def corpus() -> dict[str, object]:
    return {f[:-4]: load_group_spec(spec_path(f)) for f in sorted(os.listdir(SPECS)) if f.endswith(".oag")}


@pytest.fixture(scope="module", params=KINDS, ids=lambda k: "x".join(str(c) for c in k))
def G(request):
    return realized_spec(*request.param)


def coord_denominators(G) -> list[int]:
    out = []
    for i in range(1, G.k + 1):
        real = G.component(i).realization
        if real.is_rationals:
            out.append(6)
        elif real.invertible_primes:
            out.append(min(real.invertible_primes) ** 2)
        else:
            out.append(1)
    return out


def elements(G, radius: int = 12):
    dens = coord_denominators(G)
    return st.tuples(*[st.integers(-radius * d, radius * d).map(lambda n, d=d: Fraction(n, d)) for d in dens]).map(GroupElement)


def stair_exprs(G, finite: bool = True):
    tails = st.sampled_from([1, 2, 3, 4, 6, 8, 9, 12])
    if G.k == 1:
        return tails.map(lambda n: StairExpr((), n))
    term = st.tuples(st.integers(1, G.k if not finite else G.k - 1), st.sampled_from([1, 2, 3, 4]))
    return st.builds(lambda ts, n: StairExpr(tuple(ts), n), st.lists(term, max_size=2), tails if finite else st.sampled_from([0, 1, 2, 4, 6]))


def staircases(G, finite: bool = True):
    return stair_exprs(G, finite).map(lambda e: StaircaseSubgroup.from_expr(G, e))


ZQ_KINDS = [k for k in KINDS if all(c in ("Z", "Q") for c in k)]


@pytest.fixture(scope="module", params=ZQ_KINDS, ids=lambda k: "x".join(k))
def GZQ(request):
    """Specs the exact existential oracle handles (Z and Q components)."""
    return realized_spec(*request.param)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
