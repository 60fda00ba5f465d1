"""Formula AST, parser and printer, plus the group-spec and system file formats.

Formula grammar (lowest precedence first)::

    formula  := disj ['->' formula]
    disj     := conj ('or' conj)*
    conj     := unary ('and' unary)*
    unary    := 'not' unary | quant | 'true' | 'false' | atom | '(' formula ')'
    quant    := ('exists' | 'forall') var (',' var)* '.' formula
    atom     := term rel term
              | term '==' term 'mod' subgroup
              | 'A[' n ']' '(' term ')' '=' 'D'l  |  'F[' n ']' '(' term ')' '=' 'D'l
              | 'M[' k ']' '(' term ')'  |  'E[' n ',' k ']' '(' term ')'
              | 'D[' p ',' r ',' i ']' '(' term ')'
    rel      := '<=' | '<' | '=' | '>=' | '>' | '!='
    term     := ['-'] prod (('+' | '-') prod)*
    prod     := int '*' prod | int | var | 'one@'l | literal | '(' term ')' | '-' prod
    literal  := '(' q (',' q)* ')'          q := ['-'] int ['/' int]
    subgroup := 'G' | n 'G' | 'D'l | 'D'l '+' n 'G' | '0'
              | 'stair[' item (',' item)* ']'     item := 'D'l | m '*D'l | 'G' | m '*G'

A bare integer n in a term stands for n times the generator of a
one-component group; in larger groups use element literals or one@l.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from .core import (
    ALL,
    ArchComponent,
    GroupElement,
    GroupSpec,
    PrimeDimProfile,
    RankOneRealization,
    SpecError,
    parse_extnat,
)
from .staircase import StairExpr


class ParseError(ValueError):
    def __init__(self, message: str, pos: int | None = None, text: str = ""):
        self.pos = pos
        where = f" at offset {pos}" if pos is not None else ""
        super().__init__(f"{message}{where}" + (f": {text[pos:pos + 20]!r}" if pos is not None and text else ""))


class ScopeError(ValueError):
    pass


# Terms

@dataclass(frozen=True)
class Term:
    """sum of coeff*var + const + sum of mult*one@level + scalar."""

    coeffs: tuple[tuple[str, int], ...] = ()
    const: tuple[Fraction, ...] | None = None
    ones: tuple[tuple[int, int], ...] = ()
    scalar: int = 0

    @staticmethod
    def make(coeffs: dict[str, int] | None = None, const=None, ones: dict[int, int] | None = None, scalar: int = 0) -> Term:
        cs = tuple(sorted((v, c) for v, c in (coeffs or {}).items() if c != 0))
        if const is not None:
            const = tuple(Fraction(x) for x in const)
            if not any(const):
                const = None
        os_ = tuple(sorted((l, m) for l, m in (ones or {}).items() if m != 0))
        return Term(cs, const, os_, int(scalar))

    @staticmethod
    def var(name: str, coeff: int = 1) -> Term:
        return Term.make({name: coeff})

    @staticmethod
    def element(g: GroupElement | Iterable) -> Term:
        coords = g.coords if isinstance(g, GroupElement) else tuple(g)
        return Term.make(const=coords)

    @staticmethod
    def one(level: int, mult: int = 1) -> Term:
        return Term.make(ones={level: mult})

    def __add__(self, other: Term) -> Term:
        cs = dict(self.coeffs)
        for v, c in other.coeffs:
            cs[v] = cs.get(v, 0) + c
        if self.const is None:
            const = other.const
        elif other.const is None:
            const = self.const
        else:
            if len(self.const) != len(other.const):
                raise SpecError("element literals of different lengths")
            const = tuple(a + b for a, b in zip(self.const, other.const))
        os_ = dict(self.ones)
        for l, m in other.ones:
            os_[l] = os_.get(l, 0) + m
        return Term.make(cs, const, os_, self.scalar + other.scalar)

    def scale(self, n: int) -> Term:
        return Term.make(
            {v: n * c for v, c in self.coeffs},
            None if self.const is None else tuple(n * x for x in self.const),
            {l: n * m for l, m in self.ones},
            n * self.scalar,
        )

    def __neg__(self) -> Term:
        return self.scale(-1)

    def __sub__(self, other: Term) -> Term:
        return self + (-other)

    def coeff(self, v: str) -> int:
        for name, c in self.coeffs:
            if name == v:
                return c
        return 0

    def drop(self, v: str) -> Term:
        return Term(tuple((n, c) for n, c in self.coeffs if n != v), self.const, self.ones, self.scalar)

    def substitute(self, v: str, t: Term) -> Term:
        c = self.coeff(v)
        if c == 0:
            return self
        return self.drop(v) + t.scale(c)

    def variables(self) -> set[str]:
        return {v for v, _ in self.coeffs}

    def is_ground(self) -> bool:
        return not self.coeffs

    def is_zero(self) -> bool:
        return not self.coeffs and self.const is None and not self.ones and self.scalar == 0

    def constant_part(self) -> Term:
        return Term((), self.const, self.ones, self.scalar)

    def value(self, spec: GroupSpec, env: dict[str, GroupElement] | None = None) -> GroupElement:
        """Evaluate on a computable spec; one@l resolves to the unit at level l."""
        env = env or {}
        k = spec.k
        acc = [Fraction(0)] * k
        for v, c in self.coeffs:
            if v not in env:
                raise ScopeError(f"unbound variable {v}")
            g = env[v]
            for i in range(k):
                acc[i] += c * g.coords[i]
        if self.const is not None:
            if len(self.const) != k:
                raise SpecError(f"literal with {len(self.const)} coordinates in a {k}-component group")
            for i in range(k):
                if not spec.component(i + 1).admits(self.const[i]):
                    raise SpecError(f"literal coordinate {self.const[i]} is not in component {i + 1}")
                acc[i] += self.const[i]
        for l, m in self.ones:
            if not 1 <= l <= k:
                raise SpecError(f"one@{l} out of range")
            if not spec.is_discrete(l):
                raise SpecError(f"one@{l} needs a discrete quotient G/D{l}")
            acc[l - 1] += m
        if self.scalar:
            if k != 1:
                raise SpecError("bare integer constants are only allowed in one-component groups")
            acc[0] += self.scalar
        return GroupElement(tuple(acc))

    def __str__(self) -> str:
        return print_term(self)


ZERO_TERM = Term()


# Formulas

class Formula:
    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return conj([self, other])

    def __or__(self, other: Formula) -> Formula:
        return disj([self, other])

    def __invert__(self) -> Formula:
        return Not(self)

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


TRUE = TrueF()
FALSE = FalseF()


@dataclass(frozen=True)
class Order(Formula):
    """term op 0 with op in <=, <, =."""

    term: Term
    op: str

    def __post_init__(self) -> None:
        if self.op not in ("<=", "<", "="):
            raise ValueError(f"bad order operator {self.op}")


@dataclass(frozen=True)
class Cong(Formula):
    """term in the subgroup `mod`."""

    term: Term
    mod: StairExpr


@dataclass(frozen=True)
class AnAtom(Formula):
    n: int
    term: Term
    level: int


@dataclass(frozen=True)
class FnAtom(Formula):
    n: int
    term: Term
    level: int


@dataclass(frozen=True)
class MAtom(Formula):
    k: int
    term: Term


@dataclass(frozen=True)
class EAtom(Formula):
    n: int
    k: int
    term: Term


@dataclass(frozen=True)
class DAtom(Formula):
    p: int
    r: int
    i: int
    term: Term


DERIVED = (AnAtom, FnAtom, MAtom, EAtom, DAtom)
BASE_ATOMS = (Order, Cong)
ATOMS = BASE_ATOMS + DERIVED


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


def conj(parts: Iterable[Formula]) -> Formula:
    out: list[Formula] = []
    seen = set()
    for p in parts:
        if isinstance(p, FalseF):
            return FALSE
        if isinstance(p, TrueF):
            continue
        items = p.args if isinstance(p, And) else (p,)
        for q in items:
            if q not in seen:
                seen.add(q)
                out.append(q)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(parts: Iterable[Formula]) -> Formula:
    out: list[Formula] = []
    seen = set()
    for p in parts:
        if isinstance(p, TrueF):
            return TRUE
        if isinstance(p, FalseF):
            continue
        items = p.args if isinstance(p, Or) else (p,)
        for q in items:
            if q not in seen:
                seen.add(q)
                out.append(q)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def negate(f: Formula) -> Formula:
    if isinstance(f, TrueF):
        return FALSE
    if isinstance(f, FalseF):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def atom_term(a: Formula) -> Term:
    return a.term  # type: ignore[attr-defined]


def with_term(a: Formula, t: Term) -> Formula:
    if isinstance(a, Order):
        return Order(t, a.op)
    if isinstance(a, Cong):
        return Cong(t, a.mod)
    if isinstance(a, AnAtom):
        return AnAtom(a.n, t, a.level)
    if isinstance(a, FnAtom):
        return FnAtom(a.n, t, a.level)
    if isinstance(a, MAtom):
        return MAtom(a.k, t)
    if isinstance(a, EAtom):
        return EAtom(a.n, a.k, t)
    if isinstance(a, DAtom):
        return DAtom(a.p, a.r, a.i, t)
    raise TypeError(a)


def map_atoms(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    if isinstance(f, ATOMS):
        return fn(f)
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return Not(map_atoms(f.arg, fn))
    if isinstance(f, And):
        return And(tuple(map_atoms(a, fn) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(map_atoms(a, fn) for a in f.args))
    if isinstance(f, Exists):
        return Exists(f.var, map_atoms(f.body, fn))
    if isinstance(f, Forall):
        return Forall(f.var, map_atoms(f.body, fn))
    raise TypeError(f)


def iter_atoms(f: Formula) -> Iterator[Formula]:
    if isinstance(f, ATOMS):
        yield f
    elif isinstance(f, Not):
        yield from iter_atoms(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from iter_atoms(a)
    elif isinstance(f, (Exists, Forall)):
        yield from iter_atoms(f.body)


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, ATOMS):
        return atom_term(f).variables()
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    return set()


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Exists, Forall)):
        return False
    if isinstance(f, Not):
        return is_quantifier_free(f.arg)
    if isinstance(f, (And, Or)):
        return all(is_quantifier_free(a) for a in f.args)
    return True


def has_derived(f: Formula) -> bool:
    return any(isinstance(a, DERIVED) for a in iter_atoms(f))


def substitute(f: Formula, var: str, t: Term) -> Formula:
    """Replace free occurrences of var by t."""
    if isinstance(f, ATOMS):
        return with_term(f, atom_term(f).substitute(var, t))
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return Not(substitute(f.arg, var, t))
    if isinstance(f, And):
        return And(tuple(substitute(a, var, t) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(substitute(a, var, t) for a in f.args))
    if isinstance(f, (Exists, Forall)):
        if f.var == var:
            return f
        if f.var in t.variables():
            raise ScopeError(f"substitution would capture {f.var}")
        return type(f)(f.var, substitute(f.body, var, t))
    raise TypeError(f)


def check_scope(f: Formula, bound: frozenset[str] = frozenset()) -> None:
    if isinstance(f, (Exists, Forall)):
        if f.var in bound:
            raise ScopeError(f"variable {f.var} is quantified twice on one branch")
        check_scope(f.body, bound | {f.var})
    elif isinstance(f, Not):
        check_scope(f.arg, bound)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            check_scope(a, bound)


# Printing

def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _literal(const: tuple[Fraction, ...]) -> str:
    return "(" + ",".join(_fmt_q(c) for c in const) + ")"


def print_term(t: Term) -> str:
    parts: list[tuple[int, str]] = []  # (sign, text)
    for v, c in t.coeffs:
        parts.append((1 if c > 0 else -1, v if abs(c) == 1 else f"{abs(c)}*{v}"))
    for l, m in t.ones:
        parts.append((1 if m > 0 else -1, f"one@{l}" if abs(m) == 1 else f"{abs(m)}*one@{l}"))
    if t.const is not None:
        parts.append((1, _literal(t.const)))
    if t.scalar:
        parts.append((1 if t.scalar > 0 else -1, str(abs(t.scalar))))
    if not parts:
        return "0"
    out = ""
    for idx, (s, txt) in enumerate(parts):
        if idx == 0:
            out = txt if s > 0 else "-" + txt
        else:
            out += (" + " if s > 0 else " - ") + txt
    return out


def split_term(t: Term) -> tuple[Term, Term]:
    """t = pos - neg with only positive coefficients on each side (literals stay left)."""
    pc = {v: c for v, c in t.coeffs if c > 0}
    nc = {v: -c for v, c in t.coeffs if c < 0}
    po = {l: m for l, m in t.ones if m > 0}
    no = {l: -m for l, m in t.ones if m < 0}
    ps = t.scalar if t.scalar > 0 else 0
    ns = -t.scalar if t.scalar < 0 else 0
    const = t.const
    nconst = None
    if const is not None and all(c <= 0 for c in const):
        nconst = tuple(-c for c in const)
        const = None
    return Term.make(pc, const, po, ps), Term.make(nc, nconst, no, ns)


def print_atom(a: Formula) -> str:
    if isinstance(a, Order):
        pos, neg = split_term(a.term)
        return f"{print_term(pos)} {a.op} {print_term(neg)}"
    if isinstance(a, Cong):
        pos, neg = split_term(a.term)
        return f"{print_term(pos)} == {print_term(neg)} mod {a.mod}"
    if isinstance(a, AnAtom):
        return f"A[{a.n}]({print_term(a.term)}) = D{a.level}"
    if isinstance(a, FnAtom):
        return f"F[{a.n}]({print_term(a.term)}) = D{a.level}"
    if isinstance(a, MAtom):
        return f"M[{a.k}]({print_term(a.term)})"
    if isinstance(a, EAtom):
        return f"E[{a.n},{a.k}]({print_term(a.term)})"
    if isinstance(a, DAtom):
        return f"D[{a.p},{a.r},{a.i}]({print_term(a.term)})"
    raise TypeError(a)


def print_formula(f: Formula, prec: int = 0) -> str:
    """prec: 0 top / implication, 1 inside or, 2 inside and, 3 inside not."""
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, ATOMS):
        return print_atom(f)
    if isinstance(f, Not):
        return "not " + print_formula(f.arg, 3)
    if isinstance(f, Or):
        s = " or ".join(print_formula(a, 2 if isinstance(a, Or) else 1.5) for a in f.args)
        return f"({s})" if prec >= 1 else s
    if isinstance(f, And):
        s = " and ".join(print_formula(a, 3 if isinstance(a, And) else 2) for a in f.args)
        return f"({s})" if prec >= 2.5 else s
    if isinstance(f, (Exists, Forall)):
        q = "exists" if isinstance(f, Exists) else "forall"
        s = f"{q} {f.var}. {print_formula(f.body, 0)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f)


# Tokenizer

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<one>one@\d+)|"
    r"(?P<stair>stair\[)|"
    r"(?P<dlevel>D\d+)|"
    r"(?P<num>\d+)|"
    r"(?P<ident>[a-z][a-z0-9_]*)|"
    r"(?P<upper>[A-Z])|"
    r"(?P<op><=|>=|==|!=|->|[<>=+\-*/()\[\],.])"
    r")"
)

KEYWORDS = {"exists", "forall", "not", "and", "or", "mod", "true", "false"}


@dataclass
class Tok:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[start]!r}", start, text)
        kind = m.lastgroup
        val = m.group(kind)
        start = m.start(kind)
        if kind == "ident" and val in KEYWORDS:
            kind = "kw"
        toks.append(Tok(kind, val, start))
        pos = m.end()
    toks.append(Tok("eof", "", len(text)))
    return toks


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    # helpers
    def peek(self, off: int = 0) -> Tok:
        return self.toks[min(self.i + off, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str, off: int = 0) -> bool:
        t = self.peek(off)
        return t.text == text and t.kind in ("op", "kw", "upper")

    def expect(self, text: str) -> Tok:
        t = self.peek()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.pos, self.text)
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Tok:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"expected {what}, found {t.text or 'end of input'!r}", t.pos, self.text)
        return self.next()

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, t.pos, self.text)

    # formulas
    def parse_formula(self) -> Formula:
        left = self.parse_disj()
        if self.at("->"):
            self.next()
            right = self.parse_formula()
            return Or((Not(left), right))
        return left

    def parse_disj(self) -> Formula:
        parts = [self.parse_conj()]
        while self.at("or"):
            self.next()
            parts.append(self.parse_conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def parse_conj(self) -> Formula:
        parts = [self.parse_unary()]
        while self.at("and"):
            self.next()
            parts.append(self.parse_unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_unary(self) -> Formula:
        t = self.peek()
        if t.kind == "kw":
            if t.text == "not":
                self.next()
                return Not(self.parse_unary())
            if t.text in ("exists", "forall"):
                self.next()
                names = [self.expect_kind("ident", "variable").text]
                while self.at(","):
                    self.next()
                    names.append(self.expect_kind("ident", "variable").text)
                self.expect(".")
                body = self.parse_formula()
                for v in reversed(names):
                    body = Exists(v, body) if t.text == "exists" else Forall(v, body)
                return body
            if t.text == "true":
                self.next()
                return TRUE
            if t.text == "false":
                self.next()
                return FALSE
        if t.kind == "upper" and t.text in "AFMED" and self.peek(1).text == "[":
            return self.parse_derived()
        if t.text == "(":
            save = self.i
            try:
                return self.parse_atom()
            except ParseError:
                self.i = save
            self.next()
            f = self.parse_formula()
            self.expect(")")
            return f
        return self.parse_atom()

    def parse_int(self) -> int:
        neg = False
        if self.at("-"):
            self.next()
            neg = True
        v = int(self.expect_kind("num", "integer").text)
        return -v if neg else v

    def parse_derived(self) -> Formula:
        head = self.next().text
        self.expect("[")
        args = [self.parse_int()]
        while self.at(","):
            self.next()
            args.append(self.parse_int())
        self.expect("]")
        self.expect("(")
        term = self.parse_term()
        self.expect(")")
        need = {"A": 1, "F": 1, "M": 1, "E": 2, "D": 3}[head]
        if len(args) != need:
            raise self.error(f"{head}[...] takes {need} index argument(s)")
        if head in "AF":
            self.expect("=")
            lev = self.expect_kind("dlevel", "convex subgroup D<l>")
            level = int(lev.text[1:])
            return (AnAtom if head == "A" else FnAtom)(args[0], term, level)
        if head == "M":
            return MAtom(args[0], term)
        if head == "E":
            return EAtom(args[0], args[1], term)
        return DAtom(args[0], args[1], args[2], term)

    def parse_atom(self) -> Formula:
        lhs = self.parse_term()
        t = self.peek()
        if t.kind != "op" or t.text not in ("<=", "<", "=", ">=", ">", "!=", "=="):
            raise ParseError(f"expected a relation, found {t.text or 'end of input'!r}", t.pos, self.text)
        self.next()
        rhs = self.parse_term()
        diff = lhs - rhs
        if t.text == "==":
            if not self.at("mod"):
                raise self.error("congruence needs 'mod <subgroup>'")
            self.next()
            return Cong(diff, self.parse_subgroup())
        if t.text == "<=":
            return Order(diff, "<=")
        if t.text == "<":
            return Order(diff, "<")
        if t.text == "=":
            return Order(diff, "=")
        if t.text == ">=":
            return Order(-diff, "<=")
        if t.text == ">":
            return Order(-diff, "<")
        return Not(Order(diff, "="))

    # terms
    def parse_term(self) -> Term:
        if self.at("-"):
            self.next()
            acc = -self.parse_prod()
        else:
            acc = self.parse_prod()
        while self.at("+") or self.at("-"):
            op = self.next().text
            p = self.parse_prod()
            acc = acc + p if op == "+" else acc - p
        return acc

    def _literal_ahead(self) -> bool:
        j = self.i
        toks = self.toks
        if toks[j].text != "(":
            return False
        j += 1
        while True:
            if toks[j].text == "-":
                j += 1
            if toks[j].kind != "num":
                return False
            j += 1
            if toks[j].text == "/":
                j += 1
                if toks[j].kind != "num":
                    return False
                j += 1
            if toks[j].text == ",":
                j += 1
                continue
            return toks[j].text == ")"

    def parse_literal(self) -> Term:
        self.expect("(")
        vals = []
        while True:
            neg = False
            if self.at("-"):
                self.next()
                neg = True
            num = int(self.expect_kind("num", "number").text)
            den = 1
            if self.at("/"):
                self.next()
                den = int(self.expect_kind("num", "number").text)
                if den == 0:
                    raise self.error("zero denominator")
            q = Fraction(num, den)
            vals.append(-q if neg else q)
            if self.at(","):
                self.next()
                continue
            break
        self.expect(")")
        return Term.make(const=vals) if any(vals) else Term(const=None, scalar=0)

    def parse_prod(self) -> Term:
        t = self.peek()
        if self.at("-"):
            self.next()
            return -self.parse_prod()
        if t.kind == "num":
            n = int(self.next().text)
            if self.at("*"):
                self.next()
                return self.parse_prod().scale(n)
            return Term.make(scalar=n)
        if t.kind == "ident":
            self.next()
            return Term.var(t.text)
        if t.kind == "one":
            self.next()
            return Term.one(int(t.text[4:]))
        if t.text == "(":
            if self._literal_ahead():
                return self.parse_literal()
            self.next()
            inner = self.parse_term()
            self.expect(")")
            return inner
        raise ParseError(f"expected a term, found {t.text or 'end of input'!r}", t.pos, self.text)

    # subgroups
    def parse_subgroup(self) -> StairExpr:
        t = self.peek()
        if t.kind == "stair":
            self.next()
            terms: list[tuple[int, int]] = []
            tail = 0
            while True:
                lev, mult = self._stair_item()
                if lev is None:
                    tail = math.gcd(tail, mult)
                else:
                    terms.append((lev, mult))
                if self.at(","):
                    self.next()
                    continue
                break
            self.expect("]")
            return StairExpr(tuple(terms), tail)
        if t.kind == "upper" and t.text == "G":
            self.next()
            return StairExpr((), 1)
        if t.kind == "num":
            n = int(self.next().text)
            if self.at("*"):
                self.next()
            if self.at("G"):
                self.next()
                return StairExpr((), n)
            if n == 0:
                return StairExpr((), 0)
            raise self.error("expected G after a modulus")
        if t.kind == "dlevel":
            self.next()
            level = int(t.text[1:])
            if self.at("+"):
                self.next()
                n = 1
                if self.peek().kind == "num":
                    n = int(self.next().text)
                    if self.at("*"):
                        self.next()
                self.expect("G")
                return StairExpr(((level, 1),), n)
            return StairExpr(((level, 1),), 0)
        raise ParseError(f"expected a subgroup, found {t.text or 'end of input'!r}", t.pos, self.text)

    def _stair_item(self) -> tuple[int | None, int]:
        mult = 1
        if self.peek().kind == "num":
            mult = int(self.next().text)
            if self.at("*"):
                self.next()
        t = self.peek()
        if t.kind == "dlevel":
            self.next()
            return int(t.text[1:]), mult
        if t.kind == "upper" and t.text == "G":
            self.next()
            return None, mult
        raise ParseError("expected D<l> or G in stair[...]", t.pos, self.text)

    def done(self) -> None:
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"unexpected {t.text!r}", t.pos, self.text)


def parse(text: str) -> Formula:
    p = Parser(text)
    f = p.parse_formula()
    p.done()
    check_scope(f)
    return f


def parse_term(text: str) -> Term:
    p = Parser(text)
    t = p.parse_term()
    p.done()
    return t


def parse_subgroup(text: str) -> StairExpr:
    p = Parser(text)
    s = p.parse_subgroup()
    p.done()
    return s


def print_(f: Formula) -> str:
    return print_formula(f)


# Group-spec files

_COMPONENT = re.compile(
    r"^component\s+(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*:\s*(?P<rest>.*)$"
)


def _parse_component(name: str, rest: str, lineno: int) -> ArchComponent:
    rest = rest.strip()
    dims: dict[int, object] | None = None
    default = None
    discrete = False
    realization = None
    m = re.match(r"dims\{([^}]*)\}", rest)
    if m:
        dims = {}
        for item in filter(None, (s.strip() for s in m.group(1).split(","))):
            if ":" not in item:
                raise SpecError(f"line {lineno}: bad dims entry {item!r}")
            p, d = item.split(":", 1)
            dims[int(p)] = parse_extnat(d)
        rest = rest[m.end():].strip()
    m = re.match(r"default\s+(\S+)", rest)
    if m:
        default = parse_extnat(m.group(1))
        rest = rest[m.end():].strip()
    if rest.startswith("discrete"):
        discrete = True
        rest = rest[len("discrete"):].strip()
    m = re.match(r"realize\s+(Z_inv\{[^}]*\}|Z|Q)", rest)
    if m:
        r = m.group(1)
        if r == "Z":
            realization = RankOneRealization(frozenset())
        elif r == "Q":
            realization = RankOneRealization(ALL)
        else:
            ps = [int(x) for x in r[6:-1].split(",") if x.strip()]
            realization = RankOneRealization(frozenset(ps))
        rest = rest[m.end():].strip()
    if rest:
        raise SpecError(f"line {lineno}: unexpected {rest!r}")
    if realization is not None:
        derived = realization.profile()
        if dims is not None or default is not None:
            given = PrimeDimProfile.make(dims or {}, default if default is not None else derived.default)
            if given != derived:
                raise SpecError(f"line {lineno}: dims {given} disagree with realization {realization}")
        disc = not realization.is_rationals and not realization.invertible_primes
        if discrete and not disc:
            raise SpecError(f"line {lineno}: discrete component must be realized as Z")
        return ArchComponent(name, derived, disc, realization)
    if default is None:
        if discrete:
            default = 1
        else:
            raise SpecError(f"line {lineno}: missing 'default'")
    return ArchComponent(name, PrimeDimProfile.make(dims or {}, default), discrete, None)


def parse_group_spec(text: str) -> GroupSpec:
    comps: list[ArchComponent] = []
    tower = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if tower is not None:
            raise SpecError(f"line {lineno}: omega_tower must be the last line")
        if line.startswith("omega_tower:"):
            rest = line[len("omega_tower:"):].strip()
            m = _COMPONENT.match(rest)
            if m:
                tower = _parse_component(m.group("name"), m.group("rest"), lineno)
            else:
                tower = _parse_component("tower", rest, lineno)
            continue
        m = _COMPONENT.match(line)
        if not m:
            raise SpecError(f"line {lineno}: expected 'component <name>: ...'")
        comps.append(_parse_component(m.group("name"), m.group("rest"), lineno))
    return GroupSpec(tuple(comps), tower)


def load_group_spec(path: str) -> GroupSpec:
    with open(path) as fh:
        return parse_group_spec(fh.read())


def parse_system(spec: GroupSpec, text: str, var: str = "x"):
    """One congruence per line: `x == <element> mod <subgroup>`."""
    from .solver import CongruenceSystem
    from .staircase import StaircaseSubgroup

    cons = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        f = parse(line)
        if not isinstance(f, Cong):
            raise SpecError(f"line {lineno}: expected a congruence")
        t = f.term
        c = t.coeff(var)
        if c not in (1, -1) or t.variables() != {var}:
            raise SpecError(f"line {lineno}: constraint must have the form {var} == a mod H")
        rest = t.drop(var).scale(-c)
        cons.append((rest.value(spec), StaircaseSubgroup.from_expr(spec, f.mod)))
    return CongruenceSystem(spec, tuple(cons))
