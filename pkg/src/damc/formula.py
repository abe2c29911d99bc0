"""Linear-arithmetic terms, atoms, formulas, and variable assignments.

All coefficients and constants are exact rationals (`fractions.Fraction`);
floats are rejected at construction time.  Every value here is immutable
and hashable, so formulas can be shared freely across data structures.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Union


class FormulaError(Exception):
    """Base class for formula-level errors."""


class MissingVariable(FormulaError):
    """An assignment is not total on the formula's free variables."""


class QuantifiedInput(FormulaError):
    """A quantifier appeared where only quantifier-free input is allowed."""


class MixedAtom(FormulaError):
    """restrict() found an atom straddling the variable split."""


# Variable kinds: plain state variables, read/write transition copies, and
# numbered copies used for quantified snapshots.
PLAIN = "plain"
READ = "r"
WRITE = "w"
INDEXED = "ix"


@dataclass(frozen=True, order=True)
class VarId:
    name: str
    kind: str = PLAIN
    idx: int = -1

    def __str__(self) -> str:
        if self.kind == READ:
            return f"{self.name}^r"
        if self.kind == WRITE:
            return f"{self.name}^w"
        if self.kind == INDEXED:
            return f"{self.name}#{self.idx}"
        return self.name

    def plain(self) -> "VarId":
        return VarId(self.name)

    def read(self) -> "VarId":
        return VarId(self.name, READ)

    def write(self) -> "VarId":
        return VarId(self.name, WRITE)

    def indexed(self, i: int) -> "VarId":
        return VarId(self.name, INDEXED, i)


@dataclass(frozen=True)
class Domain:
    tag: str  # "int" | "rat"

    def __str__(self) -> str:
        return self.tag


INT = Domain("int")
RAT = Domain("rat")

RatLike = Union[int, str, Fraction]


def rat(x: RatLike) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floats are forbidden; use Fraction or str")
    return Fraction(x)


def _merge(coeffs: Iterable[tuple[VarId, Fraction]]) -> tuple[tuple[VarId, Fraction], ...]:
    acc: dict[VarId, Fraction] = {}
    for v, c in coeffs:
        acc[v] = acc.get(v, Fraction(0)) + c
    return tuple(sorted((v, c) for v, c in acc.items() if c != 0))


@dataclass(frozen=True)
class Term:
    """A linear expression in coefficient-map form: sum of c*v plus a constant.

    Zero coefficients are dropped and variables are kept sorted, so equal
    expressions have identical representations.
    """

    coeffs: tuple[tuple[VarId, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def of(x: Union["Term", VarId, RatLike]) -> "Term":
        if isinstance(x, Term):
            return x
        if isinstance(x, VarId):
            return Term(((x, Fraction(1)),))
        return Term((), rat(x))

    @staticmethod
    def make(coeffs: Iterable[tuple[VarId, Fraction]], const: RatLike = 0) -> "Term":
        return Term(_merge(coeffs), rat(const))

    def __add__(self, other) -> "Term":
        o = Term.of(other)
        return Term(_merge(self.coeffs + o.coeffs), self.const + o.const)

    def __sub__(self, other) -> "Term":
        return self + (-Term.of(other))

    def __neg__(self) -> "Term":
        return self.scale(Fraction(-1))

    def scale(self, k: Fraction) -> "Term":
        if k == 0:
            return Term()
        return Term(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    def vars(self) -> set[VarId]:
        return {v for v, _ in self.coeffs}

    def value(self, alpha: Mapping[VarId, Fraction]) -> Fraction:
        total = self.const
        for v, c in self.coeffs:
            if v not in alpha:
                raise MissingVariable(f"no value for {v}")
            total += c * alpha[v]
        return total

    def subst(self, mapping: Mapping[VarId, "Term"]) -> "Term":
        out = Term((), self.const)
        for v, c in self.coeffs:
            if v in mapping:
                out = out + mapping[v].scale(c)
            else:
                out = out + Term(((v, c),))
        return out

    def __str__(self) -> str:
        return fmt_term(self)


def term(x) -> Term:
    return Term.of(x)


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class TrueF(Formula):
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class FalseF(Formula):
    def __str__(self) -> str:
        return "false"


TRUE = TrueF()
FALSE = FalseF()

OPS = ("=", "!=", "<", "<=", ">", ">=")
_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "!=": "!="}
_NEG = {"=": "!=", "!=": "=", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


@dataclass(frozen=True)
class Atom(Formula):
    """lhs op rhs, kept as written; solving uses the normalized view."""

    lhs: Term
    op: str
    rhs: Term

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"bad comparison operator {self.op!r}")

    def __str__(self) -> str:
        return f"{fmt_term(self.lhs)} {self.op} {fmt_term(self.rhs)}"


def atom(lhs, op: str, rhs) -> Atom:
    return Atom(Term.of(lhs), op, Term.of(rhs))


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    def __str__(self) -> str:
        return fmt_formula(self)


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    def __str__(self) -> str:
        return fmt_formula(self)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def __str__(self) -> str:
        return fmt_formula(self)


@dataclass(frozen=True)
class Exists(Formula):
    bound: tuple[VarId, ...]
    body: Formula

    def __str__(self) -> str:
        return fmt_formula(self)


def conj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, TrueF):
            continue
        if isinstance(p, FalseF):
            return FALSE
        if isinstance(p, And):
            flat.extend(p.args)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, FalseF):
            continue
        if isinstance(p, TrueF):
            return TRUE
        if isinstance(p, Or):
            flat.extend(p.args)
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(p: Formula) -> Formula:
    if isinstance(p, TrueF):
        return FALSE
    if isinstance(p, FalseF):
        return TRUE
    if isinstance(p, Not):
        return p.arg
    return Not(p)


def exists(bound: Iterable[VarId], body: Formula) -> Formula:
    bs = tuple(bound)
    if not bs:
        return body
    return Exists(bs, body)


# ---------------------------------------------------------------------------
# Normalized atoms


@dataclass(frozen=True)
class NormAtom:
    """Canonical form `sum(coeffs) op const` with op in {=, !=, <=, <}.

    Coefficients are scaled to primitive integers; equalities additionally
    get a canonical sign.  Ground atoms have an empty coefficient vector.
    """

    coeffs: tuple[tuple[VarId, Fraction], ...]
    op: str
    const: Fraction

    def vars(self) -> set[VarId]:
        return {v for v, _ in self.coeffs}

    def truth(self) -> Optional[bool]:
        """Truth value of a ground atom, None if not ground."""
        if self.coeffs:
            return None
        z = Fraction(0)
        if self.op == "=":
            return z == self.const
        if self.op == "!=":
            return z != self.const
        if self.op == "<=":
            return z <= self.const
        return z < self.const

    def to_atom(self) -> Atom:
        # flip all-negative inequalities so they print as lower bounds
        if self.op in ("<=", "<") and self.coeffs and self.coeffs[0][1] < 0:
            flipped = tuple((v, -c) for v, c in self.coeffs)
            op = ">=" if self.op == "<=" else ">"
            return Atom(Term(flipped), op, Term((), -self.const))
        return Atom(Term(self.coeffs), self.op, Term((), self.const))

    def holds(self, alpha: Mapping[VarId, Fraction]) -> bool:
        val = Term(self.coeffs).value(alpha)
        if self.op == "=":
            return val == self.const
        if self.op == "!=":
            return val != self.const
        if self.op == "<=":
            return val <= self.const
        return val < self.const


def _primitive_scale(coeffs: tuple[tuple[VarId, Fraction], ...]) -> Fraction:
    """Positive factor making the coefficient vector primitive integers."""
    dens = [c.denominator for _, c in coeffs]
    nums = [abs(c.numerator) for _, c in coeffs]
    if not coeffs:
        return Fraction(1)
    from math import gcd, lcm

    l = lcm(*dens) if dens else 1
    g = gcd(*[n * l // d for n, d in zip(nums, dens)]) if nums else 1
    return Fraction(l, g if g else 1)


_NORM_CACHE: dict = {}


def norm_atom(a: Atom) -> NormAtom:
    hit = _NORM_CACHE.get(a)
    if hit is not None:
        return hit
    out = _norm_atom(a)
    if len(_NORM_CACHE) < 200_000:
        _NORM_CACHE[a] = out
    return out


def _norm_atom(a: Atom) -> NormAtom:
    t = a.lhs - a.rhs
    op = a.op
    if op in (">", ">="):
        t = -t
        op = "<" if op == ">" else "<="
    coeffs, const = t.coeffs, -t.const
    if coeffs:
        k = _primitive_scale(coeffs)
        coeffs = tuple((v, c * k) for v, c in coeffs)
        const = const * k
        if op in ("=", "!=") and coeffs[0][1] < 0:
            coeffs = tuple((v, -c) for v, c in coeffs)
            const = -const
    return NormAtom(coeffs, op, const)


# ---------------------------------------------------------------------------
# Core operations


def evaluate(phi: Formula, alpha: Mapping[VarId, Fraction]) -> bool:
    """Standard boolean/arithmetic semantics; quantifier-free input only."""
    if isinstance(phi, TrueF):
        return True
    if isinstance(phi, FalseF):
        return False
    if isinstance(phi, Atom):
        return norm_atom(phi).holds(alpha)
    if isinstance(phi, And):
        return all(evaluate(p, alpha) for p in phi.args)
    if isinstance(phi, Or):
        return any(evaluate(p, alpha) for p in phi.args)
    if isinstance(phi, Not):
        return not evaluate(phi.arg, alpha)
    if isinstance(phi, Exists):
        raise QuantifiedInput("evaluate() does not handle quantifiers")
    raise TypeError(f"not a formula: {phi!r}")


def free_vars(phi: Formula) -> set[VarId]:
    if isinstance(phi, (TrueF, FalseF)):
        return set()
    if isinstance(phi, Atom):
        return phi.lhs.vars() | phi.rhs.vars()
    if isinstance(phi, (And, Or)):
        out: set[VarId] = set()
        for p in phi.args:
            out |= free_vars(p)
        return out
    if isinstance(phi, Not):
        return free_vars(phi.arg)
    if isinstance(phi, Exists):
        return free_vars(phi.body) - set(phi.bound)
    raise TypeError(f"not a formula: {phi!r}")


def max_index(phi: Formula) -> int:
    """Largest numeric index used by any variable in phi (-1 if none)."""
    best = -1
    for v in _all_vars(phi):
        if v.kind == INDEXED:
            best = max(best, v.idx)
    return best


def _all_vars(phi: Formula) -> set[VarId]:
    if isinstance(phi, Exists):
        return set(phi.bound) | _all_vars(phi.body)
    if isinstance(phi, (And, Or)):
        out: set[VarId] = set()
        for p in phi.args:
            out |= _all_vars(p)
        return out
    if isinstance(phi, Not):
        return _all_vars(phi.arg)
    if isinstance(phi, Atom):
        return phi.lhs.vars() | phi.rhs.vars()
    return set()


def substitute(phi: Formula, mapping: Mapping[VarId, Term]) -> Formula:
    """Replace free occurrences, renaming binders to avoid capture."""
    if isinstance(phi, (TrueF, FalseF)):
        return phi
    if isinstance(phi, Atom):
        return Atom(phi.lhs.subst(mapping), phi.op, phi.rhs.subst(mapping))
    if isinstance(phi, And):
        return conj(*(substitute(p, mapping) for p in phi.args))
    if isinstance(phi, Or):
        return disj(*(substitute(p, mapping) for p in phi.args))
    if isinstance(phi, Not):
        return neg(substitute(phi.arg, mapping))
    if isinstance(phi, Exists):
        live = {v: t for v, t in mapping.items() if v not in phi.bound}
        if not live:
            return phi
        clash = set()
        for t in live.values():
            clash |= t.vars()
        bound = list(phi.bound)
        body = phi.body
        fresh_base = max(
            max_index(phi),
            max((v.idx for t in live.values() for v in t.vars() if v.kind == INDEXED), default=-1),
        )
        renames: dict[VarId, Term] = {}
        for i, b in enumerate(bound):
            if b in clash:
                fresh_base += 1
                nb = b.indexed(fresh_base) if b.kind != INDEXED else VarId(b.name, INDEXED, fresh_base)
                renames[b] = Term.of(nb)
                bound[i] = nb
        if renames:
            body = substitute(body, renames)
        return Exists(tuple(bound), substitute(body, live))
    raise TypeError(f"not a formula: {phi!r}")


def atoms_of(phi: Formula) -> Iterator[Atom]:
    if isinstance(phi, Atom):
        yield phi
    elif isinstance(phi, (And, Or)):
        for p in phi.args:
            yield from atoms_of(p)
    elif isinstance(phi, Not):
        yield from atoms_of(phi.arg)
    elif isinstance(phi, Exists):
        yield from atoms_of(phi.body)


def restrict(phi: Formula, keep: set[VarId]) -> Formula:
    """Conjuncts of phi whose atoms mention only variables in `keep`.

    Requires each conjunct to live entirely on one side of the split.
    """
    parts: list[Formula] = []
    for p in _conjuncts(phi):
        fv = free_vars(p)
        if fv <= keep:
            parts.append(p)
        elif fv & keep:
            raise MixedAtom(f"{p} mentions both sides of the variable split")
    return conj(*parts)


def _conjuncts(phi: Formula) -> Iterator[Formula]:
    if isinstance(phi, And):
        for p in phi.args:
            yield from _conjuncts(p)
    elif not isinstance(phi, TrueF):
        yield phi


# ---------------------------------------------------------------------------
# Printing


def fmt_rat(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def fmt_term(t: Term) -> str:
    if not t.coeffs:
        return fmt_rat(t.const)
    bits: list[str] = []
    for v, c in t.coeffs:
        if not bits:
            if c == 1:
                bits.append(str(v))
            elif c == -1:
                bits.append(f"-{v}")
            else:
                bits.append(f"{fmt_rat(c)}*{v}")
        else:
            sign = "+" if c > 0 else "-"
            mag = abs(c)
            core = str(v) if mag == 1 else f"{fmt_rat(mag)}*{v}"
            bits.append(f"{sign} {core}")
    if t.const != 0:
        sign = "+" if t.const > 0 else "-"
        bits.append(f"{sign} {fmt_rat(abs(t.const))}")
    return " ".join(bits)


def fmt_formula(phi: Formula) -> str:
    if isinstance(phi, TrueF):
        return "true"
    if isinstance(phi, FalseF):
        return "false"
    if isinstance(phi, Atom):
        return str(phi)
    if isinstance(phi, And):
        return " && ".join(_wrap(p, for_and=True) for p in phi.args)
    if isinstance(phi, Or):
        return " || ".join(_wrap(p, for_and=False) for p in phi.args)
    if isinstance(phi, Not):
        return f"!({fmt_formula(phi.arg)})"
    if isinstance(phi, Exists):
        vs = " ".join(str(v) for v in phi.bound)
        return f"exists {vs}. ({fmt_formula(phi.body)})"
    raise TypeError(f"not a formula: {phi!r}")


def _wrap(phi: Formula, for_and: bool) -> str:
    s = fmt_formula(phi)
    if for_and and isinstance(phi, Or):
        return f"({s})"
    if isinstance(phi, Exists):
        return f"({s})"
    return s
