"""Decision procedures over linear arithmetic.

DNF normalization, satisfiability with model extraction, quantifier
elimination (Fourier-Motzkin over the rationals, gap-order elimination
over the integers), logical equivalence, the K-cutoff, and recognition
of the monotonicity / gap-order constraint classes.

Everything works on the exact-rational formula IR from `formula`; there
is deliberately no SMT backend so every answer is reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import ceil, floor
from typing import Mapping, Optional, Sequence, Union

from .formula import (
    INT,
    RAT,
    And,
    Atom,
    Domain,
    Exists,
    FalseF,
    Formula,
    FormulaError,
    NormAtom,
    Not,
    Or,
    QuantifiedInput,
    Term,
    TrueF,
    VarId,
    conj,
    disj,
    max_index,
    norm_atom,
    substitute,
)


class NotGapOrder(FormulaError):
    """An atom cannot be written as x - y >= k with k a natural number."""


class UnsupportedInteger(FormulaError):
    """Integer satisfiability outside the supported fragments."""


class BudgetExceeded(FormulaError):
    """A normalization or search exceeded its size budget."""


Cube = tuple[NormAtom, ...]

_DNF_CUBE_LIMIT = 200_000


@dataclass(frozen=True)
class SatResult:
    sat: bool
    model: Optional[dict[VarId, Fraction]] = None


class ConstraintClass(Enum):
    MC = "mc"
    GC = "gc"
    GENERAL = "general-linear"


# ---------------------------------------------------------------------------
# Cube normalization

def norm_cube(atoms: Sequence[NormAtom]) -> Optional[Cube]:
    """Conjunction cleanup: dedup, constant folding, and per-direction
    bound subsumption.  Returns None when the cube is contradictory.

    Only pairwise reasoning on atoms sharing a coefficient vector is done;
    full entailment is not attempted.
    """
    lo: dict[tuple, tuple[Fraction, bool]] = {}  # vec -> (bound, strict)
    hi: dict[tuple, tuple[Fraction, bool]] = {}
    eq: dict[tuple, Fraction] = {}
    ne: dict[tuple, set[Fraction]] = {}
    order: list[tuple] = []

    def note(vec):
        if vec not in order:
            order.append(vec)

    for na in atoms:
        t = na.truth()
        if t is True:
            continue
        if t is False:
            return None
        vec, const, op = na.coeffs, na.const, na.op
        # store bounds against the canonical-sign direction
        canon = vec if vec[0][1] > 0 else tuple((v, -c) for v, c in vec)
        flipped = canon is not vec
        note(canon)
        if op in ("=", "!="):
            c = -const if flipped else const
            if op == "=":
                if canon in eq and eq[canon] != c:
                    return None
                eq[canon] = c
            else:
                ne.setdefault(canon, set()).add(c)
        else:
            strict = op == "<"
            if flipped:  # -t <= const  <=>  t >= -const
                c = -const
                cur = lo.get(canon)
                if cur is None or c > cur[0] or (c == cur[0] and strict):
                    lo[canon] = (c, strict)
            else:
                cur = hi.get(canon)
                if cur is None or const < cur[0] or (const == cur[0] and strict):
                    hi[canon] = (const, strict)

    out: list[NormAtom] = []
    for vec in order:
        l, h, e = lo.get(vec), hi.get(vec), eq.get(vec)
        nes = ne.get(vec, set())
        if e is not None:
            if e in nes:
                return None
            if l is not None and (e < l[0] or (e == l[0] and l[1])):
                return None
            if h is not None and (e > h[0] or (e == h[0] and h[1])):
                return None
            out.append(NormAtom(vec, "=", e))
            continue
        if l is not None and h is not None:
            if l[0] > h[0]:
                return None
            if l[0] == h[0] and (l[1] or h[1]):
                return None
        if l is not None:
            nvec = tuple((v, -c) for v, c in vec)
            out.append(NormAtom(nvec, "<" if l[1] else "<=", -l[0]))
        if h is not None:
            out.append(NormAtom(vec, "<" if h[1] else "<=", h[0]))
        for c in sorted(nes):
            # drop != atoms already settled by the bounds
            if l is not None and (c < l[0] or (c == l[0] and l[1])):
                continue
            if h is not None and (c > h[0] or (c == h[0] and h[1])):
                continue
            out.append(NormAtom(vec, "!=", c))
    return tuple(sorted(out, key=_atom_key))


def _atom_key(na: NormAtom):
    return (na.coeffs, na.op, na.const)


# ---------------------------------------------------------------------------
# DNF

def to_dnf(phi: Formula, expand_ne: bool = True) -> list[Cube]:
    """Disjunctive normal form as a list of cubes; [] is false, [()] true.

    `!=` atoms are expanded into the two strict alternatives, matching the
    solver-side convention.
    """
    cubes = _dnf(phi, True, expand_ne)
    seen: dict[Cube, None] = {}
    for c in cubes:
        seen.setdefault(c)
    return list(seen.keys())


def _dnf(phi: Formula, positive: bool, expand_ne: bool) -> list[Cube]:
    if isinstance(phi, TrueF):
        return [()] if positive else []
    if isinstance(phi, FalseF):
        return [] if positive else [()]
    if isinstance(phi, Not):
        return _dnf(phi.arg, not positive, expand_ne)
    if isinstance(phi, Exists):
        raise QuantifiedInput("quantifier in DNF input")
    if isinstance(phi, Atom):
        na = norm_atom(phi)
        if not positive:
            na = _negate(na)
        return _atom_cubes(na, expand_ne)
    if isinstance(phi, (And, Or)):
        is_and = isinstance(phi, And) == positive
        parts = [_dnf(p, positive, expand_ne) for p in phi.args]
        if not is_and:
            return [c for ds in parts for c in ds]
        acc: list[Cube] = [()]
        for ds in parts:
            nxt: list[Cube] = []
            for left in acc:
                for right in ds:
                    merged = norm_cube(left + right)
                    if merged is not None:
                        nxt.append(merged)
            if len(nxt) > _DNF_CUBE_LIMIT:
                raise BudgetExceeded("DNF blow-up")
            acc = nxt
        return acc
    raise TypeError(f"not a formula: {phi!r}")


def _negate(na: NormAtom) -> NormAtom:
    if na.op == "=":
        return NormAtom(na.coeffs, "!=", na.const)
    if na.op == "!=":
        return NormAtom(na.coeffs, "=", na.const)
    if na.op == "<=":  # not(t <= c)  <=>  -t < -c
        return NormAtom(tuple((v, -c) for v, c in na.coeffs), "<", -na.const)
    return NormAtom(tuple((v, -c) for v, c in na.coeffs), "<=", -na.const)


def _atom_cubes(na: NormAtom, expand_ne: bool) -> list[Cube]:
    t = na.truth()
    if t is True:
        return [()]
    if t is False:
        return []
    if na.op == "!=" and expand_ne:
        below = NormAtom(na.coeffs, "<", na.const)
        above = NormAtom(tuple((v, -c) for v, c in na.coeffs), "<", -na.const)
        return [(below,), (above,)]
    return [(na,)]


def dnf_to_formula(cubes: Sequence[Cube]) -> Formula:
    return disj(*(conj(*(na.to_atom() for na in cube)) for cube in cubes))


# ---------------------------------------------------------------------------
# Rational Fourier-Motzkin elimination

def _bounds_on(cube: Cube, x: VarId):
    """Split a cube by its relation to x.

    Returns (eqs, lowers, uppers, rest) where bounds are (term, strict)
    with `term` the bounding expression, after dividing by x's coefficient.
    """
    eqs: list[Term] = []
    lowers: list[tuple[Term, bool]] = []
    uppers: list[tuple[Term, bool]] = []
    rest: list[NormAtom] = []
    for na in cube:
        cs = dict(na.coeffs)
        a = cs.get(x)
        if a is None:
            rest.append(na)
            continue
        others = Term(tuple((v, c) for v, c in na.coeffs if v != x))
        bound = (Term((), na.const) - others).scale(Fraction(1, 1) / a)
        if na.op == "=":
            eqs.append(bound)
        elif na.op == "!=":
            # callers expand != before elimination
            raise AssertionError("unexpected != during elimination")
        else:
            strict = na.op == "<"
            if a > 0:
                uppers.append((bound, strict))
            else:
                lowers.append((bound, strict))
    return eqs, lowers, uppers, rest


def _term_atom(lhs: Term, op: str, rhs: Term) -> Optional[NormAtom]:
    na = norm_atom(Atom(lhs, op, rhs))
    return na


def eliminate_rational(cube: Cube, x: VarId) -> Optional[Cube]:
    """One Fourier-Motzkin step; assumes != was expanded away."""
    eqs, lowers, uppers, rest = _bounds_on(cube, x)
    if eqs:
        rep = eqs[0]
        new = list(rest)
        for other in eqs[1:]:
            new.append(_term_atom(rep, "=", other))
        for t, strict in lowers:
            new.append(_term_atom(t, "<" if strict else "<=", rep))
        for t, strict in uppers:
            new.append(_term_atom(rep, "<" if strict else "<=", t))
        return norm_cube(new)
    new = list(rest)
    for lt, ls in lowers:
        for ut, us in uppers:
            new.append(_term_atom(lt, "<" if (ls or us) else "<=", ut))
    return norm_cube(new)


def _elim_order(cube: Cube, xs: set[VarId]) -> Optional[VarId]:
    counts: dict[VarId, int] = {}
    for na in cube:
        for v, _ in na.coeffs:
            if v in xs:
                counts[v] = counts.get(v, 0) + 1
    if not counts:
        return None
    return min(counts, key=lambda v: (counts[v], v))


def qe_cube_rational(cube: Cube, xs: set[VarId]) -> Optional[Cube]:
    live = {x for x in xs if any(x in na.vars() for na in cube)}
    cur: Optional[Cube] = cube
    while cur is not None and live:
        x = _elim_order(cur, live)
        if x is None:
            break
        live.discard(x)
        cur = eliminate_rational(cur, x)
    return cur


def _strip_exists(phi: Formula) -> tuple[list[VarId], Formula]:
    """Pull existential binders to the front, renaming them apart.

    Valid only for positive occurrences; Not over Exists is rejected.
    """
    collected: list[VarId] = []
    counter = [max_index(phi)]

    def walk(p: Formula) -> Formula:
        if isinstance(p, Exists):
            ren: dict[VarId, Term] = {}
            fresh = []
            for b in p.bound:
                counter[0] += 1
                nb = VarId(b.name, "ix", counter[0])
                ren[b] = Term.of(nb)
                fresh.append(nb)
            collected.extend(fresh)
            return walk(substitute(p.body, ren))
        if isinstance(p, And):
            return conj(*(walk(a) for a in p.args))
        if isinstance(p, Or):
            return disj(*(walk(a) for a in p.args))
        if isinstance(p, Not):
            if _has_exists(p.arg):
                raise QuantifiedInput("negated quantifier is unsupported")
            return p
        return p

    return collected, walk(phi)


def _has_exists(phi: Formula) -> bool:
    if isinstance(phi, Exists):
        return True
    if isinstance(phi, (And, Or)):
        return any(_has_exists(p) for p in phi.args)
    if isinstance(phi, Not):
        return _has_exists(phi.arg)
    return False


def qe_rational(xs: Sequence[VarId], phi: Formula) -> Formula:
    """Quantifier-free equivalent of (exists xs. phi) over the rationals."""
    inner, body = _strip_exists(phi)
    targets = set(xs) | set(inner)
    cubes = to_dnf(body)
    out: list[Cube] = []
    seen: set[Cube] = set()
    for cube in cubes:
        r = qe_cube_rational(cube, targets)
        if r is not None and r not in seen:
            seen.add(r)
            out.append(r)
    return dnf_to_formula(out)


# ---------------------------------------------------------------------------
# Gap-order machinery
#
# A gap-order constraint is x - y >= k with k a natural number and x, y
# variables or integer constants.  Internally a GC atom is a triple
# (p, q, k): p - q >= k, where p and q are VarId or int.

Node = Union[VarId, int]
Triple = tuple[Node, Node, int]


def _gc_of_ineq(vec, const, strict: bool, integer: bool = True) -> Optional[Triple]:
    """Normalize `vec <= const` (or <) into difference form p - q >= k."""
    # rewrite as  t' >= c'  with t' = -vec
    nvec = tuple((v, -c) for v, c in vec)
    c = -const
    if len(nvec) == 1:
        (v, a) = nvec[0]
        c = c / a
        if a > 0:  # v >= c
            k = _ceil_bound(c, strict, integer)
            if k is None:
                return None
            return (v, 0, k) if k >= 0 else (v, k, 0)
        # v <= -c after sign flip: a < 0 -> v <= c where c already divided
        u = _floor_bound(c, strict, integer)
        if u is None:
            return None
        return (u, v, 0) if u >= 0 else (0, v, -u)
    if len(nvec) == 2:
        (v1, a1), (v2, a2) = nvec
        if a1 == -a2 and abs(a1) == 1:
            x, y = (v1, v2) if a1 > 0 else (v2, v1)
            k = _ceil_bound(c, strict, integer)
            if k is None:
                return None
            return (x, y, k)
    return None


def _ceil_bound(c: Fraction, strict: bool, integer: bool) -> Optional[int]:
    # smallest integer value of t with t >= c (or > c)
    if not integer and (strict or c.denominator != 1):
        return None
    if c.denominator == 1:
        return int(c) + (1 if strict else 0)
    return ceil(c)


def _floor_bound(c: Fraction, strict: bool, integer: bool) -> Optional[int]:
    if not integer and (strict or c.denominator != 1):
        return None
    if c.denominator == 1:
        return int(c) - (1 if strict else 0)
    return floor(c)


def gc_norm(na: NormAtom) -> Optional[tuple[str, list[Triple]]]:
    """GC view of a normalized atom.

    Returns ("conj", triples), ("disj", triples), or None when the atom is
    not expressible; triples with negative gap make it inexpressible.
    Equalities become gap pairs; disequalities the two gap-1 alternatives.
    """
    t = na.truth()
    if t is True:
        return ("conj", [])
    if t is False:
        return ("conj", [(0, 0, 1)])  # unsatisfiable marker
    vec, const, op = na.coeffs, na.const, na.op
    if op in ("<=", "<"):
        tr = _gc_of_ineq(vec, const, op == "<")
        if tr is None or tr[2] < 0:
            return None
        return ("conj", [tr])
    if len(vec) == 1:
        (v, a) = vec[0]
        c = const / a
        if op == "=":
            if c.denominator != 1:
                return ("conj", [(0, 0, 1)])
            return ("conj", [(v, int(c), 0), (int(c), v, 0)])
        if c.denominator != 1:
            return ("conj", [])  # v != non-integer is trivially true on Z
        return ("disj", [(v, int(c), 1), (int(c), v, 1)])
    if len(vec) == 2:
        (v1, a1), (v2, a2) = vec
        if a1 == -a2 and abs(a1) == 1:
            x, y = (v1, v2) if a1 > 0 else (v2, v1)
            c = const if a1 > 0 else -const
            if op == "=":
                if c != 0:
                    return None  # x - y = c with c != 0 is not gap-order
                return ("conj", [(x, y, 0), (y, x, 0)])
            if c != 0:
                return None
            return ("disj", [(x, y, 1), (y, x, 1)])
    return None


def gc_atoms(phi: Formula) -> list[tuple[Atom, str, list[Triple]]]:
    """All atoms of phi with their GC views; raises NotGapOrder on failure."""
    out = []
    for a in _iter_atoms(phi):
        v = gc_norm(norm_atom(a))
        if v is None:
            raise NotGapOrder(f"not a gap-order atom: {a}")
        out.append((a, v[0], v[1]))
    return out


def _iter_atoms(phi: Formula):
    if isinstance(phi, Atom):
        yield phi
    elif isinstance(phi, (And, Or)):
        for p in phi.args:
            yield from _iter_atoms(p)
    elif isinstance(phi, Not):
        yield from _iter_atoms(phi.arg)
    elif isinstance(phi, Exists):
        yield from _iter_atoms(phi.body)


def is_gc_formula(phi: Formula) -> bool:
    try:
        gc_atoms(phi)
        return True
    except NotGapOrder:
        return False


def triple_atom(tr: Triple) -> Atom:
    p, q, k = tr
    lhs = Term.of(p) - Term.of(q)
    return Atom(lhs, ">=", Term.of(k))


def classify(phi: Formula) -> ConstraintClass:
    """MC if every atom is p <> q over variables/constants; else GC when every
    atom has gap-order form; else general linear."""
    mc = True
    gc = True
    for a in _iter_atoms(phi):
        na = norm_atom(a)
        if not _is_mc(na):
            mc = False
        if gc_norm(na) is None:
            gc = False
        if not mc and not gc:
            break
    if mc:
        return ConstraintClass.MC
    if gc:
        return ConstraintClass.GC
    return ConstraintClass.GENERAL


def _is_mc(na: NormAtom) -> bool:
    if len(na.coeffs) == 0:
        return True
    if len(na.coeffs) == 1:
        return True  # a*x <> c rescales to x <> c/a
    if len(na.coeffs) == 2:
        (_, a1), (_, a2) = na.coeffs
        return a1 == -a2 and abs(a1) == 1 and na.const == 0
    return False


# Gap-order quantifier elimination -----------------------------------------


def _gc_cubes(phi: Formula) -> list[list[Triple]]:
    """DNF over gap-order triples (integer semantics)."""
    cubes = to_dnf(phi, expand_ne=False)
    out: list[list[Triple]] = []
    for cube in cubes:
        alts: list[list[Triple]] = [[]]
        for na in cube:
            v = gc_norm(na)
            if v is None:
                raise NotGapOrder(f"not a gap-order atom: {na.to_atom()}")
            mode, triples = v
            if mode == "conj":
                for alt in alts:
                    alt.extend(triples)
            else:
                alts = [alt + [tr] for alt in alts for tr in triples]
        out.extend(alts)
    return [c for c in (_norm_gc_cube(c) for c in out) if c is not None]


def _norm_gc_cube(triples: list[Triple]) -> Optional[list[Triple]]:
    best: dict[tuple[Node, Node], int] = {}
    for p, q, k in triples:
        if isinstance(p, int) and isinstance(q, int):
            if p - q < k:
                return None
            continue
        if p == q:
            if k > 0:
                return None
            continue
        key = (p, q)
        if key not in best or best[key] < k:
            best[key] = k
    return [(p, q, k) for (p, q), k in sorted(best.items(), key=_gc_key)]


def _gc_key(item):
    (p, q), k = item if isinstance(item[0], tuple) else ((item[0], item[1]), item[2])
    return (_node_key(p), _node_key(q), k)


def _node_key(n: Node):
    if isinstance(n, int):
        return (0, "", "", n)
    return (1, n.name, n.kind, n.idx)


def eliminate_gc(cube: list[Triple], y: VarId) -> Optional[list[Triple]]:
    lowers = [(q, k) for (p, q, k) in cube if p == y]   # y >= q + k
    uppers = [(p, k) for (p, q, k) in cube if q == y]   # y <= p - k
    rest = [tr for tr in cube if tr[0] != y and tr[1] != y]
    for q, kl in lowers:
        for p, ku in uppers:
            rest.append((p, q, kl + ku))
    return _norm_gc_cube(rest)


def qe_gc(xs: Sequence[VarId], phi: Formula) -> Formula:
    """Quantifier-free gap-order equivalent of (exists xs. phi) over Z.

    Upper and lower gap bounds on the eliminated variable combine by adding
    their gaps; the result stays in gap-order form though constants grow.
    """
    inner, body = _strip_exists(phi)
    targets = set(xs) | set(inner)
    out: list[tuple[Triple, ...]] = []
    seen: set[tuple[Triple, ...]] = set()
    for cube in _gc_cubes(body):
        cur: Optional[list[Triple]] = cube
        for x in sorted(targets, key=_node_key):
            if cur is None:
                break
            cur = eliminate_gc(cur, x)
        if cur is not None:
            key = tuple(cur)
            if key not in seen:
                seen.add(key)
                out.append(key)
    return disj(*(conj(*(triple_atom(tr) for tr in cube)) for cube in out))


# ---------------------------------------------------------------------------
# Satisfiability

def is_sat(phi: Formula, dom: Domain) -> SatResult:
    """Satisfiability over the domain, with a checked model on success.

    Over the rationals this is complete.  Over the integers it is exact for
    difference-form cubes (which cover the gap-order fragment and its
    negations) and falls back to a rational relaxation plus a bounded grid
    search otherwise, raising UnsupportedInteger rather than guessing.
    """
    inner, body = _strip_exists(phi)
    cubes = to_dnf(body)
    hard: list[Cube] = []
    for cube in cubes:
        if dom == RAT:
            model = _sat_cube_rational(cube)
            if model is not None:
                _check_model(cube, model)
                return SatResult(True, _strip_inner(model, inner))
        else:
            tri = _as_difference_cube(cube)
            if tri is not None:
                model = _sat_difference(tri)
                if model is not None:
                    _check_model(cube, model)
                    return SatResult(True, _strip_inner(model, inner))
            else:
                hard.append(cube)
    for cube in hard:
        model = _sat_cube_int_fallback(cube)
        if model is not None:
            _check_model(cube, model)
            return SatResult(True, _strip_inner(model, inner))
    return SatResult(False)


def _strip_inner(model: dict[VarId, Fraction], inner: list[VarId]) -> dict[VarId, Fraction]:
    return {v: c for v, c in model.items() if v not in inner}


def _check_model(cube: Cube, model: Mapping[VarId, Fraction]) -> None:
    for na in cube:
        if not na.holds(model):
            raise AssertionError(f"model {model} violates {na.to_atom()}")


def _sat_cube_rational(cube: Cube) -> Optional[dict[VarId, Fraction]]:
    trail: list[tuple[VarId, tuple]] = []
    cur: Optional[Cube] = cube
    while cur:
        vs = set()
        for na in cur:
            vs |= na.vars()
        if not vs:
            break
        x = _elim_order(cur, vs)
        eqs, lowers, uppers, _ = _bounds_on(cur, x)
        trail.append((x, (eqs, lowers, uppers)))
        cur = eliminate_rational(cur, x)
    if cur is None:
        return None
    model: dict[VarId, Fraction] = {}
    eliminated = {x for x, _ in trail}
    for _, (eqs, lowers, uppers) in trail:
        for t in eqs + [b[0] for b in lowers] + [b[0] for b in uppers]:
            for v in t.vars():
                if v not in eliminated:
                    model[v] = Fraction(0)  # unconstrained by the residue
    for x, (eqs, lowers, uppers) in reversed(trail):
        if eqs:
            model[x] = eqs[0].value(model)
            continue
        lo = None
        for t, s in lowers:
            v = t.value(model)
            if lo is None or v > lo[0] or (v == lo[0] and s):
                lo = (v, s)
        hi = None
        for t, s in uppers:
            v = t.value(model)
            if hi is None or v < hi[0] or (v == hi[0] and s):
                hi = (v, s)
        model[x] = _pick_rational(lo, hi)
    return model


def _pick_rational(lo, hi) -> Fraction:
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return hi[0] - 1 if hi[1] else min(hi[0], Fraction(0))
    if hi is None:
        return lo[0] + 1 if lo[1] else max(lo[0], Fraction(0))
    if not lo[1] and (lo[0] < hi[0] or (lo[0] == hi[0] and not hi[1])):
        return lo[0]
    return (lo[0] + hi[0]) / 2


def _as_difference_cube(cube: Cube) -> Optional[list[Triple]]:
    """Difference view p - q >= k (k any integer) of a cube, if one exists."""
    triples: list[Triple] = []
    for na in cube:
        vec, const, op = na.coeffs, na.const, na.op
        if op in ("<=", "<"):
            tr = _gc_of_ineq(vec, const, op == "<")
            if tr is None:
                return None
            triples.append(tr)
        elif op == "=":
            eqv = gc_norm(na)
            if eqv is None or eqv[0] != "conj":
                return None
            triples.extend(eqv[1])
        else:  # != is expanded by to_dnf
            return None
    return triples


def _sat_difference(triples: list[Triple]) -> Optional[dict[VarId, Fraction]]:
    """Bellman-Ford on the gap graph; integer model or None."""
    nodes: list[Node] = [0]
    consts: list[int] = []
    for p, q, k in triples:
        for n in (p, q):
            if n not in nodes:
                nodes.append(n)
                if isinstance(n, int):
                    consts.append(n)
    edges: list[tuple[Node, Node, int]] = []
    for p, q, k in triples:
        edges.append((p, q, k))  # value(p) - value(q) >= k
    for c in consts:
        edges.append((c, 0, c))
        edges.append((0, c, -c))
    # potentials: d[q] <= d[p] - k along each constraint
    d: dict[Node, int] = {n: 0 for n in nodes}
    for i in range(len(nodes)):
        changed = False
        for p, q, k in edges:
            if d[p] - k < d[q]:
                d[q] = d[p] - k
                changed = True
        if not changed:
            break
    else:
        for p, q, k in edges:
            if d[p] - k < d[q]:
                return None  # negative cycle
    base = d[0]
    model: dict[VarId, Fraction] = {}
    for n in nodes:
        if isinstance(n, VarId):
            model[n] = Fraction(d[n] - base)
    return model


_INT_GRID_LIMIT = 50_000


def _sat_cube_int_fallback(cube: Cube) -> Optional[dict[VarId, Fraction]]:
    relaxed = _sat_cube_rational(cube)
    if relaxed is None:
        return None
    vs = sorted({v for na in cube for v in na.vars()})
    candidates: dict[VarId, list[Fraction]] = {}
    pool = {Fraction(0)}
    for na in cube:
        if na.const.denominator == 1:
            pool.add(na.const)
    for v in vs:
        x = relaxed.get(v, Fraction(0))
        local = {Fraction(floor(x)), Fraction(ceil(x))}
        for c in pool:
            local |= {c - 1, c, c + 1}
        candidates[v] = sorted(local)
    total = 1
    for v in vs:
        total *= len(candidates[v])
    if total > _INT_GRID_LIMIT:
        raise UnsupportedInteger("integer search space too large")
    model: dict[VarId, Fraction] = {}

    def go(i: int) -> bool:
        if i == len(vs):
            return all(na.holds(model) for na in cube)
        for val in candidates[vs[i]]:
            model[vs[i]] = val
            if go(i + 1):
                return True
        del model[vs[i]]
        return False

    if go(0):
        return dict(model)
    raise UnsupportedInteger(
        "rationally satisfiable but no integer model in the bounded grid"
    )


# ---------------------------------------------------------------------------
# Equivalence, cutoff

def qe_all(phi: Formula, dom: Domain) -> Formula:
    """Eliminate any embedded quantifiers using the domain's procedure."""
    if not _has_exists(phi):
        return phi
    if dom == INT:
        return qe_gc([], phi)
    return qe_rational([], phi)


def equivalent(phi: Formula, psi: Formula, dom: Domain) -> bool:
    """Logical equivalence over the domain, via two unsatisfiability checks."""
    phi = qe_all(phi, dom)
    psi = qe_all(psi, dom)
    if is_sat(conj(phi, Not(psi)), dom).sat:
        return False
    if is_sat(conj(psi, Not(phi)), dom).sat:
        return False
    return True


def cutoff(phi: Formula, K: int) -> Formula:
    """Replace every gap x - y >= k with k >= K by x - y >= K.

    Purely syntactic and per-atom; equality and disequality atoms carry
    gaps 0 and 1 and are never rewritten (K >= 1).
    """
    if K < 1:
        raise ValueError("cutoff bound must be positive")
    return _cutoff_walk(phi, K)


def _cutoff_walk(phi: Formula, K: int) -> Formula:
    if isinstance(phi, (TrueF, FalseF)):
        return phi
    if isinstance(phi, Atom):
        v = gc_norm(norm_atom(phi))
        if v is None:
            raise NotGapOrder(f"not a gap-order atom: {phi}")
        mode, triples = v
        if mode == "conj" and len(triples) == 1:
            p, q, k = triples[0]
            if k >= K:
                return triple_atom((p, q, K))
        return phi
    if isinstance(phi, And):
        return conj(*(_cutoff_walk(p, K) for p in phi.args))
    if isinstance(phi, Or):
        return disj(*(_cutoff_walk(p, K) for p in phi.args))
    if isinstance(phi, Exists):
        return Exists(phi.bound, _cutoff_walk(phi.body, K))
    raise NotGapOrder(f"unsupported connective in gap-order formula: {phi!r}")


def gc_equivalent(phi: Formula, psi: Formula, K: int) -> bool:
    """Cutoff equivalence: formulas agree after capping all gaps at K.

    The comparison of the capped formulas runs over the rationals, which is
    sound for gap-order satisfiability questions (difference systems with
    integer offsets have integer solutions whenever they have any).
    """
    return equivalent(cutoff(phi, K), cutoff(psi, K), RAT)
