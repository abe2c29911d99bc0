"""Concrete syntax: the line-oriented model format and the property
language, with printers that round-trip.

Model format::

    domain rat
    vars x y
    init x=0 y=0
    states s1 s2
    initial s1
    final s2
    trans s1 a1 s2 [x^w > y^r && y^w = y^r]

A `||` at guard top level splits the transition into parallel ones with
suffixed action ids.  Properties use X/F/G/U, `<a>` for the action
modality, `&`/`|`, and linear comparisons as atoms; bare identifiers
resolve to state atoms first, then action atoms.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Optional

from . import ltlf as lt
from .ddsa import Ddsa, validate
from .formula import (
    INT,
    RAT,
    Atom,
    Domain,
    Formula,
    Term,
    VarId,
    atoms_of,
    conj,
    fmt_rat,
)
from .ltlf import Ltlf


class ParseError(Exception):
    def __init__(self, msg: str, line: Optional[int] = None, col: Optional[int] = None):
        loc = ""
        if line is not None:
            loc = f" at line {line}" + (f", column {col}" if col is not None else "")
        super().__init__(msg + loc)
        self.line = line
        self.col = col


class UnknownAtom(ParseError):
    pass


# ---------------------------------------------------------------------------
# Tokenizer shared by guards, terms, and properties

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*(?:\^[rw])?)
      | (?P<op><=|>=|!=|=|<|>)
      | (?P<punct>\(|\)|\[|\]|\+|-|\*|&&|\|\||&|\||\.|<|>)
    )""",
    re.VERBOSE,
)


def _tokens(text: str, line: Optional[int] = None) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return out


class _Stream:
    def __init__(self, toks, line=None):
        self.toks = toks
        self.i = 0
        self.line = line

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, -1)

    def next(self):
        t = self.peek()
        if t[0] is None:
            raise ParseError("unexpected end of input", self.line)
        self.i += 1
        return t

    def accept(self, kind, value=None):
        k, v, _ = self.peek()
        if k == kind and (value is None or v == value):
            self.i += 1
            return v
        return None

    def expect(self, kind, value=None):
        got = self.accept(kind, value)
        if got is None:
            k, v, c = self.peek()
            want = value or kind
            raise ParseError(f"expected {want!r}, found {v!r}", self.line, c + 1)
        return got

    def done(self):
        return self.i >= len(self.toks)


def _parse_number(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    return Fraction(text)  # handles decimals exactly


def _var_of(name: str) -> VarId:
    if name.endswith("^r"):
        return VarId(name[:-2], "r")
    if name.endswith("^w"):
        return VarId(name[:-2], "w")
    return VarId(name)


def _parse_term(s: _Stream) -> Term:
    t = _parse_term_atom(s)
    while True:
        if s.accept("punct", "+"):
            t = t + _parse_term_atom(s)
        elif s.accept("punct", "-"):
            t = t - _parse_term_atom(s)
        else:
            return t


def _parse_term_atom(s: _Stream) -> Term:
    if s.accept("punct", "("):
        t = _parse_term(s)
        s.expect("punct", ")")
        return t
    if s.accept("punct", "-"):
        return -_parse_term_atom(s)
    k, v, c = s.peek()
    if k == "num":
        s.next()
        val = _parse_number(v)
        if s.accept("punct", "*"):
            nk, nv, _ = s.next()
            if nk != "name":
                raise ParseError("expected a variable after '*'", s.line, c)
            return Term.of(_var_of(nv)).scale(val)
        return Term.of(val)
    if k == "name":
        s.next()
        return Term.of(_var_of(v))
    raise ParseError(f"expected a term, found {v!r}", s.line, c + 1)


def _parse_atom(s: _Stream) -> Atom:
    lhs = _parse_term(s)
    k, v, c = s.peek()
    if k != "op":
        raise ParseError(f"expected a comparison, found {v!r}", s.line, c + 1)
    s.next()
    rhs = _parse_term(s)
    return Atom(lhs, v, rhs)


def parse_constraint(text: str, line: Optional[int] = None) -> Formula:
    """A conjunction of comparison atoms (no disjunction)."""
    s = _Stream(_tokens(text, line), line)
    parts = [_parse_atom(s)]
    while s.accept("punct", "&&") or s.accept("punct", "&"):
        parts.append(_parse_atom(s))
    if not s.done():
        k, v, c = s.peek()
        raise ParseError(f"trailing input {v!r}", line, c + 1)
    return conj(*parts)


def _parse_guard(text: str, line: Optional[int] = None) -> list[Formula]:
    """Top-level disjuncts of a guard, each a conjunction of atoms."""
    return [parse_constraint(part, line) for part in _split_top(text, "||")]


def _split_top(text: str, sep: str) -> list[str]:
    parts = []
    depth = 0
    cur = ""
    i = 0
    while i < len(text):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
        if depth == 0 and text.startswith(sep, i):
            parts.append(cur)
            cur = ""
            i += len(sep)
            continue
        cur += text[i]
        i += 1
    parts.append(cur)
    return parts


# ---------------------------------------------------------------------------
# Model parser


def parse_model(text: str) -> Ddsa:
    domain: Optional[Domain] = None
    variables: list[VarId] = []
    init: dict[VarId, Fraction] = {}
    states: list[str] = []
    initial: Optional[str] = None
    finals: list[str] = []
    transitions: list[tuple[str, str, str]] = []
    actions: list[str] = []
    guards: dict[str, Formula] = {}

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kw, _, rest = line.partition(" ")
        rest = rest.strip()
        if kw == "domain":
            if rest not in ("int", "rat"):
                raise ParseError(f"domain must be 'int' or 'rat', got {rest!r}", ln)
            domain = INT if rest == "int" else RAT
        elif kw == "vars":
            variables = [VarId(n) for n in rest.split()]
        elif kw == "init":
            for piece in rest.split():
                if "=" not in piece:
                    raise ParseError(f"init entries look like x=0, got {piece!r}", ln)
                name, val = piece.split("=", 1)
                init[VarId(name)] = _parse_number(val)
        elif kw == "states":
            states = rest.split()
        elif kw == "initial":
            initial = rest
        elif kw == "final":
            finals = rest.split()
        elif kw == "trans":
            m = re.match(r"(\S+)\s+(\S+)\s+(\S+)\s*\[(.*)\]\s*$", rest)
            if not m:
                raise ParseError("trans lines look like: trans s a t [guard]", ln)
            src, act, dst, guard_text = m.groups()
            disjuncts = (
                [conj()] if guard_text.strip() in ("", "true") else _parse_guard(guard_text, ln)
            )
            if len(disjuncts) == 1:
                labels = [act]
            else:
                labels = [f"{act}#{i + 1}" for i in range(len(disjuncts))]
            for label, g in zip(labels, disjuncts):
                if label in guards:
                    if guards[label] != g:
                        raise ParseError(
                            f"action '{label}' reused with a different guard", ln
                        )
                else:
                    actions.append(label)
                    guards[label] = g
                transitions.append((src, label, dst))
        else:
            raise ParseError(f"unknown directive {kw!r}", ln)

    if domain is None:
        raise ParseError("missing 'domain' line")
    if not variables:
        raise ParseError("missing 'vars' line")
    if initial is None:
        raise ParseError("missing 'initial' line")
    missing = [v.name for v in variables if v not in init]
    if missing:
        raise ParseError(f"missing 'init' assignment for: {', '.join(missing)}")
    d = Ddsa(
        states=tuple(states),
        initial=initial,
        actions=tuple(actions),
        transitions=tuple(transitions),
        finals=frozenset(finals),
        variables=tuple(variables),
        alpha0=init,
        guards=guards,
        domain=domain,
    )
    problems = [p for p in validate(d) if not p.startswith("no final states")]
    if problems:
        raise ParseError("invalid model: " + "; ".join(problems))
    return d


def print_model(d: Ddsa) -> str:
    lines = [f"domain {d.domain.tag}"]
    lines.append("vars " + " ".join(v.name for v in d.variables))
    if d.alpha0 is not None:
        lines.append(
            "init " + " ".join(f"{v.name}={fmt_rat(d.alpha0[v])}" for v in d.variables)
        )
    lines.append("states " + " ".join(d.states))
    lines.append(f"initial {d.initial}")
    lines.append("final " + " ".join(s for s in d.states if s in d.finals))
    for (s, a, t) in d.transitions:
        g = d.guards[a]
        body = "true" if g == conj() else " && ".join(str(x) for x in atoms_of(g))
        lines.append(f"trans {s} {a} {t} [{body}]")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Property parser


def parse_property(text: str, model: Ddsa) -> Ltlf:
    """LTLf property linked against the model's states and actions."""
    s = _Stream(_tokens(text), None)
    psi = _parse_or(s, model)
    if not s.done():
        k, v, c = s.peek()
        raise ParseError(f"trailing input {v!r}", None, c + 1)
    return psi


def _parse_or(s: _Stream, d: Ddsa) -> Ltlf:
    left = _parse_and(s, d)
    while s.accept("punct", "|") or s.accept("punct", "||"):
        left = lt.LOr(left, _parse_and(s, d))
    return left


def _parse_and(s: _Stream, d: Ddsa) -> Ltlf:
    left = _parse_until(s, d)
    while s.accept("punct", "&") or s.accept("punct", "&&"):
        left = lt.LAnd(left, _parse_until(s, d))
    return left


def _parse_until(s: _Stream, d: Ddsa) -> Ltlf:
    left = _parse_unary(s, d)
    k, v, _ = s.peek()
    if k == "name" and v == "U":
        s.next()
        return lt.Until(left, _parse_until(s, d))
    return left


def _parse_unary(s: _Stream, d: Ddsa) -> Ltlf:
    k, v, c = s.peek()
    if k == "name" and v in ("X", "F", "G") and not _starts_comparison(s):
        s.next()
        sub = _parse_unary(s, d)
        return {"X": lt.Next, "F": lt.Eventually, "G": lt.Always}[v](sub)
    if k in ("op", "punct") and v == "<":
        # action modality <a>
        save = s.i
        s.next()
        nk, nv, _ = s.peek()
        if nk == "name":
            s.next()
            if s.accept("op", ">") or s.accept("punct", ">"):
                if nv not in d.actions:
                    raise UnknownAtom(f"unknown action '{nv}' in modality")
                return lt.ActNext(nv, _parse_unary(s, d))
        s.i = save
    if s.accept("punct", "("):
        inner = _parse_or(s, d)
        s.expect("punct", ")")
        return inner
    return _parse_leaf(s, d)


def _starts_comparison(s: _Stream) -> bool:
    """X/F/G used as a variable, e.g. 'F > 3': next token is a comparison.

    A following `<name>` is the action modality, not a comparison.
    """
    if s.i + 1 >= len(s.toks):
        return True
    nk, nv, _ = s.toks[s.i + 1]
    if nv == "<" and s.i + 3 < len(s.toks):
        mk, _, _ = s.toks[s.i + 2]
        _, cv, _ = s.toks[s.i + 3]
        if mk == "name" and cv == ">":
            return False
    return nk == "op" or nv in ("+", "-", "*")


def _parse_leaf(s: _Stream, d: Ddsa) -> Ltlf:
    k, v, c = s.peek()
    if k in ("name", "num"):
        nk, nv, _ = s.toks[s.i + 1] if s.i + 1 < len(s.toks) else (None, None, -1)
        is_bare = nk not in ("op",) and nv not in ("+", "-", "*")
        # numeric tokens are state/action atoms only when declared as such
        if k == "num" and not (v in d.states or v in d.actions):
            is_bare = False
        if is_bare:
            s.next()
            if v == "true":
                return lt.Constr(Atom(Term.of(0), "=", Term.of(0)))
            in_states = v in d.states
            in_actions = v in d.actions
            if in_states and in_actions:
                raise UnknownAtom(f"'{v}' names both a state and an action")
            if in_states:
                return lt.StateAtom(v)
            if in_actions:
                return lt.ActionAtom(v)
            raise UnknownAtom(f"'{v}' is neither a state nor an action")
    # constraint atom
    a = _parse_atom(s)
    _check_vars(a, d)
    return lt.Constr(a)


def _check_vars(a: Atom, d: Ddsa) -> None:
    names = {v.name for v in d.variables}
    for v in a.lhs.vars() | a.rhs.vars():
        if v.kind != "plain":
            raise ParseError("property constraints use plain variables")
        if v.name not in names:
            raise UnknownAtom(f"unknown variable '{v.name}' in property")


def print_property(psi: Ltlf) -> str:
    if isinstance(psi, lt.Top):
        return "true"
    if isinstance(psi, lt.Bot):
        return "false"
    if isinstance(psi, lt.Constr):
        f = psi.formula
        return " & ".join(str(a) for a in atoms_of(f)) if not isinstance(f, Atom) else str(f)
    if isinstance(psi, lt.StateAtom):
        return psi.state
    if isinstance(psi, lt.ActionAtom):
        return psi.action
    if isinstance(psi, lt.LAnd):
        return f"({print_property(psi.left)} & {print_property(psi.right)})"
    if isinstance(psi, lt.LOr):
        return f"({print_property(psi.left)} | {print_property(psi.right)})"
    if isinstance(psi, lt.Next):
        return f"X ({print_property(psi.sub)})"
    if isinstance(psi, lt.ActNext):
        return f"<{psi.action}> ({print_property(psi.sub)})"
    if isinstance(psi, lt.Eventually):
        return f"F ({print_property(psi.sub)})"
    if isinstance(psi, lt.Always):
        return f"G ({print_property(psi.sub)})"
    if isinstance(psi, lt.Until):
        return f"({print_property(psi.left)} U {print_property(psi.right)})"
    raise TypeError(f"not an LTLf formula: {psi!r}")
