"""Finite-trace temporal formulas with arithmetic constraints: the AST,
the next-action preprocessing, the transition function delta, the NFA
construction, and the direct trace semantics used as its oracle."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from .ddsa import Ddsa, Run, step_allowed
from .formula import Domain, Formula, conj, evaluate
from . import solve


class LtlfError(Exception):
    pass


class LengthMismatch(LtlfError):
    pass


# ---------------------------------------------------------------------------
# AST.  The user-facing language has no negation; Top/Bot exist for the
# automaton construction only.


class Ltlf:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Ltlf):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Bot(Ltlf):
    def __str__(self):
        return "false"


@dataclass(frozen=True)
class Constr(Ltlf):
    formula: Formula

    def __str__(self):
        return str(self.formula)


@dataclass(frozen=True)
class StateAtom(Ltlf):
    state: str

    def __str__(self):
        return self.state


@dataclass(frozen=True)
class ActionAtom(Ltlf):
    action: str

    def __str__(self):
        return self.action


@dataclass(frozen=True)
class LAnd(Ltlf):
    left: Ltlf
    right: Ltlf

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class LOr(Ltlf):
    left: Ltlf
    right: Ltlf

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Next(Ltlf):
    """<.> psi: some successor position exists and satisfies psi."""

    sub: Ltlf

    def __str__(self):
        return f"X ({self.sub})"


@dataclass(frozen=True)
class ActNext(Ltlf):
    """<a> psi: the next step uses action a and its target satisfies psi."""

    action: str
    sub: Ltlf

    def __str__(self):
        return f"<{self.action}> ({self.sub})"


@dataclass(frozen=True)
class Eventually(Ltlf):
    sub: Ltlf

    def __str__(self):
        return f"F ({self.sub})"


@dataclass(frozen=True)
class Always(Ltlf):
    sub: Ltlf

    def __str__(self):
        return f"G ({self.sub})"


@dataclass(frozen=True)
class Until(Ltlf):
    left: Ltlf
    right: Ltlf

    def __str__(self):
        return f"({self.left} U {self.right})"


TOP = Top()
BOT = Bot()


def _sort_key(psi: Ltlf) -> tuple:
    return (psi.__class__.__name__, str(psi))


def _assoc_parts(psi: Ltlf, cls) -> list[Ltlf]:
    if isinstance(psi, cls):
        return _assoc_parts(psi.left, cls) + _assoc_parts(psi.right, cls)
    return [psi]


def _build_chain(parts: list[Ltlf], cls) -> Ltlf:
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = cls(p, out)
    return out


def land(a: Ltlf, b: Ltlf) -> Ltlf:
    """Conjunction with unit rules plus flatten/dedup/sort, so combined
    quoted formulas reach a canonical shape and the state space closes."""
    parts: list[Ltlf] = []
    for p in _assoc_parts(a, LAnd) + _assoc_parts(b, LAnd):
        if isinstance(p, Bot):
            return BOT
        if not isinstance(p, Top) and p not in parts:
            parts.append(p)
    if not parts:
        return TOP
    return _build_chain(sorted(parts, key=_sort_key), LAnd)


def lor(a: Ltlf, b: Ltlf) -> Ltlf:
    parts: list[Ltlf] = []
    for p in _assoc_parts(a, LOr) + _assoc_parts(b, LOr):
        if isinstance(p, Top):
            return TOP
        if not isinstance(p, Bot) and p not in parts:
            parts.append(p)
    if not parts:
        return BOT
    return _build_chain(sorted(parts, key=_sort_key), LOr)


def constraints_of(psi: Ltlf) -> list[Formula]:
    """Constraint leaves in first-occurrence order, deduplicated."""
    out: list[Formula] = []
    seen = set()
    for node in walk(psi):
        if isinstance(node, Constr) and node.formula not in seen:
            seen.add(node.formula)
            out.append(node.formula)
    return out


def walk(psi: Ltlf) -> Iterator[Ltlf]:
    yield psi
    if isinstance(psi, (LAnd, LOr, Until)):
        yield from walk(psi.left)
        yield from walk(psi.right)
    elif isinstance(psi, (Next, Eventually, Always)):
        yield from walk(psi.sub)
    elif isinstance(psi, ActNext):
        yield from walk(psi.sub)


def preprocess(psi: Ltlf) -> Ltlf:
    """Rewrite every <a> psi into X (a & psi), introducing action atoms."""
    if isinstance(psi, ActNext):
        return Next(land(ActionAtom(psi.action), preprocess(psi.sub)))
    if isinstance(psi, LAnd):
        return land(preprocess(psi.left), preprocess(psi.right))
    if isinstance(psi, LOr):
        return lor(preprocess(psi.left), preprocess(psi.right))
    if isinstance(psi, Next):
        return Next(preprocess(psi.sub))
    if isinstance(psi, Eventually):
        return Eventually(preprocess(psi.sub))
    if isinstance(psi, Always):
        return Always(preprocess(psi.sub))
    if isinstance(psi, Until):
        return Until(preprocess(psi.left), preprocess(psi.right))
    return psi


# ---------------------------------------------------------------------------
# Alphabet symbols.  A symbol is a set of state names, action names, and
# constraints; the last/not-last flags exist only inside delta results.


@dataclass(frozen=True)
class Sym:
    kind: str  # "state" | "action" | "constr"
    state: str = ""
    formula: Optional[Formula] = None

    def __str__(self):
        if self.kind == "constr":
            return str(self.formula)
        return self.state


def sym_state(s: str) -> Sym:
    return Sym("state", s)


def sym_action(a: str) -> Sym:
    return Sym("action", a)


def sym_constr(f: Formula) -> Sym:
    return Sym("constr", formula=f)


SigmaSymbol = frozenset[Sym]

EMPTY_SYMBOL: SigmaSymbol = frozenset()


def constr_of(symbol: SigmaSymbol) -> list[Formula]:
    return sorted(
        (s.formula for s in symbol if s.kind == "constr"), key=str
    )


def fmt_symbol(symbol: SigmaSymbol) -> str:
    if not symbol:
        return "{}"
    parts = sorted(str(s) for s in symbol)
    return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class DeltaEntry:
    target: Ltlf
    symbol: SigmaSymbol
    last: bool = False
    not_last: bool = False


def _combine(r1: list[DeltaEntry], r2: list[DeltaEntry], op) -> list[DeltaEntry]:
    out: list[DeltaEntry] = []
    seen = set()
    for e1 in r1:
        for e2 in r2:
            last = e1.last or e2.last
            nlast = e1.not_last or e2.not_last
            if last and nlast:
                continue  # can never label a transition
            entry = DeltaEntry(op(e1.target, e2.target), e1.symbol | e2.symbol, last, nlast)
            key = (entry.target, entry.symbol, entry.last, entry.not_last)
            if key not in seen:
                seen.add(key)
                out.append(entry)
    return out


_DELTA_LAMBDA = [
    DeltaEntry(TOP, EMPTY_SYMBOL, last=True),
    DeltaEntry(BOT, EMPTY_SYMBOL, not_last=True),
]


def delta(psi: Ltlf) -> list[DeltaEntry]:
    """The transition function on quoted formulas.

    Atom cases use the relaxed rule carrying (Bot, {}) instead of a negated
    requirement, so transition labels state minimal requirements only.
    """
    if isinstance(psi, Top):
        return [DeltaEntry(TOP, EMPTY_SYMBOL)]
    if isinstance(psi, Bot):
        return [DeltaEntry(BOT, EMPTY_SYMBOL)]
    if isinstance(psi, Constr):
        return [
            DeltaEntry(TOP, frozenset({sym_constr(psi.formula)})),
            DeltaEntry(BOT, EMPTY_SYMBOL),
        ]
    if isinstance(psi, StateAtom):
        return [
            DeltaEntry(TOP, frozenset({sym_state(psi.state)})),
            DeltaEntry(BOT, EMPTY_SYMBOL),
        ]
    if isinstance(psi, ActionAtom):
        return [
            DeltaEntry(TOP, frozenset({sym_action(psi.action)})),
            DeltaEntry(BOT, EMPTY_SYMBOL),
        ]
    if isinstance(psi, LOr):
        return _combine(delta(psi.left), delta(psi.right), lor)
    if isinstance(psi, LAnd):
        return _combine(delta(psi.left), delta(psi.right), land)
    if isinstance(psi, Next):
        return [
            DeltaEntry(psi.sub, EMPTY_SYMBOL, not_last=True),
            DeltaEntry(BOT, EMPTY_SYMBOL, last=True),
        ]
    if isinstance(psi, Eventually):
        return _combine_or(delta(psi.sub), delta(Next(psi)))
    if isinstance(psi, Always):
        inner = _combine_or(delta(Next(psi)), list(_DELTA_LAMBDA))
        return _combine(delta(psi.sub), inner, land)
    if isinstance(psi, Until):
        step = _combine(delta(psi.left), delta(Next(psi)), land)
        return _combine_or(delta(psi.right), step)
    if isinstance(psi, ActNext):
        raise LtlfError("preprocess() must run before delta()")
    raise TypeError(f"not an LTLf formula: {psi!r}")


def _combine_or(r1: list[DeltaEntry], r2: list[DeltaEntry]) -> list[DeltaEntry]:
    return _combine(r1, r2, lor)


# ---------------------------------------------------------------------------
# NFA


QE_STATE = "__qe__"  # sentinel name for the extra accepting state


@dataclass(frozen=True)
class NfaEdge:
    src: int
    symbol: SigmaSymbol
    dst: int


@dataclass
class Nfa:
    """Automaton over minimal-requirement symbols.

    States are quoted formulas plus the extra accepting state `qe`, which
    consumes the last symbol of a word; state 0 is the initial state.
    """

    states: list[Union[Ltlf, str]]
    edges: list[NfaEdge]
    initial: int
    finals: set[int]

    def __post_init__(self):
        self._adj: dict[int, list[NfaEdge]] = {}
        for e in self.edges:
            self._adj.setdefault(e.src, []).append(e)

    def outgoing(self, q: int) -> list[NfaEdge]:
        return self._adj.get(q, [])

    def state_name(self, q: int) -> str:
        s = self.states[q]
        return "q_e" if s == QE_STATE else str(s)

    def accepts(self, word: Sequence[SigmaSymbol]) -> bool:
        """Does some path with exactly these labels reach a final state?"""
        frontier = {self.initial}
        for symbol in word:
            nxt = set()
            for q in frontier:
                for e in self.outgoing(q):
                    if e.symbol == frozenset(symbol):
                        nxt.add(e.dst)
            frontier = nxt
            if not frontier:
                return False
        return bool(frontier & self.finals)

    def paths(self, length: int) -> Iterator[list[NfaEdge]]:
        """All accepting edge sequences of the given length."""

        def go(q: int, remaining: int, acc: list[NfaEdge]):
            if remaining == 0:
                if q in self.finals:
                    yield list(acc)
                return
            for e in self.outgoing(q):
                acc.append(e)
                yield from go(e.dst, remaining - 1, acc)
                acc.pop()

        yield from go(self.initial, length, [])


def build_nfa(psi: Ltlf, dom: Domain) -> Nfa:
    """Least-fixpoint construction from the quoted initial formula.

    An entry without the last flag yields an ordinary transition; an entry
    with the last flag targeting Top yields a transition into qe.  The Bot
    sink and transitions whose constraint sets are unsatisfiable are
    dropped afterwards.
    """
    states: list[Union[Ltlf, str]] = [psi]
    index: dict = {psi: 0}

    def state_id(q) -> int:
        if q not in index:
            index[q] = len(states)
            states.append(q)
        return index[q]

    edges: list[NfaEdge] = []
    todo = [psi]
    done = set()
    while todo:
        q = todo.pop(0)
        if q in done or q == QE_STATE:
            continue
        done.add(q)
        qi = state_id(q)
        for entry in delta(q):
            if entry.last and entry.not_last:
                continue
            if not entry.last:
                ti = state_id(entry.target)
                edges.append(NfaEdge(qi, entry.symbol, ti))
                if entry.target not in done:
                    todo.append(entry.target)
            if entry.last and entry.target == TOP:
                edges.append(NfaEdge(qi, entry.symbol, state_id(QE_STATE)))

    top_i = state_id(TOP)
    qe_i = state_id(QE_STATE)
    finals = {top_i, qe_i}

    # optimization pass: drop the Bot sink and unsatisfiable labels
    drop_states = {i for i, s in enumerate(states) if s == BOT}
    kept: list[NfaEdge] = []
    for e in edges:
        if e.src in drop_states or e.dst in drop_states:
            continue
        cs = constr_of(e.symbol)
        if cs and not solve.is_sat(conj(*cs), dom).sat:
            continue
        kept.append(e)
    remap: dict[int, int] = {}
    new_states: list[Union[Ltlf, str]] = []
    for i, s in enumerate(states):
        if i in drop_states:
            continue
        remap[i] = len(new_states)
        new_states.append(s)
    new_edges = [NfaEdge(remap[e.src], e.symbol, remap[e.dst]) for e in kept]
    return Nfa(new_states, new_edges, remap[0], {remap[i] for i in finals})


# ---------------------------------------------------------------------------
# Direct finite-trace semantics (the oracle for NFA acceptance)


def run_models(d: Ddsa, run: Run, i: int, psi: Ltlf) -> bool:
    """Does the run satisfy psi at position i, by the recursive semantics?"""
    n = len(run)
    if not (0 <= i <= n):
        raise IndexError(f"position {i} outside run of length {n}")
    if isinstance(psi, Top):
        return True
    if isinstance(psi, Bot):
        return False
    if isinstance(psi, Constr):
        return evaluate(psi.formula, run.configs[i].assignment())
    if isinstance(psi, StateAtom):
        return run.configs[i].state == psi.state
    if isinstance(psi, ActionAtom):
        # introduced by preprocessing: the step into position i used the action
        return i > 0 and step_allowed(
            d, run.configs[i - 1], psi.action, run.configs[i]
        )
    if isinstance(psi, LAnd):
        return run_models(d, run, i, psi.left) and run_models(d, run, i, psi.right)
    if isinstance(psi, LOr):
        return run_models(d, run, i, psi.left) or run_models(d, run, i, psi.right)
    if isinstance(psi, ActNext):
        return (
            i < n
            and step_allowed(d, run.configs[i], psi.action, run.configs[i + 1])
            and run_models(d, run, i + 1, psi.sub)
        )
    if isinstance(psi, Next):
        return i < n and run_models(d, run, i + 1, psi.sub)
    if isinstance(psi, Eventually):
        return run_models(d, run, i, psi.sub) or (
            i < n and run_models(d, run, i + 1, psi)
        )
    if isinstance(psi, Always):
        return run_models(d, run, i, psi.sub) and (
            i == n or run_models(d, run, i + 1, psi)
        )
    if isinstance(psi, Until):
        return run_models(d, run, i, psi.right) or (
            i < n
            and run_models(d, run, i, psi.left)
            and run_models(d, run, i + 1, psi)
        )
    raise TypeError(f"not an LTLf formula: {psi!r}")


def word_consistent(d: Ddsa, word: Sequence[SigmaSymbol], run: Run) -> bool:
    """Is the word consistent with the run: no contradictory state or action
    atoms, and every position's constraints hold under its assignment."""
    n = len(run)
    if len(word) != n + 1:
        raise LengthMismatch(f"word length {len(word)} vs run positions {n + 1}")
    for i, symbol in enumerate(word):
        for s in symbol:
            if s.kind == "state" and s.state != run.configs[i].state:
                return False
            if s.kind == "action" and i > 0 and s.state != run.actions[i - 1]:
                return False
        alpha = run.configs[i].assignment()
        for c in constr_of(symbol):
            if not evaluate(c, alpha):
                return False
    return True


def symbol_consistent_with_step(symbol: SigmaSymbol, action: str, target: str) -> bool:
    """Symbol consistency with a transition: no action atom other than the
    action taken, no state atom other than the target state."""
    for s in symbol:
        if s.kind == "action" and s.state != action:
            return False
        if s.kind == "state" and s.state != target:
            return False
    return True
