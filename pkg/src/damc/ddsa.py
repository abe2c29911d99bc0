"""Data-aware dynamic systems: model, step semantics, symbolic runs,
transition formulas, the update operator, and history constraints."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .formula import (
    INT,
    Atom,
    Domain,
    Formula,
    Term,
    VarId,
    conj,
    evaluate,
    free_vars,
    max_index,
    substitute,
)
from . import solve


class ModelError(Exception):
    pass


class UnknownAction(ModelError):
    pass


Assignment = dict[VarId, Fraction]


@dataclass
class Ddsa:
    """Labelled transition system with guarded actions over read/write
    variable copies.  Treated as immutable after construction.

    `alpha0` may be None for subsystems with a symbolic initial assignment
    (used by the sequential decomposition); such systems contribute no
    initial constraints.
    """

    states: tuple[str, ...]
    initial: str
    actions: tuple[str, ...]
    transitions: tuple[tuple[str, str, str], ...]  # (src, action, dst)
    finals: frozenset[str]
    variables: tuple[VarId, ...]
    alpha0: Optional[Assignment]
    guards: dict[str, Formula]
    domain: Domain
    dummy: Optional[tuple[str, str]] = None  # (dummy state, dummy action)

    def __post_init__(self):
        self._tmap = {(s, a): d for (s, a, d) in self.transitions}
        self._out: dict[str, list[tuple[str, str]]] = {}
        for (s, a, d) in self.transitions:
            self._out.setdefault(s, []).append((a, d))
        self._delta_cache: dict[str, Formula] = {}

    def target(self, state: str, action: str) -> Optional[str]:
        return self._tmap.get((state, action))

    def outgoing(self, state: str) -> list[tuple[str, str]]:
        """(action, target) pairs in declaration order."""
        return self._out.get(state, [])

    def guard(self, action: str) -> Formula:
        if action not in self.guards:
            raise UnknownAction(action)
        return self.guards[action]

    def write_set(self, action: str) -> list[VarId]:
        g = self.guard(action)
        written = {v.name for v in free_vars(g) if v.kind == "w"}
        return [v for v in self.variables if v.name in written]

    def initial_constraints(self) -> list[Formula]:
        """C_alpha0: one equality v = alpha0(v) per variable."""
        if self.alpha0 is None:
            return []
        return [Atom(Term.of(v), "=", Term.of(self.alpha0[v])) for v in self.variables]


@dataclass(frozen=True)
class Config:
    state: str
    alpha: tuple[tuple[VarId, Fraction], ...]

    @staticmethod
    def make(state: str, alpha: Mapping[VarId, Fraction]) -> "Config":
        return Config(state, tuple(sorted(alpha.items())))

    def assignment(self) -> Assignment:
        return dict(self.alpha)


@dataclass(frozen=True)
class Run:
    """Concrete run: configurations joined by action labels."""

    configs: tuple[Config, ...]
    actions: tuple[str, ...]

    def __post_init__(self):
        assert len(self.configs) == len(self.actions) + 1

    def __len__(self) -> int:
        return len(self.actions)

    def states(self) -> list[str]:
        return [c.state for c in self.configs]


SymbolicRun = tuple[str, ...]  # action labels; states follow from T


def symbolic_states(d: Ddsa, actions: Sequence[str], start: Optional[str] = None) -> list[str]:
    """State sequence of a symbolic run given by its action labels."""
    cur = start if start is not None else d.initial
    out = [cur]
    for a in actions:
        nxt = d.target(cur, a)
        if nxt is None:
            raise ModelError(f"no transition from {cur} by {a}")
        cur = nxt
        out.append(cur)
    return out


def transition_formula(d: Ddsa, action: str) -> Formula:
    """guard(a) plus inertia equalities v^w = v^r for unwritten variables."""
    hit = d._delta_cache.get(action)
    if hit is not None:
        return hit
    g = d.guard(action)
    written = set(d.write_set(action))
    inertia = [
        Atom(Term.of(v.write()), "=", Term.of(v.read()))
        for v in d.variables
        if v not in written
    ]
    out = conj(g, *inertia)
    d._delta_cache[action] = out
    return out


def _qe_for(d: Ddsa, phi: Formula) -> Callable[[Sequence[VarId], Formula], Formula]:
    if d.domain == INT and solve.is_gc_formula(phi):
        return solve.qe_gc
    return solve.qe_rational


def update(
    d: Ddsa,
    phi: Formula,
    action: str,
    qe: Optional[Callable[[Sequence[VarId], Formula], Formula]] = None,
) -> Formula:
    """One-step image of phi under the action's transition formula.

    The existential prefix over the snapshot copies is eliminated
    immediately, so results stay quantifier-free over V.
    """
    delta = transition_formula(d, action)
    idx = max(max_index(phi), max_index(delta)) + 1
    snapshot = {v: v.indexed(idx) for v in d.variables}
    phi_u = substitute(phi, {v: Term.of(u) for v, u in snapshot.items()})
    delta_uv = substitute(
        delta,
        {
            **{v.read(): Term.of(snapshot[v]) for v in d.variables},
            **{v.write(): Term.of(v) for v in d.variables},
        },
    )
    body = conj(phi_u, delta_uv)
    fn = qe if qe is not None else _qe_for(d, body)
    return fn(list(snapshot.values()), body)


def history_constraint(
    d: Ddsa,
    actions: Sequence[str],
    constraint_seq: Optional[Sequence[Iterable[Formula]]] = None,
    qe: Optional[Callable[[Sequence[VarId], Formula], Formula]] = None,
) -> Formula:
    """Accumulated constraint formula of a symbolic run.

    `constraint_seq` has one constraint set per position (length n+1);
    omitted sets default to empty.  Unsatisfiable results are returned
    as-is.
    """
    n = len(actions)
    if constraint_seq is None:
        constraint_seq = [[] for _ in range(n + 1)]
    if len(constraint_seq) != n + 1:
        raise ValueError("constraint sequence must have run length + 1 entries")
    symbolic_states(d, actions)  # validates the run
    phi: Formula = conj(*d.initial_constraints(), *constraint_seq[0])
    for i, a in enumerate(actions):
        phi = conj(update(d, phi, a, qe=qe), *constraint_seq[i + 1])
    return phi


def step_allowed(d: Ddsa, pre: Config, action: str, post: Config) -> bool:
    """Def-style step check: transition exists and the guard assignment
    built from both configurations satisfies the transition formula."""
    if d.target(pre.state, action) != post.state:
        return False
    beta: Assignment = {}
    for v, val in pre.alpha:
        beta[v.read()] = val
    for v, val in post.alpha:
        beta[v.write()] = val
    return evaluate(transition_formula(d, action), beta)


def validate_run(d: Ddsa, run: Run) -> bool:
    if run.configs[0].state != d.initial:
        return False
    if d.alpha0 is not None and run.configs[0].assignment() != d.alpha0:
        return False
    for i, a in enumerate(run.actions):
        if not step_allowed(d, run.configs[i], a, run.configs[i + 1]):
            return False
    return True


def successors(d: Ddsa, cfg: Config, action: str, grid: Sequence[Fraction]) -> list[Config]:
    """All one-step successors whose written values come from the grid."""
    dst = d.target(cfg.state, action)
    if dst is None:
        if action not in d.actions:
            raise UnknownAction(action)
        return []
    written = d.write_set(action)
    alpha = cfg.assignment()
    out: list[Config] = []

    def go(i: int, acc: Assignment):
        if i == len(written):
            post = Config.make(dst, acc)
            if step_allowed(d, cfg, action, post):
                out.append(post)
            return
        for val in grid:
            acc2 = dict(acc)
            acc2[written[i]] = Fraction(val)
            go(i + 1, acc2)

    go(0, dict(alpha))
    seen = set()
    dedup = []
    for c in out:
        if c not in seen:
            seen.add(c)
            dedup.append(c)
    return dedup


def validate(d: Ddsa) -> list[str]:
    """Structural diagnostics; empty list means the model is well-formed."""
    out: list[str] = []
    states = set(d.states)
    if d.initial not in states:
        out.append(f"initial state '{d.initial}' not in states")
    for f in d.finals:
        if f not in states:
            out.append(f"final state '{f}' not in states")
    if not d.finals:
        out.append("no final states: every verification task is trivially negative")
    seen_pairs = set()
    for (s, a, t) in d.transitions:
        if s not in states:
            out.append(f"transition source '{s}' not in states")
        if t not in states:
            out.append(f"transition target '{t}' not in states")
        if a not in d.actions:
            out.append(f"transition uses undeclared action '{a}'")
        if (s, a) in seen_pairs:
            out.append(f"duplicate transition for state '{s}' and action '{a}'")
        seen_pairs.add((s, a))
    varnames = {v.name for v in d.variables}
    for a in d.actions:
        if a not in d.guards:
            out.append(f"action '{a}' has no guard")
            continue
        for v in free_vars(d.guards[a]):
            if v.kind not in ("r", "w"):
                out.append(f"guard of '{a}' uses non read/write variable '{v}'")
            elif v.name not in varnames:
                out.append(f"guard of '{a}' mentions unknown variable '{v.name}'")
    if d.alpha0 is not None:
        for v in d.variables:
            if v not in d.alpha0:
                out.append(f"initial assignment missing variable '{v}'")
        if d.domain == INT:
            for v, val in d.alpha0.items():
                if val.denominator != 1:
                    out.append(f"integer model initializes '{v}' to non-integer {val}")
    return out
