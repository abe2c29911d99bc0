"""Finite-summary detection and the constraint-graph abstraction.

A summary strategy packages the update procedure and the equivalence
relation under which the reachable constraint formulas of a system fall
into finitely many classes: monotonicity constraints (logical equivalence),
gap-order constraints (cutoff equivalence), bounded lookback / feedback
freedom (logical equivalence), and the two decomposition combinators.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from . import ddsa as dd
from . import solve
from .ddsa import Ddsa
from .formula import (
    INT,
    RAT,
    Atom,
    Formula,
    VarId,
    atoms_of,
    conj,
    free_vars,
    norm_atom,
)
from .solve import BudgetExceeded, ConstraintClass


# ---------------------------------------------------------------------------
# Syntactic criteria


def used_actions(d: Ddsa) -> list[str]:
    seen: list[str] = []
    for (_, a, _) in d.transitions:
        if a not in seen:
            seen.append(a)
    return seen


def _criterion_atoms(d: Ddsa, constraints: Sequence[Formula]) -> list[Atom]:
    out: list[Atom] = []
    for a in used_actions(d):
        out.extend(atoms_of(d.guard(a)))
    for c in constraints:
        out.extend(atoms_of(c))
    out.extend(a for f in d.initial_constraints() for a in atoms_of(f))
    return out


def check_mc(d: Ddsa, constraints: Sequence[Formula]) -> bool:
    """Monotonicity criterion: rational domain and every atom of guards and
    constraints compares two variables/constants."""
    if d.domain != RAT:
        return False
    return all(
        solve.classify(a) == ConstraintClass.MC for a in _criterion_atoms(d, constraints)
    )


def check_gc(d: Ddsa, constraints: Sequence[Formula]) -> tuple[bool, Optional[int]]:
    """Gap-order criterion plus the cutoff bound K.

    K is the largest pairwise constant distance plus one, over all integer
    constants (endpoints and gaps) of guards, the initial assignment, and
    the verification constraints; 0 always counts as a constant.
    """
    consts: set[int] = {0}
    for a in _criterion_atoms(d, constraints):
        v = solve.gc_norm(norm_atom(a))
        if v is None:
            return (False, None)
        for (p, q, k) in v[1]:
            consts.add(k)
            if isinstance(p, int):
                consts.add(p)
            if isinstance(q, int):
                consts.add(q)
    K = max(consts) - min(consts) + 1
    return (True, K)


# ---------------------------------------------------------------------------
# Computation graphs (for feedback freedom and bounded lookback)

GNode = tuple[str, int]  # (variable name, instant)


@dataclass
class ComputationGraph:
    """Undirected dependency graph over variable instances of a symbolic run.

    Edges are tagged: an equality edge comes from a literal of the exact
    shape x = y between two instances; everything else is general.
    """

    length: int
    var_names: list[str]
    eq_edges: set[frozenset[GNode]] = field(default_factory=set)
    gen_edges: set[frozenset[GNode]] = field(default_factory=set)

    def nodes(self) -> list[GNode]:
        return [(v, i) for i in range(self.length + 1) for v in self.var_names]

    def classes(self) -> dict[GNode, GNode]:
        """Union-find roots of the equality subgraph's components."""
        parent: dict[GNode, GNode] = {n: n for n in self.nodes()}

        def find(x: GNode) -> GNode:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in sorted(self.eq_edges, key=sorted):
            a, b = sorted(e)
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        return {n: find(n) for n in self.nodes()}

    def spans(self) -> dict[GNode, set[int]]:
        """Instants covered by each node's equality class, keyed by root."""
        roots = self.classes()
        out: dict[GNode, set[int]] = {}
        for n, r in roots.items():
            out.setdefault(r, set()).add(n[1])
        return out

    def collapsed_edges(self) -> tuple[dict[GNode, GNode], set[frozenset[GNode]]]:
        """General edges between equality classes, self-loops dropped."""
        roots = self.classes()
        edges: set[frozenset[GNode]] = set()
        for e in self.gen_edges:
            a, b = tuple(e)
            ra, rb = roots[a], roots[b]
            if ra != rb:
                edges.add(frozenset({ra, rb}))
        return roots, edges


def _atom_instance_pairs(a: Atom, inst: dict[VarId, GNode]):
    na = norm_atom(a)
    present = [inst[v] for v, _ in na.coeffs if v in inst]
    if len(present) < 2:
        return [], False
    is_eq = (
        na.op == "="
        and len(na.coeffs) == 2
        and na.const == 0
        and {c for _, c in na.coeffs} == {Fraction(1), Fraction(-1)}
    )
    pairs = [
        frozenset({present[i], present[j]})
        for i in range(len(present))
        for j in range(i + 1, len(present))
        if present[i] != present[j]
    ]
    return pairs, is_eq


def computation_graph(
    d: Ddsa, actions: Sequence[str], constraints: Sequence[Formula]
) -> ComputationGraph:
    """Dependency graph of a symbolic run, over-approximating verification
    constraints by inserting every constraint at every instant."""
    dd.symbolic_states(d, actions)
    n = len(actions)
    names = [v.name for v in d.variables]
    g = ComputationGraph(n, names)
    for k, a in enumerate(actions, start=1):
        delta = dd.transition_formula(d, a)
        inst = {}
        for v in d.variables:
            inst[v.read()] = (v.name, k - 1)
            inst[v.write()] = (v.name, k)
        for at in atoms_of(delta):
            pairs, is_eq = _atom_instance_pairs(at, inst)
            (g.eq_edges if is_eq else g.gen_edges).update(pairs)
    for k in range(n + 1):
        inst_c = {v: (v.name, k) for v in d.variables}
        for c in constraints:
            for at in atoms_of(c):
                pairs, is_eq = _atom_instance_pairs(at, inst_c)
                (g.eq_edges if is_eq else g.gen_edges).update(pairs)
    return g


def _longest_path_exceeds(edges: set[frozenset[GNode]], bound: int) -> bool:
    """Is there a simple path with more than `bound` edges?"""
    return _longest_path(edges, stop_above=bound) > bound


def _longest_path(edges: set[frozenset[GNode]], stop_above: Optional[int] = None) -> int:
    """Length of the longest simple path (0 for edgeless graphs)."""
    adj: dict[GNode, list[GNode]] = {}
    for e in edges:
        a, b = tuple(e)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    best = 0
    steps = 0
    for root in sorted(adj):
        stack = [(root, {root}, 0)]
        while stack:
            steps += 1
            if steps > 2_000_000:
                raise BudgetExceeded("path search too large")
            node, seen, depth = stack.pop()
            best = max(best, depth)
            if stop_above is not None and best > stop_above:
                return best
            for nxt in adj.get(node, []):
                if nxt not in seen:
                    stack.append((nxt, seen | {nxt}, depth + 1))
    return best


def enumerate_symbolic_runs(
    d: Ddsa, unroll: int, max_runs: int = 100_000, maximal_only: bool = False
) -> Iterator[list[str]]:
    """All symbolic runs in which no transition is traversed more than
    `unroll` times.  A bounded stand-in for full dependency saturation.

    With `maximal_only`, only runs with no in-budget extension are yielded;
    this suffices for prefix-monotone checks like path length.
    """
    budget: dict[tuple[str, str], int] = {}
    count = 0

    def go(state: str, acc: list[str]):
        nonlocal count
        count += 1
        if count > max_runs:
            raise BudgetExceeded("symbolic run enumeration too large")
        extended = False
        for (a, dst) in d.outgoing(state):
            key = (state, a)
            if budget.get(key, 0) >= unroll:
                continue
            extended = True
            budget[key] = budget.get(key, 0) + 1
            acc.append(a)
            yield from go(dst, acc)
            acc.pop()
            budget[key] -= 1
        if not maximal_only or not extended:
            yield list(acc)

    yield from go(d.initial, [])


def max_collapsed_path(
    d: Ddsa, constraints: Sequence[Formula], unroll: int, max_runs: int
) -> int:
    """Longest collapsed dependency path over all runs at the given unroll."""
    best = 0
    for actions in enumerate_symbolic_runs(d, unroll, max_runs, maximal_only=True):
        g = computation_graph(d, actions, constraints)
        _, edges = g.collapsed_edges()
        best = max(best, _longest_path(edges))
    return best


def check_bounded_lookback(
    d: Ddsa,
    constraints: Sequence[Formula],
    K: int,
    unroll: int,
    max_runs: int = 100_000,
) -> bool:
    """After collapsing equality classes, no enumerated run's dependency
    graph may contain an acyclic path longer than K.

    Only maximal runs are inspected: collapsed path length never shrinks
    when a run is extended.
    """
    if K < 1 or unroll < 1:
        raise ValueError("K and unroll must be positive")
    for actions in enumerate_symbolic_runs(d, unroll, max_runs, maximal_only=True):
        g = computation_graph(d, actions, constraints)
        _, edges = g.collapsed_edges()
        if _longest_path_exceeds(edges, K):
            return False
    return True


def _feedback_free_run(g: ComputationGraph) -> bool:
    roots = g.classes()
    spans = g.spans()
    adj: dict[GNode, list[GNode]] = {}
    for e in g.eq_edges | g.gen_edges:
        a, b = tuple(e)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    by_var: dict[str, list[GNode]] = {}
    for n in g.nodes():
        by_var.setdefault(n[0], []).append(n)
    for name, insts in by_var.items():
        for i in range(len(insts)):
            for j in range(i + 1, len(insts)):
                a, b = insts[i], insts[j]
                need = spans[roots[a]] | spans[roots[b]]
                if spans[roots[a]] >= need or spans[roots[b]] >= need:
                    continue
                blocked = {n for n in g.nodes() if spans[roots[n]] >= need}
                if _connected_avoiding(adj, a, b, blocked):
                    return False
    return True


def _connected_avoiding(adj, src: GNode, dst: GNode, blocked: set[GNode]) -> bool:
    if src in blocked or dst in blocked:
        return False
    seen = {src}
    stack = [src]
    while stack:
        n = stack.pop()
        if n == dst:
            return True
        for nxt in adj.get(n, []):
            if nxt not in seen and nxt not in blocked:
                seen.add(nxt)
                stack.append(nxt)
    return False


def check_feedback_free(
    d: Ddsa,
    constraints: Sequence[Formula],
    unroll: int = 2,
    max_runs: int = 100_000,
) -> bool:
    """Every dependency between two instances of a variable is spanned by a
    node whose equality class covers both involved intervals."""
    for actions in enumerate_symbolic_runs(d, unroll, max_runs):
        if not _feedback_free_run(computation_graph(d, actions, constraints)):
            return False
    return True


# ---------------------------------------------------------------------------
# Decompositions


def seq_decompose(d: Ddsa) -> Optional[tuple[Ddsa, Ddsa, str]]:
    """Split at a cut state: the prefix part keeps the initial state and gets
    the cut as its only final; the suffix part starts at the cut with a
    symbolic initial assignment.  Smallest prefix wins ties."""
    candidates = []
    for cut in d.states:
        part2 = _reachable_from(d, cut)
        part1 = (set(d.states) - part2) | {cut}
        if part1 == {cut}:
            continue
        if d.initial not in part1 or d.initial in part2 - {cut}:
            continue
        if not set(d.finals) <= part2:
            continue
        ok = True
        for (s, _, t) in d.transitions:
            if s in part2 and t == cut:
                ok = False  # reentry into the cut
            if s in part1 - {cut} and t in part2 - {cut}:
                ok = False  # bypass around the cut
        if ok:
            candidates.append((len(part1), d.states.index(cut), cut, part1, part2))
    if not candidates:
        return None
    _, _, cut, part1, part2 = min(candidates)
    d1 = _sub_system(d, part1, initial=d.initial, finals={cut}, alpha0=d.alpha0)
    d2 = _sub_system(d, part2, initial=cut, finals=set(d.finals), alpha0=None)
    return d1, d2, cut


def _reachable_from(d: Ddsa, start: str) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        s = stack.pop()
        for (_, t) in d.outgoing(s):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


def _sub_system(d: Ddsa, states: set[str], initial: str, finals: set[str], alpha0) -> Ddsa:
    trans = tuple(
        (s, a, t) for (s, a, t) in d.transitions if s in states and t in states
    )
    acts = []
    for (_, a, _) in trans:
        if a not in acts:
            acts.append(a)
    return Ddsa(
        states=tuple(s for s in d.states if s in states),
        initial=initial,
        actions=tuple(acts),
        transitions=trans,
        finals=frozenset(finals),
        variables=d.variables,
        alpha0=dict(alpha0) if alpha0 is not None else None,
        guards={a: d.guards[a] for a in acts},
        domain=d.domain,
    )


def var_decompose(
    d: Ddsa, constraints: Sequence[Formula]
) -> Optional[tuple[tuple[VarId, ...], tuple[VarId, ...]]]:
    """Two-part split of the variables such that every guard and constraint
    atom lives on one side.

    Components of the atom co-occurrence graph are grouped so that the
    gap-order-expressible ones form the first side; if that degenerates,
    the first component stands against the rest.
    """
    names = [v.name for v in d.variables]
    parent = {n: n for n in names}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    atoms = _criterion_atoms(d, constraints)
    for a in atoms:
        vs = sorted({v.name for v in free_vars(a)})
        for other in vs[1:]:
            ra, rb = find(vs[0]), find(other)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    comps: dict[str, list[str]] = {}
    for n in names:
        comps.setdefault(find(n), []).append(n)
    ordered = [comps[r] for r in sorted(comps, key=names.index)]
    if len(ordered) < 2:
        return None
    gc_ok: dict[int, bool] = {}
    for i, comp in enumerate(ordered):
        cs = set(comp)
        relevant = [a for a in atoms if {v.name for v in free_vars(a)} & cs]
        gc_ok[i] = all(solve.gc_norm(norm_atom(a)) is not None for a in relevant)
    side1 = [n for i, comp in enumerate(ordered) if gc_ok[i] for n in comp]
    side2 = [n for i, comp in enumerate(ordered) if not gc_ok[i] for n in comp]
    if not side1 or not side2:
        side1 = ordered[0]
        side2 = [n for comp in ordered[1:] for n in comp]
    v1 = tuple(v for v in d.variables if v.name in set(side1))
    v2 = tuple(v for v in d.variables if v.name in set(side2))
    return v1, v2


def project_system(d: Ddsa, keep: Sequence[VarId]) -> Ddsa:
    """Projection onto a variable subset: guard atoms over other variables
    are dropped (the guard becomes true when nothing remains)."""
    keep_names = {v.name for v in keep}
    guards = {}
    for a in d.actions:
        parts = [
            at
            for at in atoms_of(d.guard(a))
            if {v.name for v in free_vars(at)} <= keep_names
        ]
        guards[a] = conj(*parts)
    return Ddsa(
        states=d.states,
        initial=d.initial,
        actions=d.actions,
        transitions=d.transitions,
        finals=d.finals,
        variables=tuple(v for v in d.variables if v.name in keep_names),
        alpha0=None if d.alpha0 is None else {v: d.alpha0[v] for v in d.variables if v.name in keep_names},
        guards=guards,
        domain=d.domain,
    )


# ---------------------------------------------------------------------------
# Summary strategies


class Strategy:
    """Update procedure plus equivalence relation for one (sub)system."""

    exact = True

    def describe(self) -> str:
        raise NotImplementedError

    def initial_state(self):
        raise NotImplementedError

    def update(self, state, action: str, constrs: Sequence[Formula], src: str, dst: str):
        raise NotImplementedError

    def equiv(self, s1, s2, control: str) -> bool:
        raise NotImplementedError

    def sat(self, state, control: str) -> bool:
        raise NotImplementedError

    def formula(self, state) -> Formula:
        raise NotImplementedError

    def conjoin(self, state, constrs: Sequence[Formula]):
        """State with extra constraints and no transition taken (used for the
        dummy initial step, whose transition formula is pure inertia)."""
        return conj(state, *constrs)

    def verified_note(self) -> Optional[str]:
        return None

    def _memo_equiv(self, s1, s2, compute) -> bool:
        """Equivalence is symmetric and queried repeatedly during pool scans;
        cache per strategy instance."""
        memo = self.__dict__.setdefault("_eq_cache", {})
        hit = memo.get((s1, s2))
        if hit is None:
            hit = memo.get((s2, s1))
        if hit is None:
            hit = compute()
            memo[(s1, s2)] = hit
        return hit


@dataclass
class McStrategy(Strategy):
    d: Ddsa

    def describe(self) -> str:
        return "MC"

    def initial_state(self) -> Formula:
        return conj(*self.d.initial_constraints())

    def update(self, state, action, constrs, src, dst) -> Formula:
        return conj(dd.update(self.d, state, action, qe=solve.qe_rational), *constrs)

    def equiv(self, s1, s2, control) -> bool:
        return self._memo_equiv(s1, s2, lambda: solve.equivalent(s1, s2, RAT))

    def sat(self, state, control) -> bool:
        return solve.is_sat(state, RAT).sat

    def formula(self, state) -> Formula:
        return state


@dataclass
class GcStrategy(Strategy):
    d: Ddsa
    K: int

    def describe(self) -> str:
        return f"GC(K={self.K})"

    def initial_state(self) -> Formula:
        return conj(*self.d.initial_constraints())

    def update(self, state, action, constrs, src, dst) -> Formula:
        return conj(dd.update(self.d, state, action, qe=solve.qe_gc), *constrs)

    def equiv(self, s1, s2, control) -> bool:
        return self._memo_equiv(s1, s2, lambda: solve.gc_equivalent(s1, s2, self.K))

    def sat(self, state, control) -> bool:
        return solve.is_sat(state, INT).sat

    def formula(self, state) -> Formula:
        return state


@dataclass
class LookbackStrategy(Strategy):
    """Control-flow criterion: equivalence is plain logical equivalence.

    `origin` records whether the bound came from feedback freedom or from
    the direct bounded-lookback check; both are verified only up to the
    recorded unroll depth.
    """

    d: Ddsa
    K: int
    origin: str  # "bounded-lookback" | "feedback-free"
    unroll: int

    exact = False

    def describe(self) -> str:
        via = " via feedback freedom" if self.origin == "feedback-free" else ""
        return f"bounded-lookback(K={self.K}{via})"

    def verified_note(self) -> Optional[str]:
        return f"verified up to unroll {self.unroll}"

    def initial_state(self) -> Formula:
        return conj(*self.d.initial_constraints())

    def update(self, state, action, constrs, src, dst) -> Formula:
        return conj(dd.update(self.d, state, action, qe=solve.qe_rational), *constrs)

    def equiv(self, s1, s2, control) -> bool:
        return self._memo_equiv(s1, s2, lambda: solve.equivalent(s1, s2, RAT))

    def sat(self, state, control) -> bool:
        return solve.is_sat(state, RAT).sat

    def formula(self, state) -> Formula:
        return state


@dataclass
class SeqStrategy(Strategy):
    """Sequential composition at a cut state.

    Phase-two formulas are produced by continuing updates from the
    phase-one representative at the cut, which realizes the existential
    combination of the two history sets with quantifiers eliminated
    eagerly.
    """

    d: Ddsa
    left: Strategy
    right: Strategy
    cut: str
    left_states: frozenset[str]
    right_states: frozenset[str]

    def __post_init__(self):
        self.exact = self.left.exact and self.right.exact

    def describe(self) -> str:
        return f"seq-compose({self.left.describe()}, {self.right.describe()}; cut='{self.cut}')"

    def verified_note(self) -> Optional[str]:
        notes = [n for n in (self.left.verified_note(), self.right.verified_note()) if n]
        return "; ".join(notes) or None

    def initial_state(self) -> Formula:
        return self.left.initial_state()

    def _side(self, control: str) -> Strategy:
        return self.left if control in self.left_states else self.right

    def update(self, state, action, constrs, src, dst):
        if src in self.left_states and dst in self.left_states:
            return self.left.update(state, action, constrs, src, dst)
        return self.right.update(state, action, constrs, src, dst)

    def equiv(self, s1, s2, control) -> bool:
        return self._side(control).equiv(s1, s2, control)

    def sat(self, state, control) -> bool:
        return self._side(control).sat(state, control)

    def formula(self, state) -> Formula:
        return state


@dataclass
class VarStrategy(Strategy):
    """Variable-disjoint composition; states are per-part formula pairs."""

    d: Ddsa
    v1: tuple[VarId, ...]
    v2: tuple[VarId, ...]
    left: Strategy
    right: Strategy

    def __post_init__(self):
        self.exact = self.left.exact and self.right.exact
        self._names1 = {v.name for v in self.v1}

    def describe(self) -> str:
        n1 = ",".join(v.name for v in self.v1)
        n2 = ",".join(v.name for v in self.v2)
        return (
            f"var-compose({{{n1}}}: {self.left.describe()}; "
            f"{{{n2}}}: {self.right.describe()})"
        )

    def verified_note(self) -> Optional[str]:
        notes = [n for n in (self.left.verified_note(), self.right.verified_note()) if n]
        return "; ".join(notes) or None

    def _split(self, constrs: Sequence[Formula]) -> tuple[list[Formula], list[Formula]]:
        c1, c2 = [], []
        for c in constrs:
            names = {v.name for v in free_vars(c)}
            (c1 if names <= self._names1 else c2).append(c)
        return c1, c2

    def initial_state(self):
        return (self.left.initial_state(), self.right.initial_state())

    def update(self, state, action, constrs, src, dst):
        c1, c2 = self._split(constrs)
        return (
            self.left.update(state[0], action, c1, src, dst),
            self.right.update(state[1], action, c2, src, dst),
        )

    def conjoin(self, state, constrs):
        c1, c2 = self._split(constrs)
        return (self.left.conjoin(state[0], c1), self.right.conjoin(state[1], c2))

    def equiv(self, s1, s2, control) -> bool:
        return self.left.equiv(s1[0], s2[0], control) and self.right.equiv(
            s1[1], s2[1], control
        )

    def sat(self, state, control) -> bool:
        return self.left.sat(state[0], control) and self.right.sat(state[1], control)

    def formula(self, state) -> Formula:
        return conj(self.left.formula(state[0]), self.right.formula(state[1]))


# ---------------------------------------------------------------------------
# Detection


@dataclass
class DetectOptions:
    unroll_ff: int = 2
    lookback_K: Optional[int] = None
    max_runs: int = 100_000
    _depth: int = 0


class NoSummaryFound(Exception):
    """No criterion applied; says nothing about the system itself."""


def detect(
    d: Ddsa, constraints: Sequence[Formula], opts: Optional[DetectOptions] = None
) -> Strategy:
    s = _detect(d, list(constraints), opts or DetectOptions())
    if s is None:
        raise NoSummaryFound(
            "no finite-summary criterion applied; this says nothing about the "
            "system itself (the summary property is undecidable in general)"
        )
    return s


def _detect(d: Ddsa, constraints: list[Formula], opts: DetectOptions) -> Optional[Strategy]:
    if opts._depth > 8:
        return None
    if check_mc(d, constraints):
        return McStrategy(d)
    gc_ok, K = check_gc(d, constraints)
    if gc_ok:
        return GcStrategy(d, K)
    if d.domain == RAT:
        try:
            if check_feedback_free(d, constraints, opts.unroll_ff, opts.max_runs):
                return LookbackStrategy(
                    d, 2 * len(d.variables), "feedback-free", opts.unroll_ff
                )
            if opts.lookback_K is not None:
                K_lb = opts.lookback_K
                if check_bounded_lookback(
                    d, constraints, K_lb, K_lb + 1, opts.max_runs
                ):
                    return LookbackStrategy(d, K_lb, "bounded-lookback", K_lb + 1)
            else:
                # stabilization probe: claim a bound only when the longest
                # collapsed path stops growing between unroll depths
                l2 = max_collapsed_path(d, constraints, 2, opts.max_runs)
                l3 = max_collapsed_path(d, constraints, 3, opts.max_runs)
                if l2 == l3:
                    return LookbackStrategy(d, max(l3, 1), "bounded-lookback", 3)
        except BudgetExceeded:
            pass
    deeper = DetectOptions(opts.unroll_ff, opts.lookback_K, opts.max_runs, opts._depth + 1)
    split = var_decompose(d, constraints)
    if split is not None:
        v1, v2 = split
        names1 = {v.name for v in v1}
        c1 = [c for c in constraints if {v.name for v in free_vars(c)} <= names1]
        c2 = [c for c in constraints if c not in c1]
        left = _detect(project_system(d, v1), c1, deeper)
        right = _detect(project_system(d, v2), c2, deeper)
        if left is not None and right is not None:
            return VarStrategy(d, v1, v2, left, right)
    parts = seq_decompose(d)
    if parts is not None:
        d1, d2, cut = parts
        progress = set(d1.states) != set(d.states) or d1.finals != d.finals
        if progress:
            left = _detect(d1, constraints, deeper)
            right = _detect(d2, constraints, deeper)
            if left is not None and right is not None:
                return SeqStrategy(
                    d, left, right, cut, frozenset(d1.states), frozenset(d2.states)
                )
    return None


# ---------------------------------------------------------------------------
# Constraint graph


@dataclass
class CgNode:
    state: str
    formula: Formula
    sstate: object


@dataclass
class ConstraintGraph:
    nodes: list[CgNode]
    edges: list[tuple[int, str, int]]
    initial: int = 0


def constraint_graph(
    d: Ddsa, strategy: Strategy, max_nodes: int = 10_000
) -> ConstraintGraph:
    """Fixpoint exploration from the initial constraint: successors are
    update images; a node is reused when the strategy's equivalence matches
    an existing representative for the same control state.  Unsatisfiable
    images are pruned before node creation."""
    init = strategy.initial_state()
    nodes = [CgNode(d.initial, strategy.formula(init), init)]
    pool: dict[str, list[int]] = {d.initial: [0]}
    edges: list[tuple[int, str, int]] = []
    queue = [0]
    while queue:
        i = queue.pop(0)
        node = nodes[i]
        for (a, dst) in d.outgoing(node.state):
            ns = strategy.update(node.sstate, a, (), node.state, dst)
            if not strategy.sat(ns, dst):
                continue
            j = None
            for cand in pool.get(dst, []):
                if strategy.equiv(nodes[cand].sstate, ns, dst):
                    j = cand
                    break
            if j is None:
                if len(nodes) >= max_nodes:
                    raise BudgetExceeded(
                        f"constraint graph exceeded {max_nodes} nodes; "
                        "the strategy's equivalence did not converge"
                    )
                j = len(nodes)
                nodes.append(CgNode(dst, strategy.formula(ns), ns))
                pool.setdefault(dst, []).append(j)
                queue.append(j)
            edges.append((i, a, j))
    return ConstraintGraph(nodes, edges)
