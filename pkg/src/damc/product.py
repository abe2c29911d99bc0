"""Cross product of the system abstraction with the property automaton,
emptiness check, and constructive witness extraction."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import ddsa as dd
from . import ltlf as lt
from . import solve
from . import summary as sm
from .ddsa import Config, Ddsa, Run
from .formula import INT, Formula, Term, VarId, conj, substitute
from .ltlf import Ltlf, Nfa, SigmaSymbol
from .solve import BudgetExceeded


class InternalInconsistency(Exception):
    """A backward solving step failed; the summary abstraction is unsound.

    This must abort loudly rather than be retried: it indicates a bug in
    the equivalence relation, never a property of the model."""


def extend_with_dummy(d: Ddsa) -> Ddsa:
    """Prefix a dummy initial state reached by a fresh always-enabled action."""
    if d.dummy is not None:
        raise ValueError("system already carries a dummy initial state")
    b0 = _fresh_name("_init", d.states)
    a0 = _fresh_name("_start", d.actions)
    guards = dict(d.guards)
    guards[a0] = conj()  # true
    return Ddsa(
        states=(b0,) + d.states,
        initial=b0,
        actions=(a0,) + d.actions,
        transitions=((b0, a0, d.initial),) + d.transitions,
        finals=d.finals,
        variables=d.variables,
        alpha0=dict(d.alpha0) if d.alpha0 is not None else None,
        guards=guards,
        domain=d.domain,
        dummy=(b0, a0),
    )


def _fresh_name(base: str, taken: Sequence[str]) -> str:
    name = base
    i = 0
    while name in taken:
        i += 1
        name = f"{base}{i}"
    return name


@dataclass
class PNode:
    state: str
    q: int  # NFA state index
    formula: Formula
    sstate: object


@dataclass
class PEdge:
    src: int
    action: str
    symbol: SigmaSymbol
    dst: int


def _symbol_key(symbol: SigmaSymbol):
    return (len(symbol), sorted(str(s) for s in symbol))


@dataclass
class ProductAutomaton:
    nfa: Nfa
    nodes: list[PNode]
    edges: list[PEdge]
    initial: int
    finals: set[int]

    def __post_init__(self):
        self._adj: dict[int, list[PEdge]] = {}
        for e in self.edges:
            self._adj.setdefault(e.src, []).append(e)
        # deterministic search order: actions as declared (insertion order),
        # then symbols canonically, smallest requirement sets first
        for lst in self._adj.values():
            first = {}
            for e in lst:
                first.setdefault(e.action, len(first))
            lst.sort(key=lambda e: (first[e.action], _symbol_key(e.symbol)))

    def outgoing(self, i: int) -> list[PEdge]:
        return self._adj.get(i, [])


def build_product(
    d: Ddsa,
    nfa: Nfa,
    strategy: sm.Strategy,
    max_nodes: int = 10_000,
) -> ProductAutomaton:
    """Forward fixpoint over triples (control state, NFA state, formula).

    An edge needs a satisfiable update image conjoined with the NFA
    symbol's constraints, and the symbol must be consistent with the
    transition taken.  Nodes at the word-end NFA state are only created
    when final (they have no successors, so non-final ones are dead).
    """
    if d.dummy is None:
        raise ValueError("build_product needs the dummy-extended system")
    qe_idx = next(i for i, s in enumerate(nfa.states) if s == lt.QE_STATE)
    dummy_action = d.dummy[1]
    init_state = strategy.initial_state()
    init = PNode(d.initial, nfa.initial, strategy.formula(init_state), init_state)
    nodes = [init]
    pool: dict[tuple[str, int], list[int]] = {(d.initial, nfa.initial): [0]}
    reps: dict[str, list[int]] = {d.initial: [0]}
    edges: list[PEdge] = []
    finals: set[int] = set()
    queue = [0]
    while queue:
        i = queue.pop(0)
        node = nodes[i]
        for (a, dst) in d.outgoing(node.state):
            cache: dict = {}
            for ne in nfa.outgoing(node.q):
                if not lt.symbol_consistent_with_step(ne.symbol, a, dst):
                    continue
                if ne.dst == qe_idx and dst not in d.finals:
                    continue
                constrs = tuple(lt.constr_of(ne.symbol))
                key = constrs
                if key in cache:
                    ns, ok = cache[key]
                else:
                    if a == dummy_action:
                        ns = strategy.conjoin(node.sstate, constrs)
                    else:
                        ns = strategy.update(node.sstate, a, constrs, node.state, dst)
                    ok = strategy.sat(ns, dst)
                    cache[key] = (ns, ok)
                if not ok:
                    continue
                j = None
                for cand in pool.get((dst, ne.dst), []):
                    if strategy.equiv(nodes[cand].sstate, ns, dst):
                        j = cand
                        break
                if j is None:
                    # reuse the state's representative formula when one matches
                    rep_state = ns
                    for cand in reps.get(dst, []):
                        if strategy.equiv(nodes[cand].sstate, ns, dst):
                            rep_state = nodes[cand].sstate
                            break
                    if len(nodes) >= max_nodes:
                        raise BudgetExceeded(
                            f"product exceeded {max_nodes} nodes"
                        )
                    j = len(nodes)
                    nodes.append(PNode(dst, ne.dst, strategy.formula(rep_state), rep_state))
                    pool.setdefault((dst, ne.dst), []).append(j)
                    reps.setdefault(dst, []).append(j)
                    if ne.dst != qe_idx:
                        queue.append(j)
                    if dst in d.finals and ne.dst in nfa.finals:
                        finals.add(j)
                edges.append(PEdge(i, a, ne.symbol, j))
    return ProductAutomaton(nfa, nodes, edges, 0, finals)


def find_accepting_path(p: ProductAutomaton) -> Optional[list[PEdge]]:
    """Shortest path to a final node; BFS in insertion order is deterministic."""
    if p.initial in p.finals:
        return []
    back: dict[int, PEdge] = {p.initial: None}  # type: ignore[assignment]
    queue = [p.initial]
    while queue:
        i = queue.pop(0)
        for e in p.outgoing(i):
            if e.dst in back:
                continue
            back[e.dst] = e
            if e.dst in p.finals:
                path = [e]
                while path[0].src != p.initial:
                    path.insert(0, back[path[0].src])
                return path
            queue.append(e.dst)
    return None


# ---------------------------------------------------------------------------
# Witness extraction


def _exact_qe(d: Ddsa):
    return solve.qe_gc if d.domain == INT else solve.qe_rational


def realize_run(
    d: Ddsa, actions: Sequence[str], cseq: Sequence[Sequence[Formula]]
) -> Optional[Run]:
    """Concrete run abstracted by a symbolic run whose positions satisfy the
    given constraint sets, or None when the history constraint is
    unsatisfiable.

    Solves the exact history constraint for the final assignment and walks
    backwards, constructing each intermediate assignment from the prefix
    history constraint plus the grounded transition formula.
    """
    states = dd.symbolic_states(d, actions)
    qe = _exact_qe(d)
    hist: list[Formula] = []
    phi: Formula = conj(*d.initial_constraints(), *cseq[0])
    hist.append(phi)
    for k, a in enumerate(actions):
        phi = conj(dd.update(d, phi, a, qe=qe), *cseq[k + 1])
        hist.append(phi)

    res = solve.is_sat(hist[-1], d.domain)
    if not res.sat:
        return None
    zero = Fraction(0)
    assigns: list[dict[VarId, Fraction]] = [None] * len(hist)  # type: ignore[list-item]
    assigns[-1] = {v: res.model.get(v, zero) for v in d.variables}
    for k in range(len(actions) - 1, -1, -1):
        delta = dd.transition_formula(d, actions[k])
        ground = substitute(
            delta,
            {
                **{v.read(): Term.of(v) for v in d.variables},
                **{v.write(): Term.of(assigns[k + 1][v]) for v in d.variables},
            },
        )
        step = solve.is_sat(conj(hist[k], ground), d.domain)
        if not step.sat:
            raise InternalInconsistency(
                f"backward solving failed at step {k}: abstraction is unsound"
            )
        assigns[k] = {v: step.model.get(v, zero) for v in d.variables}
    configs = [Config.make(s, al) for s, al in zip(states, assigns)]
    return Run(tuple(configs), tuple(actions))


def extract_witness(d: Ddsa, path: Sequence[PEdge], nodes: list[PNode]) -> tuple[Run, list[SigmaSymbol]]:
    """Concrete run from an accepting path, by re-solving exact history
    constraints rather than trusting the path's representatives.

    The dummy first step contributes the position-0 constraint set; the
    returned run starts at the real initial state.
    """
    if d.dummy is None or not path:
        raise ValueError("path must start with the dummy step")
    word: list[SigmaSymbol] = [e.symbol for e in path]
    actions = [e.action for e in path[1:]]
    cseq = [lt.constr_of(s) for s in word]
    inner = Ddsa(
        states=tuple(s for s in d.states if s != d.dummy[0]),
        initial=nodes[path[0].dst].state,
        actions=tuple(a for a in d.actions if a != d.dummy[1]),
        transitions=tuple(t for t in d.transitions if t[1] != d.dummy[1]),
        finals=d.finals,
        variables=d.variables,
        alpha0=dict(d.alpha0) if d.alpha0 is not None else None,
        guards={a: g for a, g in d.guards.items() if a != d.dummy[1]},
        domain=d.domain,
    )
    run = realize_run(inner, actions, cseq)
    if run is None:
        raise InternalInconsistency(
            "accepting path has unsatisfiable history constraint"
        )
    return run, word


# ---------------------------------------------------------------------------
# Verdicts and orchestration


@dataclass
class Stats:
    strategy: str = ""
    note: Optional[str] = None
    nfa_states: int = 0
    nfa_edges: int = 0
    product_nodes: int = 0
    product_edges: int = 0
    product_finals: int = 0


@dataclass
class Verdict:
    kind: str  # "witness" | "no-witness" | "inconclusive"
    stats: Stats
    run: Optional[Run] = None
    word: Optional[list[SigmaSymbol]] = None
    reason: Optional[str] = None
    product: Optional[ProductAutomaton] = None
    nfa: Optional[Nfa] = None
    strategy: Optional[sm.Strategy] = None


@dataclass
class VerifyOptions:
    max_nodes: int = 10_000
    unroll: int = 2
    lookback_K: Optional[int] = None
    keep_artifacts: bool = False


def verify(d: Ddsa, psi: Ltlf, options: Optional[VerifyOptions] = None) -> Verdict:
    """End-to-end check for a witness run: preprocess the property, detect a
    finite summary, build the product, search for an accepting path, and
    extract plus revalidate a concrete run.

    Failures to detect a summary or stay within budget yield an
    inconclusive verdict, never an unsound answer.
    """
    opts = options or VerifyOptions()
    pre = lt.preprocess(psi)
    constraints = lt.constraints_of(pre)
    stats = Stats()
    try:
        strategy = sm.detect(
            d,
            constraints,
            sm.DetectOptions(unroll_ff=opts.unroll, lookback_K=opts.lookback_K),
        )
    except sm.NoSummaryFound as e:
        return Verdict("inconclusive", stats, reason=str(e))
    stats.strategy = strategy.describe()
    stats.note = strategy.verified_note()
    nfa = lt.build_nfa(pre, d.domain)
    stats.nfa_states = len(nfa.states)
    stats.nfa_edges = len(nfa.edges)
    extended = extend_with_dummy(d)
    try:
        prod = build_product(extended, nfa, strategy, opts.max_nodes)
    except (BudgetExceeded, solve.UnsupportedInteger) as e:
        return Verdict("inconclusive", stats, reason=str(e))
    stats.product_nodes = len(prod.nodes)
    stats.product_edges = len(prod.edges)
    stats.product_finals = len(prod.finals)
    keep = dict(product=prod, nfa=nfa, strategy=strategy) if opts.keep_artifacts else {}
    path = find_accepting_path(prod)
    if path is None:
        if strategy.exact or strategy.verified_note() is not None:
            return Verdict("no-witness", stats, **keep)
        return Verdict(
            "inconclusive", stats, reason="summary heuristic not verified", **keep
        )
    run, word = extract_witness(extended, path, prod.nodes)
    _assert_witness(d, run, word, pre)
    return Verdict("witness", stats, run=run, word=word, **keep)


def _assert_witness(d: Ddsa, run: Run, word: Sequence[SigmaSymbol], pre: Ltlf) -> None:
    """Every extracted witness is revalidated; failures abort loudly."""
    if not dd.validate_run(d, run):
        raise InternalInconsistency("extracted run violates step semantics")
    if run.configs[-1].state not in d.finals:
        raise InternalInconsistency("extracted run does not end in a final state")
    if not lt.run_models(d, run, 0, pre):
        raise InternalInconsistency("extracted run does not satisfy the property")
    if not lt.word_consistent(d, list(word), run):
        raise InternalInconsistency("extracted word is inconsistent with the run")
