import itertools
from fractions import Fraction as F

import pytest

from damc import oracle, parsing
from damc.formula import RAT, Term, VarId, atom, conj
from damc.ltlf import (
    BOT,
    TOP,
    ActionAtom,
    ActNext,
    Always,
    Constr,
    DeltaEntry,
    Eventually,
    LAnd,
    LOr,
    LengthMismatch,
    Next,
    QE_STATE,
    StateAtom,
    Until,
    build_nfa,
    constraints_of,
    delta,
    fmt_symbol,
    land,
    lor,
    preprocess,
    run_models,
    sym_action,
    sym_constr,
    sym_state,
    word_consistent,
)

x, y = VarId("x"), VarId("y")
C_Y5 = Constr(atom(y, ">", 5))


def edge_set(nfa):
    return {(nfa.state_name(e.src), fmt_symbol(e.symbol), nfa.state_name(e.dst)) for e in nfa.edges}


# ---------------------------------------------------------------------------
# preprocessing


def test_preprocess_action_modality():
    psi = ActNext("a1", Constr(atom(x, ">", 0)))
    out = preprocess(psi)
    assert out == Next(land(ActionAtom("a1"), Constr(atom(x, ">", 0))))


def test_preprocess_fixpoint_without_modalities():
    psi = Eventually(C_Y5)
    assert preprocess(psi) == psi


def test_preprocess_nested_modalities():
    true_c = Constr(atom(Term.of(0), "=", Term.of(0)))
    psi = Eventually(ActNext("storno", ActNext("reopen", true_c)))
    out = preprocess(psi)
    expected = Eventually(
        Next(land(ActionAtom("storno"), Next(land(ActionAtom("reopen"), true_c))))
    )
    assert out == expected


# ---------------------------------------------------------------------------
# delta


def test_delta_next():
    psi = Next(C_Y5)
    out = delta(psi)
    assert DeltaEntry(C_Y5, frozenset(), not_last=True) in out
    assert DeltaEntry(BOT, frozenset(), last=True) in out
    assert len(out) == 2


def test_delta_eventually():
    c = C_Y5
    psi = Eventually(c)
    out = delta(psi)
    sym = frozenset({sym_constr(c.formula)})
    assert DeltaEntry(TOP, sym, not_last=True) in out
    assert DeltaEntry(TOP, sym, last=True) in out
    assert DeltaEntry(psi, frozenset(), not_last=True) in out
    assert DeltaEntry(BOT, frozenset(), last=True) in out


def test_delta_top():
    assert delta(TOP) == [DeltaEntry(TOP, frozenset())]


# ---------------------------------------------------------------------------
# NFA goldens


def test_nfa_simple_eventually():
    psi = Eventually(C_Y5)
    nfa = build_nfa(psi, RAT)
    names = [nfa.state_name(i) for i in range(len(nfa.states))]
    assert len(names) == 3  # psi, true, q_e (bot sink dropped)
    es = edge_set(nfa)
    psi_s = nfa.state_name(nfa.initial)
    assert es == {
        (psi_s, "{y > 5}", "true"),
        (psi_s, "{y > 5}", "q_e"),
        (psi_s, "{}", psi_s),
        ("true", "{}", "true"),
    }


def test_nfa_nested_next_golden():
    # F (b & X (x - y >= 2)) over a system with state atom "b"
    c = Constr(atom(Term.of(x) - Term.of(y), ">=", 2))
    psi = Eventually(land(StateAtom("b"), Next(c)))
    nfa = build_nfa(psi, RAT)
    assert len(nfa.states) == 4
    psi_s = nfa.state_name(nfa.initial)
    mid = [
        nfa.state_name(i)
        for i, s in enumerate(nfa.states)
        if i != nfa.initial and s not in (TOP, QE_STATE)
    ]
    assert len(mid) == 1
    mid_s = mid[0]
    expected = {
        (psi_s, "{}", psi_s),
        (psi_s, "{b}", mid_s),
        (mid_s, "{}", psi_s),
        (mid_s, "{b}", mid_s),
        (mid_s, "{b, x - y >= 2}", "true"),
        (mid_s, "{x - y >= 2}", "true"),
        (mid_s, "{b, x - y >= 2}", "q_e"),
        (mid_s, "{x - y >= 2}", "q_e"),
        ("true", "{}", "true"),
    }
    assert edge_set(nfa) == expected


def test_nfa_auction_psi12_shape(auction):
    psi = parsing.parse_property("F (b=1 & o>t & F (sold & b!=1))", auction)
    nfa = build_nfa(preprocess(psi), auction.domain)
    # psi, psi' = psi | F(sold & b != 1), true, q_e
    assert len(nfa.states) == 4
    # the all-atoms edge label b=1 && b!=1 is unsatisfiable and pruned
    for e in nfa.edges:
        cs = [s.formula for s in e.symbol if s.kind == "constr"]
        names = {str(f) for f in cs}
        assert not ({"b = 1", "b != 1"} <= names)


def test_nfa_deterministic_construction():
    psi = Until(Constr(atom(x, "=", 0)), Eventually(C_Y5))
    a = build_nfa(psi, RAT)
    b = build_nfa(psi, RAT)
    assert [str(s) for s in a.states] == [str(s) for s in b.states]
    assert [(e.src, e.dst, fmt_symbol(e.symbol)) for e in a.edges] == [
        (e.src, e.dst, fmt_symbol(e.symbol)) for e in b.edges
    ]


def test_qe_state_has_no_outgoing():
    psi = Always(C_Y5)
    nfa = build_nfa(psi, RAT)
    qe = next(i for i, s in enumerate(nfa.states) if s == QE_STATE)
    assert nfa.outgoing(qe) == []
    assert qe in nfa.finals


# ---------------------------------------------------------------------------
# direct semantics


def sample_witness_run(b1):
    from damc.ddsa import Config, Run

    mk = lambda s, xv, yv: Config.make(s, {x: F(xv), y: F(yv)})
    return Run(
        (mk("1", 0, 0), mk("2", 1, 0), mk("1", 1, 7), mk("2", 9, 7)),
        ("a1", "a2", "a1"),
    )


def test_run_models_sample_witness(b1):
    run = sample_witness_run(b1)
    assert run_models(b1, run, 0, Eventually(C_Y5))


def test_run_models_empty_run_box(b1):
    from damc.ddsa import Config, Run

    run = Run((Config.make("1", {x: F(0), y: F(0)}),), ())
    assert run_models(b1, run, 0, Always(Constr(atom(x, "=", 0))))


def test_run_models_next_at_end(b1):
    run = sample_witness_run(b1)
    assert not run_models(b1, run, 3, Next(TOP))


def test_run_models_action_modality(b1):
    run = sample_witness_run(b1)
    assert run_models(b1, run, 0, ActNext("a1", TOP))
    assert not run_models(b1, run, 0, ActNext("a2", TOP))


def test_word_consistent_sample_word(b1):
    run = sample_witness_run(b1)
    word = [frozenset(), frozenset(), frozenset({sym_constr(atom(y, ">", 5))}), frozenset()]
    assert word_consistent(b1, word, run)


def test_word_consistent_wrong_action(b1):
    run = sample_witness_run(b1)
    word = [frozenset(), frozenset({sym_action("a2")}), frozenset(), frozenset()]
    assert not word_consistent(b1, word, run)


def test_word_consistent_all_empty(b1):
    run = sample_witness_run(b1)
    assert word_consistent(b1, [frozenset()] * 4, run)
    with pytest.raises(LengthMismatch):
        word_consistent(b1, [frozenset()] * 3, run)


# ---------------------------------------------------------------------------
# NFA acceptance agrees with the trace semantics (sampled here; the bulk
# suite lives in test_acceptance)


def accepts_consistent_word(d, nfa, run):
    for path in nfa.paths(len(run) + 1):
        word = [e.symbol for e in path]
        if word_consistent(d, word, run):
            return True
    return False


def psis_for(d):
    c1 = Constr(atom(y, ">", 2))
    c2 = Constr(atom(x, "=", 0))
    state = StateAtom(d.states[0])
    yield Eventually(c1)
    yield Always(lor(c2, c1))
    yield Until(c2, c1)
    yield Next(c1)
    yield land(state, lor(Eventually(c2), Next(Next(c1))))


def test_nfa_acceptance_matches_semantics(b1, b2):
    from conftest import frac_grid

    for d in (b1, b2):
        runs = list(oracle.enumerate_runs(d, 3, frac_grid(0, 3, halves=True)))[:60]
        for psi in psis_for(d):
            pre = preprocess(psi)
            nfa = build_nfa(pre, d.domain)
            for run in runs:
                assert accepts_consistent_word(d, nfa, run) == run_models(d, run, 0, pre)


def test_delta_totality_on_runs(b1):
    # every quoted state has an entry consistent with any run position
    from conftest import frac_grid

    runs = list(oracle.enumerate_runs(b1, 2, frac_grid(0, 2)))
    psi = preprocess(Eventually(land(C_Y5, Next(Constr(atom(x, ">", 0))))))
    states = [psi]
    seen = set()
    while states:
        q = states.pop()
        if q in seen or q in (TOP, BOT):
            continue
        seen.add(q)
        entries = delta(q)
        for run in runs:
            for i in range(len(run) + 1):
                ok = False
                for e in entries:
                    if i < len(run) and e.last:
                        continue
                    if i == len(run) and e.not_last:
                        continue
                    word = [e.symbol]
                    alpha = run.configs[i].assignment()
                    from damc.formula import evaluate
                    from damc.ltlf import constr_of

                    if all(evaluate(c, alpha) for c in constr_of(e.symbol)):
                        ok = True
                        break
                assert ok, f"delta not total at {q} position {i}"
        states.extend(e.target for e in entries)
