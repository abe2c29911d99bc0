from fractions import Fraction as F

import pytest

from damc import oracle, product, solve
from damc.ddsa import (
    Config,
    Ddsa,
    UnknownAction,
    history_constraint,
    step_allowed,
    successors,
    transition_formula,
    update,
    validate,
    validate_run,
)
from damc.formula import RAT, Term, VarId, atom, conj, evaluate, free_vars
from damc.solve import equivalent, is_sat

from conftest import frac_grid

x, y = VarId("x"), VarId("y")


def test_transition_formula_b1(b1):
    out = transition_formula(b1, "a1")
    expected = conj(
        atom(VarId("x", "w"), ">", VarId("y", "r")),
        atom(VarId("y", "w"), "=", VarId("y", "r")),
    )
    assert out == expected


def test_transition_formula_trivial_guard(b1):
    d = Ddsa(
        states=("s",),
        initial="s",
        actions=("skip",),
        transitions=(("s", "skip", "s"),),
        finals=frozenset({"s"}),
        variables=(x, y),
        alpha0={x: F(0), y: F(0)},
        guards={"skip": conj()},
        domain=RAT,
    )
    out = transition_formula(d, "skip")
    assert out == conj(
        atom(VarId("x", "w"), "=", VarId("x", "r")),
        atom(VarId("y", "w"), "=", VarId("y", "r")),
    )


def test_transition_formula_auction_fee(auction):
    out = transition_formula(auction, "fee")
    fv = {v.name for v in free_vars(out)}
    assert fv == {"s", "o", "b", "d", "t"}
    # carryovers for everything but s
    carried = [a for a in out.args if str(a).endswith("^r") and "=" in str(a)]
    assert len(carried) == 4


def test_transition_formula_unknown_action(b1):
    with pytest.raises(UnknownAction):
        transition_formula(b1, "nope")


def test_update_first_steps(b1):
    phi0 = conj(atom(x, "=", 0), atom(y, "=", 0))
    u1 = update(b1, phi0, "a1")
    assert equivalent(u1, conj(atom(x, ">", 0), atom(y, "=", 0)), RAT)
    phi = conj(atom(x, ">", 0), atom(y, ">", x))
    u2 = update(b1, phi, "a1")
    assert equivalent(u2, conj(atom(x, ">", y), atom(y, ">", 0)), RAT)


def test_update_identity_for_pure_carryover():
    d = Ddsa(
        states=("s",),
        initial="s",
        actions=("skip",),
        transitions=(("s", "skip", "s"),),
        finals=frozenset({"s"}),
        variables=(x, y),
        alpha0={x: F(0), y: F(0)},
        guards={"skip": conj()},
        domain=RAT,
    )
    phi = conj(atom(x, ">", 0), atom(y, ">", x))
    assert equivalent(update(d, phi, "skip"), phi, RAT)


def test_update_preserves_unsat(b1):
    phi = conj(atom(x, ">", 0), atom(x, "<", 0))
    out = update(b1, phi, "a1")
    assert not is_sat(out, RAT).sat


# history constraints: acceptance criterion 2 lives in test_acceptance


def test_history_constraint_base(b1):
    h0 = history_constraint(b1, [])
    assert equivalent(h0, conj(atom(x, "=", 0), atom(y, "=", 0)), RAT)


def test_history_constraint_with_verification_sets(b1):
    h = history_constraint(b1, ["a1"], [[], [atom(x, ">", 5)]])
    assert equivalent(h, conj(atom(x, ">", 5), atom(y, "=", 0)), RAT)


def test_history_constraint_length_mismatch(b1):
    with pytest.raises(ValueError):
        history_constraint(b1, ["a1"], [[]])


def test_successors_b1(b1):
    cfg = Config.make("1", {x: F(0), y: F(0)})
    out = successors(b1, cfg, "a1", frac_grid(0, 2))
    assert [c.assignment()[x] for c in out] == [F(1), F(2)]
    assert all(c.state == "2" for c in out)
    assert successors(b1, cfg, "a2", frac_grid(0, 2)) == []


def test_successors_trivial_guard_dedup():
    d = Ddsa(
        states=("s",),
        initial="s",
        actions=("skip",),
        transitions=(("s", "skip", "s"),),
        finals=frozenset({"s"}),
        variables=(x,),
        alpha0={x: F(1)},
        guards={"skip": conj()},
        domain=RAT,
    )
    cfg = Config.make("s", {x: F(1)})
    out = successors(d, cfg, "skip", frac_grid(0, 3))
    assert out == [Config.make("s", {x: F(1)})]


def test_validate_clean_models(b1, b2, b3, b4, auction):
    for d in (b1, b2, b3, b4, auction):
        assert validate(d) == []


def test_validate_reports_problems(b1):
    broken = Ddsa(
        states=("1",),
        initial="1",
        actions=("a1",),
        transitions=(("1", "a1", "s9"),),
        finals=frozenset({"s9"}),
        variables=(x,),
        alpha0={x: F(0)},
        guards={"a1": atom(VarId("q", "w"), ">", 0)},
        domain=RAT,
    )
    issues = validate(broken)
    assert any("'s9'" in m for m in issues)
    assert any("unknown variable 'q'" in m for m in issues)


def test_validate_empty_finals_diagnostic(b1):
    d = Ddsa(
        states=b1.states,
        initial=b1.initial,
        actions=b1.actions,
        transitions=b1.transitions,
        finals=frozenset(),
        variables=b1.variables,
        alpha0=b1.alpha0,
        guards=b1.guards,
        domain=b1.domain,
    )
    assert any("no final states" in m for m in validate(d))


# ---------------------------------------------------------------------------
# correspondence between runs and history constraints


def test_run_final_assignment_satisfies_history(b1, b3):
    for d, grid in ((b1, frac_grid(0, 3, halves=True)), (b3, frac_grid(0, 6))):
        for run in oracle.enumerate_runs(d, 3, grid):
            h = history_constraint(d, list(run.actions))
            assert evaluate(h, run.configs[-1].assignment())


def test_history_model_realizes_into_valid_run(b1, b3):
    for d in (b1, b3):
        for actions in (["a1"], ["a1", "a2"], ["a1", "a2", "a1"]):
            cseq = [[] for _ in range(len(actions) + 1)]
            run = product.realize_run(d, actions, cseq)
            assert run is not None
            assert validate_run(d, run)
            h = history_constraint(d, actions)
            assert evaluate(h, run.configs[-1].assignment())


def test_step_allowed_agrees_with_guard(b1):
    pre = Config.make("1", {x: F(0), y: F(0)})
    good = Config.make("2", {x: F(2), y: F(0)})
    bad = Config.make("2", {x: F(0), y: F(0)})
    changed = Config.make("2", {x: F(2), y: F(5)})  # y must carry over
    assert step_allowed(b1, pre, "a1", good)
    assert not step_allowed(b1, pre, "a1", bad)
    assert not step_allowed(b1, pre, "a1", changed)
