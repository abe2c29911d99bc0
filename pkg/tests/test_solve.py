import itertools
from fractions import Fraction as F

import pytest

from damc import solve
from damc.formula import (
    FALSE,
    INT,
    RAT,
    Atom,
    Not,
    Term,
    VarId,
    atom,
    conj,
    disj,
    evaluate,
    free_vars,
    norm_atom,
)
from damc.solve import (
    ConstraintClass,
    NotGapOrder,
    classify,
    cutoff,
    equivalent,
    gc_equivalent,
    is_sat,
    qe_gc,
    qe_rational,
    to_dnf,
)

x, y, z = VarId("x"), VarId("y"), VarId("z")


def gap(a, b, k):
    return atom(Term.of(a) - Term.of(b), ">=", k)


# ---------------------------------------------------------------------------
# DNF


def test_dnf_distribution():
    phi = conj(disj(atom(x, ">", 0), atom(y, ">", 0)), atom(z, "=", 1))
    cubes = to_dnf(phi)
    assert len(cubes) == 2
    assert all(len(c) == 2 for c in cubes)


def test_dnf_ne_expansion():
    cubes = to_dnf(atom(x, "!=", 1))
    assert len(cubes) == 2
    ops = sorted(c[0].op for c in cubes)
    assert ops == ["<", "<"]  # below and above, each strict


def test_dnf_false():
    assert to_dnf(FALSE) == []
    assert to_dnf(conj(atom(x, "<", x))) == []  # a < a contradiction


# ---------------------------------------------------------------------------
# Rational quantifier elimination (worked examples)


def test_qe_rational_first_step():
    x0, y0 = x.indexed(0), y.indexed(0)
    body = conj(atom(x0, "=", 0), atom(y0, "=", 0), atom(x, ">", y0), atom(y, "=", y0))
    out = qe_rational([x0, y0], body)
    assert equivalent(out, conj(atom(x, ">", 0), atom(y, "=", 0)), RAT)


def test_qe_rational_second_step():
    x1, y1 = x.indexed(1), y.indexed(1)
    body = conj(atom(x1, ">", 0), atom(y1, "=", 0), atom(x, "=", x1), atom(y, ">", x1))
    out = qe_rational([x1, y1], body)
    assert equivalent(out, conj(atom(x, ">", 0), atom(y, ">", x)), RAT)


def test_qe_rational_unused_var():
    out = qe_rational([x], atom(y, ">", 3))
    assert equivalent(out, atom(y, ">", 3), RAT)


# ---------------------------------------------------------------------------
# Gap-order quantifier elimination


def test_qe_gc_worked_example():
    x1, y1 = x.indexed(1), y.indexed(1)
    body = conj(gap(x1, y1, 2), atom(y1, "=", 0), atom(x, "=", x1), gap(y, y1, 3))
    out = qe_gc([x1, y1], body)
    assert equivalent(out, conj(atom(x, ">=", 2), atom(y, ">=", 3)), INT)


def test_qe_gc_brute_force_grid():
    # oracle: brute-force equivalence over the integer grid {-5..10}^2
    body = conj(gap(x, y, 1), gap(y, 0, 0))
    out = qe_gc([y], body)
    assert free_vars(out) <= {x}
    for xv in range(-5, 11):
        truth = any(
            evaluate(body, {x: F(xv), y: F(yv)}) for yv in range(-5, 11)
        )
        assert evaluate(out, {x: F(xv)}) == truth


def test_qe_gc_unused_var():
    out = qe_gc([y], gap(x, z, 2))
    assert equivalent(out, gap(x, z, 2), INT)


def test_qe_gc_rejects_non_gap():
    with pytest.raises(NotGapOrder):
        qe_gc([y], atom(Term.of(x) - Term.of(y), "<=", 3))


# ---------------------------------------------------------------------------
# Satisfiability


def test_is_sat_model_validated():
    phi = conj(atom(x, ">", 0), atom(y, ">", x))
    res = is_sat(phi, RAT)
    assert res.sat and evaluate(phi, res.model)


def test_is_sat_unsat():
    assert not is_sat(conj(atom(x, ">", y), atom(y, ">", x)), RAT).sat


def test_is_sat_cutoff_equisatisfiable_example():
    phi = conj(gap(x, y, 2), atom(y, ">=", 3))
    assert is_sat(phi, INT).sat == is_sat(cutoff(phi, 4), INT).sat


def test_is_sat_integer_difference_exact():
    # 0 < x < 1 has rational but no integer solution
    phi = conj(atom(x, ">", 0), atom(x, "<", 1))
    assert is_sat(phi, RAT).sat
    assert not is_sat(phi, INT).sat


def test_is_sat_integer_model_is_integral():
    phi = conj(gap(x, y, 2), gap(y, 0, 3))
    res = is_sat(phi, INT)
    assert res.sat
    assert all(v.denominator == 1 for v in res.model.values())
    assert evaluate(phi, res.model)


def test_is_sat_integer_grid_fallback_finds_model():
    # 3x = 2y + 1 is outside the difference fragment but has integer models
    phi = atom(Term.of(x).scale(F(3)), "=", Term.of(y).scale(F(2)) + Term.of(1))
    res = is_sat(phi, INT)
    assert res.sat and evaluate(phi, res.model)


def test_is_sat_integer_refuses_outside_fragment():
    # 2x = 2y + 1 has rational models only; the bounded grid cannot prove
    # unsatisfiability, so the solver must refuse rather than guess
    phi = atom(Term.of(x).scale(F(2)), "=", Term.of(y).scale(F(2)) + Term.of(1))
    with pytest.raises(solve.UnsupportedInteger):
        is_sat(phi, INT)


# ---------------------------------------------------------------------------
# Equivalence


def test_equivalent_redundant_atom():
    lhs = conj(atom(x, ">", 0), atom(y, ">", x))
    rhs = conj(atom(x, ">", 0), atom(y, ">", x), atom(y, ">", 0))
    assert equivalent(lhs, rhs, RAT)


def test_equivalent_reflexive():
    phi = conj(atom(x, ">", 0), atom(y, "=", 0))
    assert equivalent(phi, phi, RAT)


def test_equivalent_strict_vs_nonstrict():
    assert not equivalent(atom(x, ">", 0), atom(x, ">=", 0), RAT)


# ---------------------------------------------------------------------------
# Cutoff


def test_cutoff_replaces_large_gaps():
    phi = conj(gap(x, 0, 5), gap(y, 0, 6))
    assert cutoff(phi, 4) == conj(gap(x, 0, 4), gap(y, 0, 4))


def test_cutoff_keeps_small_gaps():
    phi = gap(x, y, 2)
    assert cutoff(phi, 4) == phi


def test_cutoff_per_atom_in_disjunction():
    phi = disj(gap(x, y, 9), gap(x, 0, 1))
    assert cutoff(phi, 4) == disj(gap(x, y, 4), gap(x, 0, 1))


def test_gc_equivalent_shifted_pair():
    a = conj(atom(x, ">=", 5), atom(y, ">=", 6))
    b = conj(atom(x, ">=", 8), atom(y, ">=", 9))
    assert gc_equivalent(a, b, 4)


def test_gc_equivalent_reflexive_and_negative():
    phi = conj(gap(x, y, 2))
    assert gc_equivalent(phi, phi, 4)
    assert not gc_equivalent(atom(x, ">=", 1), atom(x, ">=", 2), 4)


def test_cutoff_rejects_non_gap():
    with pytest.raises(NotGapOrder):
        cutoff(atom(Term.of(x) + Term.of(y), ">=", 2), 4)


def test_to_dnf_rejects_quantifier():
    from damc.formula import Exists, QuantifiedInput

    with pytest.raises(QuantifiedInput):
        to_dnf(Exists((x,), atom(x, ">", 0)))


# ---------------------------------------------------------------------------
# Classification


def test_classify_mc_guard():
    assert classify(atom(VarId("x", "w"), ">", VarId("y", "r"))) == ConstraintClass.MC


def test_classify_gc_not_mc():
    a = atom(Term.of(VarId("x", "w")) - Term.of(VarId("y", "r")), ">=", 2)
    assert classify(a) == ConstraintClass.GC


def test_classify_general():
    a = atom(Term.of(VarId("s", "w")), "=", Term.of(VarId("s", "r")) + Term.of(VarId("b", "r")))
    assert classify(a) == ConstraintClass.GENERAL


def test_classify_equality_as_gc_pair():
    assert classify(atom(x, "=", 3)) == ConstraintClass.MC  # also MC
    assert classify(conj(atom(x, "=", 3), gap(x, y, 1))) == ConstraintClass.GC


def test_upper_bound_gap_is_not_gc():
    a = atom(Term.of(VarId("x", "r")) - Term.of(VarId("x", "w")), "<=", 3)
    assert classify(a) == ConstraintClass.GENERAL


# ---------------------------------------------------------------------------
# Equivalence-relation sanity on a fixed population


def test_equivalent_is_equivalence_relation():
    pop = [
        conj(atom(x, ">", 0), atom(y, ">", x)),
        conj(atom(x, ">", 0), atom(y, ">", x), atom(y, ">", 0)),
        conj(atom(x, ">=", 1)),
        conj(atom(x, ">", 0)),
    ]
    for f in pop:
        assert equivalent(f, f, RAT)
    for f, g in itertools.product(pop, pop):
        assert equivalent(f, g, RAT) == equivalent(g, f, RAT)
    for f, g, h in itertools.product(pop, pop, pop):
        if equivalent(f, g, RAT) and equivalent(g, h, RAT):
            assert equivalent(f, h, RAT)
