"""Witness checking for data-aware dynamic systems with linear arithmetic
over finite traces."""

from .formula import (
    INT,
    RAT,
    Atom,
    Domain,
    Formula,
    Term,
    VarId,
    atom,
    conj,
    disj,
    evaluate,
    free_vars,
    restrict,
    substitute,
)
from .ddsa import Config, Ddsa, Run, history_constraint, transition_formula, update
from .solve import (
    ConstraintClass,
    SatResult,
    classify,
    cutoff,
    equivalent,
    gc_equivalent,
    is_sat,
    qe_gc,
    qe_rational,
    to_dnf,
)
from .ltlf import build_nfa, preprocess, run_models, word_consistent
from .summary import (
    DetectOptions,
    NoSummaryFound,
    check_bounded_lookback,
    check_feedback_free,
    check_gc,
    check_mc,
    constraint_graph,
    detect,
)
from .product import Verdict, VerifyOptions, extend_with_dummy, realize_run, verify
from .oracle import brute_force_witness, default_grid, enumerate_runs
from .parsing import parse_model, parse_property, print_model, print_property

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
