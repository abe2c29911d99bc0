"""Command-line entry point.

Exit codes of `verify`: 0 a witness exists, 1 no witness, 2 inconclusive,
3 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import dot, ltlf as lt, oracle, parsing, product, summary
from .ddsa import Ddsa
from .formula import INT, RAT, fmt_rat

EXIT_WITNESS = 0
EXIT_NO_WITNESS = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


@dataclass
class RunConfig:
    model_path: str
    prop: Optional[str] = None
    domain: Optional[str] = None
    json_output: bool = False
    max_nodes: int = 10_000
    unroll: int = 2
    dot_cg: Optional[str] = None
    dot_nfa: Optional[str] = None
    dot_product: Optional[str] = None
    max_len: int = 5
    grid_max: int = 8

    def __post_init__(self):
        if self.max_nodes < 1 or self.unroll < 1:
            raise ValueError("max-nodes and unroll must be at least 1")


def _color(text: str, code: str) -> str:
    if os.environ.get("NO_COLOR") or not sys.stdout.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _load_model(cfg: RunConfig) -> Ddsa:
    text = Path(cfg.model_path).read_text()
    d = parsing.parse_model(text)
    if cfg.domain:
        d = Ddsa(
            states=d.states,
            initial=d.initial,
            actions=d.actions,
            transitions=d.transitions,
            finals=d.finals,
            variables=d.variables,
            alpha0=d.alpha0,
            guards=d.guards,
            domain=INT if cfg.domain == "int" else RAT,
        )
    return d


def _load_property(cfg: RunConfig, d: Ddsa) -> lt.Ltlf:
    assert cfg.prop is not None
    text = cfg.prop
    if os.path.exists(text):
        text = Path(text).read_text().strip()
    return parsing.parse_property(text, d)


def _alpha_json(alpha) -> dict:
    return {v.name: fmt_rat(x) for v, x in sorted(alpha.items())}


def _verdict_json(v: product.Verdict) -> dict:
    out: dict = {"verdict": v.kind, "strategy": v.stats.strategy or None}
    if v.stats.note:
        out["note"] = v.stats.note
    if v.reason:
        out["reason"] = v.reason
    out["sizes"] = {
        "nfa_states": v.stats.nfa_states,
        "nfa_edges": v.stats.nfa_edges,
        "product_nodes": v.stats.product_nodes,
        "product_edges": v.stats.product_edges,
        "product_finals": v.stats.product_finals,
    }
    if v.run is not None:
        out["word"] = [sorted(str(s) for s in sym) for sym in (v.word or [])]
        out["run"] = [
            {"state": c.state, "assign": _alpha_json(dict(c.alpha))}
            for c in v.run.configs
        ]
        out["actions"] = list(v.run.actions)
    return out


def _print_text_verdict(v: product.Verdict) -> None:
    if v.stats.strategy:
        note = f" ({v.stats.note})" if v.stats.note else ""
        print(f"strategy: {v.stats.strategy}{note}")
        print(
            "sizes: nfa {}/{} product {}/{} finals {}".format(
                v.stats.nfa_states,
                v.stats.nfa_edges,
                v.stats.product_nodes,
                v.stats.product_edges,
                v.stats.product_finals,
            )
        )
    if v.kind == "witness":
        print(_color("verdict: witness found", "32"))
        assert v.run is not None
        word = v.word or []
        print("word: " + " ".join(lt.fmt_symbol(s) for s in word))
        names = [x.name for x in sorted({vv for c in v.run.configs for vv, _ in c.alpha})]
        header = ["step", "state"] + names + ["action"]
        rows = []
        for i, c in enumerate(v.run.configs):
            alpha = dict(c.alpha)
            act = v.run.actions[i] if i < len(v.run.actions) else ""
            rows.append(
                [str(i), c.state]
                + [fmt_rat(alpha[vv]) for vv in sorted(alpha)]
                + [act]
            )
        widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
        for r in [header] + rows:
            print("  " + "  ".join(x.ljust(w) for x, w in zip(r, widths)))
    elif v.kind == "no-witness":
        print(_color("verdict: no witness exists", "31"))
    else:
        print(_color(f"verdict: inconclusive ({v.reason})", "33"))


def cmd_verify(cfg: RunConfig) -> int:
    d = _load_model(cfg)
    psi = _load_property(cfg, d)
    verdict = product.verify(
        d,
        psi,
        product.VerifyOptions(
            max_nodes=cfg.max_nodes,
            unroll=cfg.unroll,
            keep_artifacts=bool(cfg.dot_cg or cfg.dot_nfa or cfg.dot_product),
        ),
    )
    if cfg.dot_nfa and verdict.nfa is not None:
        Path(cfg.dot_nfa).write_text(dot.nfa_dot(verdict.nfa))
    if cfg.dot_product and verdict.product is not None:
        Path(cfg.dot_product).write_text(dot.product_dot(verdict.product))
    if cfg.dot_cg and verdict.strategy is not None:
        g = summary.constraint_graph(d, verdict.strategy, cfg.max_nodes)
        Path(cfg.dot_cg).write_text(dot.constraint_graph_dot(g))
    if cfg.json_output:
        print(json.dumps(_verdict_json(verdict), indent=2))
    else:
        _print_text_verdict(verdict)
    return {
        "witness": EXIT_WITNESS,
        "no-witness": EXIT_NO_WITNESS,
        "inconclusive": EXIT_INCONCLUSIVE,
    }[verdict.kind]


def cmd_summary(cfg: RunConfig) -> int:
    d = _load_model(cfg)
    constraints = []
    if cfg.prop:
        psi = _load_property(cfg, d)
        constraints = lt.constraints_of(lt.preprocess(psi))
    try:
        strat = summary.detect(
            d, constraints, summary.DetectOptions(unroll_ff=cfg.unroll)
        )
    except summary.NoSummaryFound as e:
        if cfg.json_output:
            print(json.dumps({"summary": None, "reason": str(e)}))
        else:
            print(f"no finite summary detected: {e}")
        return EXIT_INCONCLUSIVE
    note = strat.verified_note()
    if cfg.json_output:
        print(json.dumps({"summary": strat.describe(), "note": note}))
    else:
        print(f"summary: {strat.describe()}" + (f" ({note})" if note else ""))
    return EXIT_WITNESS


def cmd_oracle(cfg: RunConfig) -> int:
    d = _load_model(cfg)
    psi = _load_property(cfg, d)
    pre = lt.preprocess(psi)
    grid = oracle.default_grid(d, lt.constraints_of(pre), 0, cfg.grid_max)
    run = oracle.brute_force_witness(d, psi, cfg.max_len, grid)
    if run is None:
        msg = f"no witness of length <= {cfg.max_len} on the grid"
        print(json.dumps({"verdict": "none", "detail": msg}) if cfg.json_output else msg)
        return EXIT_NO_WITNESS
    if cfg.json_output:
        print(
            json.dumps(
                {
                    "verdict": "witness",
                    "run": [
                        {"state": c.state, "assign": _alpha_json(dict(c.alpha))}
                        for c in run.configs
                    ],
                    "actions": list(run.actions),
                }
            )
        )
    else:
        print("witness run:")
        for i, c in enumerate(run.configs):
            alpha = ", ".join(f"{v.name}={fmt_rat(x)}" for v, x in c.alpha)
            arrow = f" --{run.actions[i]}-->" if i < len(run.actions) else ""
            print(f"  ({c.state}: {alpha}){arrow}")
    return EXIT_WITNESS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="damc",
        description="Witness checker for data-aware dynamic systems with "
        "linear arithmetic and finite-trace temporal properties.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_prop):
        p.add_argument("model", help="model file")
        p.add_argument(
            "--prop", required=needs_prop, help="property string or file path"
        )
        p.add_argument("--domain", choices=["int", "rat"], help="override the model domain")
        p.add_argument("--json", action="store_true", dest="json_output")
        p.add_argument("--max-nodes", type=int, default=10_000)
        p.add_argument("--unroll", type=int, default=2)

    pv = sub.add_parser("verify", help="decide witness existence")
    common(pv, needs_prop=True)
    pv.add_argument("--dot-cg", help="write the constraint graph as DOT")
    pv.add_argument("--dot-nfa", help="write the property automaton as DOT")
    pv.add_argument("--dot-product", help="write the product automaton as DOT")

    ps = sub.add_parser("summary", help="finite-summary detection only")
    common(ps, needs_prop=False)

    po = sub.add_parser("oracle", help="brute-force search on a value grid")
    common(po, needs_prop=True)
    po.add_argument("--max-len", type=int, default=5)
    po.add_argument("--grid-max", type=int, default=8)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        cfg = RunConfig(
            model_path=ns.model,
            prop=getattr(ns, "prop", None),
            domain=ns.domain,
            json_output=ns.json_output,
            max_nodes=ns.max_nodes,
            unroll=ns.unroll,
            dot_cg=getattr(ns, "dot_cg", None),
            dot_nfa=getattr(ns, "dot_nfa", None),
            dot_product=getattr(ns, "dot_product", None),
            max_len=getattr(ns, "max_len", 5),
            grid_max=getattr(ns, "grid_max", 8),
        )
        if ns.command == "verify":
            return cmd_verify(cfg)
        if ns.command == "summary":
            return cmd_summary(cfg)
        return cmd_oracle(cfg)
    except (parsing.ParseError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
