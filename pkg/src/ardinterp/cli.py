"""Command-line driver: ``ardinterp sat|interpolate|check``.

The first output line is the verdict (sat, unsat, unknown, pass or FAIL);
models and interpolants follow as s-expressions. The exit code is 0 exactly
when a definitive answer was produced.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .frontend import ParseError, parse_problem, print_formula
from .interpolate import interpolate
from .kernel import conj
from .oracle import brute_force_check, check_interpolant
from .solver import decide


@dataclass
class CliConfig:
    mode: str
    inputs: List[str]
    index_theory: Optional[str] = None
    instantiation_budget: int = 4
    check_answers: bool = False
    max_oracle_size: List[int] = field(default_factory=lambda: [4, 4])
    share: bool = False


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(path: str, theory: Optional[str]):
    return parse_problem(_read(path), theory)


def _theory(cfg: CliConfig, *problems) -> str:
    if cfg.index_theory:
        return cfg.index_theory
    return "IDL" if any(p.theory == "IDL" for p in problems) else "TO"


def _sat(cfg: CliConfig, out) -> int:
    prob = _load(cfg.inputs[0], cfg.index_theory)
    theory = _theory(cfg, prob)
    d = decide(prob.assertions, theory, cfg.instantiation_budget)
    print(d.status, file=out)
    if d.status == "sat":
        print(d.model.describe(hide_reserved=True), file=out)
    elif d.status == "unknown":
        print(f"; instantiation budget exhausted at N={d.depth}", file=out)
    if cfg.check_answers and d.status != "unknown":
        c, e = cfg.max_oracle_size
        res = brute_force_check(prob.assertions, c, e, theory)
        agree = res.sat is None or res.sat == (d.status == "sat")
        print(f"; oracle (chain<={c}, elems<={e}): {_verdict(res.sat)}"
              f"{'' if agree else ' DISAGREES'}", file=out)
        if not agree:
            return 3
    return 0 if d.status != "unknown" else 2


def _verdict(sat: Optional[bool]) -> str:
    return "undecided" if sat is None else ("sat" if sat else "unsat")


def _interpolate(cfg: CliConfig, out) -> int:
    pa = _load(cfg.inputs[0], cfg.index_theory)
    pb = _load(cfg.inputs[1], cfg.index_theory)
    theory = _theory(cfg, pa, pb)
    r = interpolate(pa.assertions, pb.assertions, theory, cfg.instantiation_budget)
    print(r.status, file=out)
    if r.status == "sat":
        if r.model is not None:
            print(r.model.describe(hide_reserved=True), file=out)
        return 0
    if r.status == "unknown":
        n = max((x.decision.depth for x in r.results if x.decision is not None), default=0)
        print(f"; instantiation budget exhausted at N={n}", file=out)
        return 2
    print(print_formula(r.interpolant, share=cfg.share), file=out)
    if cfg.check_answers:
        c, e = cfg.max_oracle_size
        rep = check_interpolant(pa.assertions, pb.assertions, r.interpolant, theory,
                                max_chain=c, max_elems=e, budget=cfg.instantiation_budget)
        for line in rep.lines():
            print("; " + line, file=out)
        if not rep.passed:
            return 3
    return 0


def _check(cfg: CliConfig, out) -> int:
    pa = _load(cfg.inputs[0], cfg.index_theory)
    pb = _load(cfg.inputs[1], cfg.index_theory)
    pt = _load(cfg.inputs[2], cfg.index_theory)
    theory = _theory(cfg, pa, pb, pt)
    c, e = cfg.max_oracle_size
    rep = check_interpolant(pa.assertions, pb.assertions, conj(*pt.assertions), theory,
                            max_chain=c, max_elems=e, budget=cfg.instantiation_budget)
    print("pass" if rep.passed else "FAIL", file=out)
    for line in rep.lines():
        print(line, file=out)
    return 0 if rep.a_implies is not None and rep.b_excludes is not None else 2


def run_cli(cfg: CliConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        if cfg.instantiation_budget < 0:
            raise ValueError("instantiation budget must be nonnegative")
        handler = {"sat": _sat, "interpolate": _interpolate, "check": _check}[cfg.mode]
        return handler(cfg, out)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--index-theory", choices=["TO", "IDL"], default=None,
                        help="index theory (default: from the input, else TO)")
    common.add_argument("--budget", type=int, default=4, help="maximum instantiation depth in IDL mode")
    common.add_argument("--check", action="store_true", help="cross-check answers with the finite-model oracle")
    common.add_argument("--max-oracle-size", type=int, nargs=2, default=[4, 4], metavar=("CHAIN", "ELEMS"),
                        help="brute-force bounds for --check and check mode")
    common.add_argument("--share", action="store_true", help="print interpolants with let-sharing")
    ap = argparse.ArgumentParser(prog="ardinterp", description="Arrays with maxdiff: satisfiability and interpolation.")
    sub = ap.add_subparsers(dest="mode", required=True)
    sub.add_parser("sat", parents=[common], help="decide a problem file").add_argument("file")
    p = sub.add_parser("interpolate", parents=[common], help="interpolant for an A file and a B file")
    p.add_argument("afile")
    p.add_argument("bfile")
    p = sub.add_parser("check", parents=[common], help="validate a candidate interpolant")
    p.add_argument("afile")
    p.add_argument("bfile")
    p.add_argument("thetafile")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    names = {"sat": ["file"], "interpolate": ["afile", "bfile"], "check": ["afile", "bfile", "thetafile"]}
    inputs = [getattr(ns, n) for n in names[ns.mode]]
    cfg = CliConfig(ns.mode, inputs, ns.index_theory, ns.budget, ns.check, list(ns.max_oracle_size), ns.share)
    return run_cli(cfg)


if __name__ == "__main__":
    sys.exit(main())
