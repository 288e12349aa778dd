"""Satisfiability of quantifier-free ARD constraints.

Each separated pair is instantiated and handed to the ground solver. In
TO mode instantiating over the variables (and 0) is complete, so a ground
model always extends to an array model. In IDL mode the instantiation
depth grows up to a budget and a ground model is accepted only when it
extends to a functional model; otherwise the answer is unknown.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .instantiate import instantiate
from .kernel import And, Formula, FreshNames, Lit
from .oracle import FiniteArrayModel, OracleError, model_from_ground
from .preprocess import SeparatedPair, preprocess
from .toeuf import Unknown, solve_clauses

Clause = Tuple[Lit, ...]


def cnf(f: Formula) -> List[Clause]:
    """Clauses of f by distribution; inputs are small ground formulas."""
    if isinstance(f, Lit):
        return [(f,)]
    if isinstance(f, And):
        return [c for g in f.args for c in cnf(g)]
    out: List[Clause] = [()]
    for g in f.args:
        out = [a + b for a in out for b in cnf(g)]
    return out


def pair_clauses(pair: SeparatedPair) -> List[Clause]:
    return [c for f in pair.phi2 for c in cnf(f)]


@dataclass
class Decision:
    status: str  # "sat" | "unsat" | "unknown"
    model: Optional[FiniteArrayModel] = None
    depth: int = 0
    pairs: int = 0


def decide_pair(
    pair: SeparatedPair, theory: str = "TO", budget: int = 4, check: Sequence[Formula] = ()
) -> Decision:
    """Decide one separated pair; ``check`` are formulas the model must satisfy."""
    depths = [0] if theory == "TO" else range(budget + 1)
    for n in depths:
        inst = instantiate(pair, n, theory)
        try:
            res = solve_clauses(pair_clauses(inst), theory)
        except Unknown:
            return Decision("unknown", depth=n)
        if not res.sat:
            return Decision("unsat", depth=n)
        try:
            m = model_from_ground(list(pair.formulas()) + list(check), res.model)
        except OracleError:
            if theory == "TO":
                raise
            continue
        return Decision("sat", m, n)
    return Decision("unknown", depth=budget)


def decide(
    formulas: Sequence[Formula], theory: str = "TO", budget: int = 4, full_dnf: bool = False
) -> Decision:
    """sat (with a verified model), unsat, or, in IDL mode only, unknown."""
    fresh = FreshNames()
    pairs = preprocess(list(formulas), fresh, full_dnf)
    unknown = None
    for k, pair in enumerate(pairs, 1):
        d = decide_pair(pair, theory, budget, formulas)
        d.pairs = k
        if d.status == "sat":
            return d
        if d.status == "unknown":
            unknown = d
    if unknown is not None:
        return unknown
    return Decision("unsat", pairs=len(pairs))
