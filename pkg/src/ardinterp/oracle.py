"""Finite functional models: evaluation, bounded enumeration, interpolant checks.

Arrays are finite maps from nonnegative indexes to element tokens, with
every unmapped index reading as ``bot``. Nothing here relies on the
instantiation or ground-solver layers, so verdicts computed here are an
independent cross-check of the decision procedure.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .kernel import (
    ARRAY,
    ELEM,
    INDEX,
    And,
    Formula,
    Lit,
    RESERVED_PREFIX,
    Term,
    conj,
    formula_terms,
    free_symbols,
    negate,
)

BOT = "bot"
ArrayValue = Tuple[Tuple[int, str], ...]  # sorted (index, token), tokens != bot


class OracleError(RuntimeError):
    """A model that should satisfy a formula does not: a soundness bug."""


class Unassigned(KeyError):
    pass


def array_value(table: Dict[int, str]) -> ArrayValue:
    return tuple(sorted((k, v) for k, v in table.items() if v != BOT and k >= 0))


@dataclass
class FiniteArrayModel:
    chain: List[int]
    elems: List[str]
    index: Dict[Term, int] = field(default_factory=dict)
    elem: Dict[Term, str] = field(default_factory=dict)
    arrays: Dict[Term, ArrayValue] = field(default_factory=dict)

    def table(self, a: Term) -> Dict[int, str]:
        return dict(eval_term(self, a))

    def describe(self, hide_reserved: bool = False) -> str:
        """S-expression rendering: chain, element tokens, assignments, tables."""
        def shown(t: Term) -> bool:
            return not (hide_reserved and t.name.startswith(RESERVED_PREFIX))

        parts = ["(model"]
        parts.append("  (chain " + " ".join(map(str, self.chain)) + ")")
        parts.append("  (elems " + " ".join(self.elems) + ")")
        for t in sorted(filter(shown, self.index), key=lambda t: t.key):
            parts.append(f"  (= {t.name} {self.index[t]})")
        for t in sorted(filter(shown, self.elem), key=lambda t: t.key):
            parts.append(f"  (= {t.name} {self.elem[t]})")
        for a in sorted(filter(shown, self.arrays), key=lambda t: t.key):
            cells = " ".join(f"({k} {v})" for k, v in self.arrays[a])
            parts.append(f"  (array {a.name} {cells})".rstrip())
        return "\n".join(parts) + ")"


# --- total evaluation ----------------------------------------------------

def _diff(x: ArrayValue, y: ArrayValue) -> int:
    dx, dy = dict(x), dict(y)
    bad = [k for k in set(dx) | set(dy) if dx.get(k, BOT) != dy.get(k, BOT)]
    return max(bad) if bad else 0


def _write(x: ArrayValue, i: int, e: str) -> ArrayValue:
    if i < 0:
        return x
    d = dict(x)
    d[i] = e
    return array_value(d)


def eval_term(m: FiniteArrayModel, t: Term):
    op = t.op
    if op == "var":
        store = {INDEX: m.index, ELEM: m.elem, ARRAY: m.arrays}[t.sort]
        if t not in store:
            raise Unassigned(t.name)
        return store[t]
    if op == "0":
        return 0
    if op == "bot":
        return BOT
    if op == "eps":
        return ()
    if op == "rd":
        a, i = eval_term(m, t.args[0]), eval_term(m, t.args[1])
        return dict(a).get(i, BOT) if i >= 0 else BOT
    if op == "wr":
        return _write(eval_term(m, t.args[0]), eval_term(m, t.args[1]), eval_term(m, t.args[2]))
    if op == "diff":
        return _diff(eval_term(m, t.args[0]), eval_term(m, t.args[1]))
    if op == "S":
        return eval_term(m, t.args[0]) + 1
    if op == "P":
        return eval_term(m, t.args[0]) - 1
    raise ValueError(f"cannot evaluate {op}")


def evaluate(m: FiniteArrayModel, f: Formula) -> bool:
    if isinstance(f, Lit):
        a = f.atom
        x, y = eval_term(m, a.lhs), eval_term(m, a.rhs)
        v = x == y if a.rel == "eq" else (x <= y if a.rel == "le" else x < y)
        return v == f.pos
    if isinstance(f, And):
        return all(evaluate(m, g) for g in f.args)
    return any(evaluate(m, g) for g in f.args)


def check_axioms(m: FiniteArrayModel) -> List[str]:
    """Violations of the array axioms over the model's arrays, chain and tokens."""
    arrays = list(m.arrays.values()) + [()]
    out: List[str] = []
    chain = m.chain
    for x in arrays:
        dx = dict(x)
        for i in chain:
            if i < 0 and dx.get(i, BOT) != BOT:
                out.append(f"negative support at {i}")
        for y in arrays:
            d = _diff(x, y)
            dy = dict(y)
            if x != y and dx.get(d, BOT) == dy.get(d, BOT):
                out.append(f"no disagreement at diff {d}")
            for i in chain:
                if i > d and dx.get(i, BOT) != dy.get(i, BOT):
                    out.append(f"disagreement above diff at {i}")
        if _diff(x, x) != 0:
            out.append("diff(x,x) != 0")
        for i in chain:
            for e in m.elems:
                w = dict(_write(x, i, e))
                if i >= 0 and w.get(i, BOT) != e:
                    out.append(f"read-over-write fails at {i}")
                for j in chain:
                    if j != i and w.get(j, BOT) != (dx.get(j, BOT) if j >= 0 else BOT):
                        out.append(f"write leaks to {j}")
    return out


def metric_violations(m: FiniteArrayModel) -> List[str]:
    """Pseudo-metric laws of diff over every pair/triple of the model's arrays."""
    arrays = list(m.arrays.values()) + [()]
    out = []
    for x in arrays:
        for y in arrays:
            dxy = _diff(x, y)
            if dxy < 0:
                out.append("negative diff")
            if dxy != _diff(y, x):
                out.append("asymmetric diff")
            for z in arrays:
                if max(dxy, _diff(y, z)) < _diff(x, z):
                    out.append("ultrametric inequality fails")
    return out


# --- partial evaluation for enumeration ----------------------------------

class _Need(Exception):
    def __init__(self, slot) -> None:
        self.slot = slot


class _Budget(Exception):
    pass


class _Partial:
    """Evaluator over a partial assignment; raises _Need on the first missing slot.

    Array cells are slots ``(a, k)``; element variables are slots ``e``.
    Scalar values are memoized for the duration of one formula evaluation.
    """

    def __init__(self, index: Dict[Term, int], top: int) -> None:
        self.index = index
        self.top = top
        self.cells: Dict[Tuple[Term, int], str] = {}
        self.elem: Dict[Term, str] = {}
        self.memo: Dict[Term, object] = {}

    def cell(self, t: Term, k: int):
        """Value of array term t at nonnegative point k."""
        op = t.op
        if op == "var":
            v = self.cells.get((t, k))
            if v is None:
                raise _Need((t, k))
            return v
        if op == "eps":
            return BOT
        if op == "wr":
            i = self.term(t.args[1])
            if i == k:
                return self.term(t.args[2])
            return self.cell(t.args[0], k)
        raise ValueError(op)

    def term(self, t: Term):
        memo = self.memo
        if t in memo:
            return memo[t]
        op = t.op
        if op == "var":
            if t.sort is INDEX:
                v = self.index[t]
            else:
                v = self.elem.get(t)
                if v is None:
                    raise _Need(t)
        elif op == "0":
            v = 0
        elif op == "bot":
            v = BOT
        elif op == "rd":
            i = self.term(t.args[1])
            v = BOT if i < 0 or i > self.top else self.cell(t.args[0], i)
        elif op == "diff":
            v = self.diff(t.args[0], t.args[1])
        elif op == "S":
            v = self.term(t.args[0]) + 1
        elif op == "P":
            v = self.term(t.args[0]) - 1
        else:
            raise ValueError(op)
        memo[t] = v
        return v

    def diff(self, x: Term, y: Term) -> int:
        for k in range(self.top, -1, -1):
            if self.cell(x, k) != self.cell(y, k):
                return k
        return 0

    def lit(self, l: Lit) -> bool:
        a = l.atom
        if a.sort is ARRAY:
            v = all(self.cell(a.lhs, k) == self.cell(a.rhs, k) for k in range(self.top, -1, -1))
        else:
            x, y = self.term(a.lhs), self.term(a.rhs)
            v = x == y if a.rel == "eq" else (x <= y if a.rel == "le" else x < y)
        return v == l.pos

    def formula(self, f: Formula) -> bool:
        """Kleene evaluation: True/False, or _Need for a blocking slot.

        Literal children are tried first so that cheap facts prune early and
        pick the slot to branch on.
        """
        if isinstance(f, Lit):
            return self.lit(f)
        need = None
        is_and = isinstance(f, And)
        kids = sorted(f.args, key=lambda g: not isinstance(g, Lit))
        for g in kids:
            try:
                v = self.formula(g)
            except _Need as n:
                if need is None:
                    need = n
                continue
            if v != is_and:
                return v
        if need is not None:
            raise need
        return is_and

    def check(self, f: Formula) -> bool:
        self.memo = {}
        return self.formula(f)


@dataclass
class OracleResult:
    sat: Optional[bool]  # None when the node budget ran out
    model: Optional[FiniteArrayModel] = None
    complete: bool = True
    warning: str = ""
    bounds: Tuple[int, int] = (0, 0)
    nodes: int = 0


def completeness_bounds(formulas: Sequence[Formula]) -> Tuple[int, int]:
    """Chain length and element-token count that suffice for TO inputs.

    Chain: 0, one point per index variable, one per diff subterm (its value)
    and one per array atom (a disagreement witness). Elements: bot, one per
    element variable, one per read or write subterm (the value it reads or
    stores) and two per diff subterm and array atom (a disagreeing pair).
    """
    ts = {t for f in formulas for t in formula_terms(f)}
    ivars = [t for t in ts if t.is_var and t.sort is INDEX]
    evars = [t for t in ts if t.is_var and t.sort is ELEM]
    diffs = [t for t in ts if t.op == "diff"]
    reads = [t for t in ts if t.op in ("rd", "wr")]
    arr_atoms = {l.atom for f in formulas for l in _lits(f) if l.atom.sort is ARRAY}
    chain = 1 + len(ivars) + len(diffs) + len(arr_atoms)
    elems = 1 + len(evars) + len(reads) + 2 * (len(diffs) + len(arr_atoms))
    return chain, elems


def _lits(f: Formula):
    if isinstance(f, Lit):
        yield f
    else:
        for g in f.args:
            yield from _lits(g)


def brute_force_check(
    formulas: Sequence[Formula],
    max_chain: Optional[int] = None,
    max_elems: Optional[int] = None,
    theory: str = "TO",
    max_nodes: Optional[int] = None,
) -> OracleResult:
    """Search finite functional models of the conjunction of ``formulas``.

    Index variables range over chains -p..q containing 0 (every negative
    point named by a variable); array cells and element variables are filled
    on demand with restricted-growth tokens, pruning by partial evaluation.
    A model on a chain extends to any longer chain (new points read bot
    everywhere), so unsat at the largest chain is unsat at all smaller ones.
    """
    f = conj(*formulas)
    need_chain, need_elems = completeness_bounds([f])
    L = need_chain if max_chain is None else max_chain
    E = need_elems if max_elems is None else max_elems
    warning = ""
    if L < need_chain or E < need_elems:
        warning = f"bounds ({L},{E}) below completeness threshold ({need_chain},{need_elems})"
    if theory == "IDL":
        warning = (warning + "; " if warning else "") + "IDL: unsat verdict is advisory"
    ts = set(formula_terms(f))
    ivars = sorted((t for t in ts if t.is_var and t.sort is INDEX), key=lambda t: t.key)
    evars = sorted((t for t in ts if t.is_var and t.sort is ELEM), key=lambda t: t.key)
    avars = sorted((t for t in ts if t.is_var and t.sort is ARRAY), key=lambda t: t.key)
    budget = [max_nodes if max_nodes is not None else -1]
    try:
        for size in range(1, L + 1):
            for p in range(0, min(len(ivars), size - 1) + 1):
                q = size - 1 - p
                pts = list(range(-p, q + 1))
                for vals in itertools.product(pts, repeat=len(ivars)):
                    if p and not all(k in vals for k in range(-p, 0)):
                        continue
                    ev = _Partial(dict(zip(ivars, vals)), q)
                    if _search(ev, f, E, budget):
                        model = _to_model(ev, pts, ivars, evars, avars)
                        return OracleResult(True, model, True, warning, (L, E), _used(budget, max_nodes))
    except _Budget:
        return OracleResult(None, None, False, (warning + "; " if warning else "") + "node budget exhausted",
                            (L, E), _used(budget, max_nodes))
    return OracleResult(False, None, not warning, warning, (L, E), _used(budget, max_nodes))


def _used(budget, max_nodes) -> int:
    return (max_nodes - budget[0]) if max_nodes is not None else -1 - budget[0]


def _search(ev: _Partial, f: Formula, max_tokens: int, budget: List[int]) -> bool:
    budget[0] -= 1
    if budget[0] == 0:
        raise _Budget()
    try:
        return ev.check(f)
    except _Need as n:
        slot = n.slot
    used = set(ev.cells.values()) | set(ev.elem.values())
    used.discard(BOT)
    n_used = len(used)
    choices = [BOT] + [f"v{k}" for k in range(1, n_used + 1)]
    if n_used + 1 < max_tokens:
        choices.append(f"v{n_used + 1}")
    store = ev.cells if isinstance(slot, tuple) else ev.elem
    for tok in choices:
        store[slot] = tok
        if _search(ev, f, max_tokens, budget):
            return True
    del store[slot]
    return False


def _to_model(ev: _Partial, pts, ivars, evars, avars) -> FiniteArrayModel:
    elem = {e: ev.elem.get(e, BOT) for e in evars}
    arrays = {a: array_value({k: v for (b, k), v in ev.cells.items() if b is a}) for a in avars}
    toks = sorted({BOT} | set(elem.values()) | {v for a in arrays.values() for _, v in a})
    return FiniteArrayModel(list(pts), toks, dict(ev.index), elem, arrays)


# --- interpolant checking ------------------------------------------------

@dataclass
class CheckReport:
    a_implies: Optional[bool] = None  # A and not theta unsat
    b_excludes: Optional[bool] = None  # theta and B unsat
    symbols_ok: Optional[bool] = None
    brute_a: Optional[bool] = None
    brute_b: Optional[bool] = None
    bad_symbols: List[str] = field(default_factory=list)
    counterexamples: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        vals = [self.a_implies, self.b_excludes, self.symbols_ok, self.brute_a, self.brute_b]
        return all(v is not False for v in vals) and None not in vals[:3]

    def lines(self) -> List[str]:
        def s(v):
            return "skipped" if v is None else ("pass" if v else "FAIL")

        out = [
            f"A implies theta: {s(self.a_implies)}",
            f"theta and B unsat: {s(self.b_excludes)}",
            f"symbols shared: {s(self.symbols_ok)}" + (f" (extra: {' '.join(self.bad_symbols)})" if self.bad_symbols else ""),
            f"brute force A and not theta: {s(self.brute_a)}",
            f"brute force theta and B: {s(self.brute_b)}",
        ]
        return out + self.counterexamples + self.notes


def check_interpolant(
    a: Sequence[Formula],
    b: Sequence[Formula],
    theta: Formula,
    theory: str = "TO",
    brute: bool = True,
    max_chain: Optional[int] = None,
    max_elems: Optional[int] = None,
    max_brute_size: int = 9,
    budget: int = 4,
    max_nodes: Optional[int] = 200_000,
) -> CheckReport:
    """Definition checks: A entails theta, theta excludes B, shared symbols only."""
    from .solver import decide

    rep = CheckReport()
    sa = set().union(*[free_symbols(f) for f in a]) if a else set()
    sb = set().union(*[free_symbols(f) for f in b]) if b else set()
    extra = free_symbols(theta) - (sa & sb)
    rep.symbols_ok = not extra
    rep.bad_symbols = sorted(t.name for t in extra)
    left = list(a) + [negate(theta)]
    right = [theta] + list(b)
    ra = decide(left, theory, budget)
    rb = decide(right, theory, budget)
    rep.a_implies = None if ra.status == "unknown" else ra.status == "unsat"
    rep.b_excludes = None if rb.status == "unknown" else rb.status == "unsat"
    for name, r in (("A and not theta", ra), ("theta and B", rb)):
        if r.status == "sat" and r.model is not None:
            rep.counterexamples.append(f"{name} model:\n{r.model.describe()}")
    if brute:
        for name, fs in (("a", left), ("b", right)):
            chain, elems = completeness_bounds([conj(*fs)])
            c = chain if max_chain is None else min(chain, max_chain)
            e = elems if max_elems is None else min(elems, max_elems)
            if c > max_brute_size:
                rep.notes.append(f"brute force {name}: chain bound {c} too large, capped at {max_brute_size}")
                c = max_brute_size
            res = brute_force_check(fs, c, e, theory, max_nodes)
            setattr(rep, f"brute_{name}", None if res.sat is None else not res.sat)
            if res.sat and res.model is not None:
                rep.counterexamples.append(f"brute force {name} model:\n{res.model.describe()}")
            if res.warning:
                rep.notes.append(f"brute force {name}: {res.warning}")
    return rep


# --- witnesses from ground models ----------------------------------------

def model_from_ground(formulas: Iterable[Formula], gm) -> FiniteArrayModel:
    """Minimal functional model read off a ground TO/EUF model.

    Index variables take their ground values; each array maps the indexes
    where the ground model has a read to that read's token and is ``bot``
    everywhere else. The result is checked against ``formulas``.
    """
    formulas = list(formulas)
    syms = set()
    for f in formulas:
        syms |= free_symbols(f)
    index = {t: v for t, v in gm.index.items() if t.is_var}
    elem = {t: v for t, v in gm.elem.items() if t.is_var}
    arrays: Dict[Term, ArrayValue] = {}
    for t in syms:
        if t.sort is INDEX:
            index.setdefault(t, 0)
        elif t.sort is ELEM:
            elem.setdefault(t, BOT)
        else:
            arrays[t] = array_value(gm.tables.get(t, {}))
    chain = sorted({0} | set(index.values()) | {k for a in arrays.values() for k, _ in a})
    toks = sorted({BOT} | set(elem.values()) | {v for a in arrays.values() for _, v in a})
    m = FiniteArrayModel(chain, toks, index, elem, arrays)
    for f in formulas:
        if not evaluate(m, f):
            raise OracleError(f"ground model does not extend to a functional model of {f}")
    return m
