"""Universal clauses of a separated pair and their instantiation over index terms."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .kernel import (
    INDEX,
    Formula,
    Lit,
    Or,
    Term,
    bot,
    chain_terms,
    eps,
    eq,
    le,
    lt,
    mk_var,
    neq,
    rd,
    simplify_clause,
    subst_atom,
    succ,
    zero,
)
from .preprocess import SeparatedPair

HOLE = mk_var("__h", INDEX)

Clause = Tuple[Lit, ...]


@dataclass(frozen=True)
class Template:
    """forall h. OR(body) with h written as HOLE."""

    body: Clause
    origin: str

    def at(self, t: Term) -> Optional[Clause]:
        m = {HOLE: t}
        return simplify_clause(Lit(subst_atom(l.atom, m), l.pos) for l in self.body)


def diff_chain_terms(a: Term, b: Term, length: int) -> Tuple[List[Term], List[Term]]:
    return chain_terms(a, b, length)


def diff_chain_clauses(a: Term, b: Term, names: Sequence[Term]) -> Tuple[List[Clause], Template]:
    """Ground chain conditions on k_1..k_l plus the universal tail clause."""
    ks = list(names)
    l = len(ks)
    ground: List[Clause] = []
    for j in range(l - 1):
        ground.append((le(ks[j + 1], ks[j]),))
    ground.append((le(zero(), ks[-1]),))
    for j in range(l - 1):
        ground.append((lt(ks[j + 1], ks[j]).negate(), neq(rd(a, ks[j]), rd(b, ks[j]))))
    for j in range(l - 1):
        ground.append((neq(ks[j], ks[j + 1]), eq(ks[j], zero())))
    for j in range(l):
        ground.append((neq(rd(a, ks[j]), rd(b, ks[j])), eq(ks[j], zero())))
    tail = (lt(ks[-1], HOLE).negate(), eq(rd(a, HOLE), rd(b, HOLE))) + tuple(
        eq(HOLE, k) for k in ks[:-1]
    )
    origin = f"chain:{a.name or a.op}:{b.name or b.op}"
    return ground, Template(tail, origin)


def write_clauses(a: Term, b: Term, i: Term, e: Term) -> Tuple[Clause, Template]:
    ground = (le(zero(), i).negate(), eq(rd(a, i), e))
    tmpl = Template((eq(HOLE, i), eq(rd(a, HOLE), rd(b, HOLE))), f"write:{a.name or a.op}")
    return ground, tmpl


EPS_TEMPLATE = Template((eq(rd(eps(), HOLE), bot()),), "eps")


def negative_template(a: Term) -> Template:
    return Template((lt(HOLE, zero()).negate(), eq(rd(a, HOLE), bot())), f"neg:{a.name}")


def array_vars(pair: SeparatedPair) -> List[Term]:
    from .kernel import ARRAY

    return pair.vars_of(ARRAY)


def index_terms(pair: SeparatedPair, n: int, theory: str = "TO", extra: Iterable[Term] = ()) -> List[Term]:
    """Index terms of complexity <= n over the pair's index variables and 0."""
    base = sorted(set(pair.vars_of(INDEX)) | set(extra), key=lambda t: t.key)
    base = [zero()] + [t for t in base if t is not zero()]
    if theory != "IDL":
        return base
    out: List[Term] = []
    for t in base:
        out.append(t)
        for k in range(1, n + 1):
            out.append(succ(t, k))
            out.append(succ(t, -k))
    return out


def templates_and_ground(pair: SeparatedPair) -> Tuple[List[Template], List[Tuple[Clause, str]]]:
    tmpls: List[Template] = [EPS_TEMPLATE]
    ground: List[Tuple[Clause, str]] = []
    for a in array_vars(pair):
        tmpls.append(negative_template(a))
    for w in pair.writes:
        g, t = write_clauses(w.target, w.base, w.index, w.value)
        ground.append((g, "write-ground"))
        tmpls.append(t)
    for (a, b), ks in sorted(pair.chains().items(), key=lambda kv: (kv[0][0].key, kv[0][1].key)):
        g, t = diff_chain_clauses(a, b, ks)
        ground.extend((c, "chain-ground") for c in g)
        tmpls.append(t)
    return tmpls, ground


def instances(
    pair: SeparatedPair, n: int = 0, theory: str = "TO", extra_terms: Iterable[Term] = ()
) -> List[Tuple[Clause, str]]:
    """Every simplified, non-tautological instance with its origin tag, deduplicated."""
    tmpls, ground = templates_and_ground(pair)
    terms = index_terms(pair, n, theory, extra_terms)
    out: List[Tuple[Clause, str]] = []
    seen = set()

    def add(c: Optional[Clause], origin: str) -> None:
        if c is None:
            return
        key = frozenset(c)
        if key not in seen:
            seen.add(key)
            out.append((c, origin))

    for c, origin in ground:
        add(simplify_clause(c), origin)
    for tmpl in tmpls:
        for t in terms:
            add(tmpl.at(t), tmpl.origin)
    return out


def clause_formula(c: Clause) -> Formula:
    return c[0] if len(c) == 1 else Or(tuple(c))


def formula_key(f: Formula):
    """Order-insensitive identity of a clause-shaped formula."""
    if isinstance(f, Lit):
        return frozenset((f,))
    if isinstance(f, Or) and all(isinstance(g, Lit) for g in f.args):
        return frozenset(f.args)
    return f


def instantiate(
    pair: SeparatedPair, n: int = 0, theory: str = "TO", extra_terms: Iterable[Term] = ()
) -> SeparatedPair:
    """The n-instantiation: phi1 unchanged, phi2 closed under all instances."""
    out = pair.copy()
    have = {formula_key(f) for f in out.phi2}
    for c, _ in instances(pair, n, theory, extra_terms):
        f = clause_formula(c) if c else Or(())
        k = formula_key(f)
        if k not in have:
            have.add(k)
            out.phi2.append(f)
    return out
