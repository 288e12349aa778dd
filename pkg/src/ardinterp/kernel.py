"""Sorts, interned terms, NNF formulas, substitution and flattening."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union


class Sort(Enum):
    INDEX = "Index"
    ELEM = "Elem"
    ARRAY = "Array"


INDEX, ELEM, ARRAY = Sort.INDEX, Sort.ELEM, Sort.ARRAY

# prefix of every engine-generated name; the parser refuses it in user input
RESERVED_PREFIX = "__"

SIGNATURE: Dict[str, Tuple[Tuple[Sort, ...], Sort]] = {
    "rd": ((ARRAY, INDEX), ELEM),
    "wr": ((ARRAY, INDEX, ELEM), ARRAY),
    "diff": ((ARRAY, ARRAY), INDEX),
    "S": ((INDEX,), INDEX),
    "P": ((INDEX,), INDEX),
}
CONSTANTS: Dict[str, Sort] = {"0": INDEX, "eps": ARRAY, "bot": ELEM}


class IllSortedTerm(TypeError):
    pass


class Term:
    """Hash-consed term. Build through the ``mk_*`` helpers, never directly."""

    __slots__ = ("op", "args", "sort", "name", "uid", "key")

    def __init__(self, op, args, sort, name, uid, key):
        self.op = op
        self.args = args
        self.sort = sort
        self.name = name
        self.uid = uid
        self.key = key

    @property
    def is_var(self) -> bool:
        return self.op == "var"

    @property
    def is_const(self) -> bool:
        return self.op in CONSTANTS

    @property
    def is_atomic(self) -> bool:
        return not self.args

    def __repr__(self) -> str:
        from .frontend import print_term

        return print_term(self)

    def __reduce__(self):
        if self.op == "var":
            return (mk_var, (self.name, self.sort))
        return (intern_term, (self.op, list(self.args)))


_TABLE: Dict[tuple, Term] = {}
_UIDS = itertools.count()


def _make(op: str, args: Tuple[Term, ...], sort: Sort, name: Optional[str]) -> Term:
    k = (op, name, sort, tuple(a.uid for a in args))
    t = _TABLE.get(k)
    if t is None:
        if op == "var":
            key = (0, name)
        elif not args:
            key = (1, op)
        else:
            key = (2, op) + tuple(a.key for a in args)
        t = Term(op, args, sort, name, next(_UIDS), key)
        _TABLE[k] = t
    return t


def mk_var(name: str, sort: Sort) -> Term:
    return _make("var", (), sort, name)


def intern_term(head: str, args: Sequence[Term] = ()) -> Term:
    """Return the unique term ``head(args)``; raises IllSortedTerm on a bad signature."""
    args = tuple(args)
    if head in CONSTANTS:
        if args:
            raise IllSortedTerm(f"constant {head} takes no arguments")
        return _make(head, (), CONSTANTS[head], None)
    if head not in SIGNATURE:
        raise IllSortedTerm(f"unknown function symbol {head!r}")
    dom, cod = SIGNATURE[head]
    if len(args) != len(dom):
        raise IllSortedTerm(f"{head} expects {len(dom)} arguments, got {len(args)}")
    for pos, (a, s) in enumerate(zip(args, dom)):
        if a.sort is not s:
            raise IllSortedTerm(
                f"argument {pos + 1} of {head} must have sort {s.value}, got {a.sort.value}"
            )
    # S and P are mutually inverse on the integers
    if head == "S" and args[0].op == "P":
        return args[0].args[0]
    if head == "P" and args[0].op == "S":
        return args[0].args[0]
    return _make(head, args, cod, None)


def zero() -> Term:
    return intern_term("0")


def eps() -> Term:
    return intern_term("eps")


def bot() -> Term:
    return intern_term("bot")


def rd(a: Term, i: Term) -> Term:
    return intern_term("rd", (a, i))


def wr(a: Term, i: Term, e: Term) -> Term:
    return intern_term("wr", (a, i, e))


def diff(a: Term, b: Term) -> Term:
    return intern_term("diff", (a, b))


def succ(x: Term, n: int = 1) -> Term:
    """S^n(x) for n >= 0, P^-n(x) for n < 0."""
    op = "S" if n >= 0 else "P"
    for _ in range(abs(n)):
        x = intern_term(op, (x,))
    return x


def offset_of(t: Term) -> Tuple[Term, int]:
    """Split an index term into base and S/P offset."""
    n = 0
    while t.op in ("S", "P"):
        n += 1 if t.op == "S" else -1
        t = t.args[0]
    return t, n


def complexity(t: Term) -> int:
    """Number of non-constant function symbols in t."""
    if not t.args:
        return 0
    return 1 + sum(complexity(a) for a in t.args)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    for a in t.args:
        yield from subterms(a)


# --- iterated diff -------------------------------------------------------

def chain_terms(a: Term, b: Term, length: int) -> Tuple[List[Term], List[Term]]:
    """Overwritten copies b_1..b_l and the iterated diffs diff_1..diff_l of (a, b)."""
    bs: List[Term] = []
    ds: List[Term] = []
    cur = b
    for _ in range(length):
        bs.append(cur)
        d = diff(a, cur)
        ds.append(d)
        cur = wr(cur, d, rd(a, d))
    return bs, ds


def match_chain(t: Term) -> Optional[Tuple[Term, Term, int]]:
    """Recognise diff(a, b_k) built by ``chain_terms``; returns (a, b, k)."""
    if t.op != "diff":
        return None
    a, cur = t.args
    k = 1
    while cur.op == "wr":
        base, i, e = cur.args
        if i is not diff(a, base) or e is not rd(a, i):
            break
        cur = base
        k += 1
    return a, cur, k


# --- formulas ------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    rel: str  # "eq" | "le" | "lt"
    lhs: Term
    rhs: Term

    @property
    def sort(self) -> Sort:
        return self.lhs.sort


@dataclass(frozen=True)
class Lit:
    atom: Atom
    pos: bool = True

    def negate(self) -> "Lit":
        return Lit(self.atom, not self.pos)


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


Formula = Union[Lit, And, Or]
TRUE = And(())
FALSE = Or(())


def mk_eq(l: Term, r: Term) -> Atom:
    if l.sort is not r.sort:
        raise IllSortedTerm(f"equality between {l.sort.value} and {r.sort.value}")
    # variables first, then by structure; makes symmetric duplicates identical
    if r.key < l.key:
        l, r = r, l
    return Atom("eq", l, r)


def _order_atom(rel: str, l: Term, r: Term) -> Atom:
    if l.sort is not INDEX or r.sort is not INDEX:
        raise IllSortedTerm("order atom over non-index terms")
    return Atom(rel, l, r)


def mk_le(l: Term, r: Term) -> Atom:
    return _order_atom("le", l, r)


def mk_lt(l: Term, r: Term) -> Atom:
    return _order_atom("lt", l, r)


def eq(l: Term, r: Term) -> Lit:
    return Lit(mk_eq(l, r))


def neq(l: Term, r: Term) -> Lit:
    return Lit(mk_eq(l, r), False)


def le(l: Term, r: Term) -> Lit:
    return Lit(mk_le(l, r))


def lt(l: Term, r: Term) -> Lit:
    return Lit(mk_lt(l, r))


def negate(f: Formula) -> Formula:
    if isinstance(f, Lit):
        return f.negate()
    if isinstance(f, And):
        return Or(tuple(negate(a) for a in f.args))
    return And(tuple(negate(a) for a in f.args))


def _flat_args(cls, fs: Iterable[Formula]) -> Optional[list]:
    out: list = []
    seen = set()
    absorbing = FALSE if cls is And else TRUE
    for f in fs:
        if f == absorbing:
            return None
        if isinstance(f, cls):
            items = f.args
        else:
            items = (f,)
        for g in items:
            if g not in seen:
                seen.add(g)
                out.append(g)
    return out


def conj(*fs: Formula) -> Formula:
    """Conjunction with constant folding and duplicate removal."""
    args = _flat_args(And, fs)
    if args is None:
        return FALSE
    return args[0] if len(args) == 1 else And(tuple(args))


def disj(*fs: Formula) -> Formula:
    args = _flat_args(Or, fs)
    if args is None:
        return TRUE
    return args[0] if len(args) == 1 else Or(tuple(args))


def implies(hyps: Sequence[Formula], concl: Formula) -> Formula:
    if concl in hyps:
        return TRUE
    return disj(*[negate(h) for h in hyps], concl)


def literals(f: Formula) -> Iterator[Lit]:
    if isinstance(f, Lit):
        yield f
    else:
        for a in f.args:
            yield from literals(a)


def formula_terms(f: Formula) -> Iterator[Term]:
    for l in literals(f):
        yield from subterms(l.atom.lhs)
        yield from subterms(l.atom.rhs)


def free_symbols(f: Union[Formula, Term]) -> Set[Term]:
    """Variables of f; the theory constants 0, eps and bot are not symbols."""
    ts = subterms(f) if isinstance(f, Term) else formula_terms(f)
    return {t for t in ts if t.is_var}


def subst_term(t: Term, m: Dict[Term, Term]) -> Term:
    r = m.get(t)
    if r is not None:
        return r
    if not t.args:
        return t
    return intern_term(t.op, [subst_term(a, m) for a in t.args])


def subst_atom(a: Atom, m: Dict[Term, Term]) -> Atom:
    l, r = subst_term(a.lhs, m), subst_term(a.rhs, m)
    if a.rel == "eq":
        return mk_eq(l, r)
    return Atom(a.rel, l, r)


def subst(f: Formula, m: Dict[Term, Term]) -> Formula:
    if isinstance(f, Lit):
        return Lit(subst_atom(f.atom, m), f.pos)
    if isinstance(f, And):
        return conj(*[subst(a, m) for a in f.args])
    return disj(*[subst(a, m) for a in f.args])


def trivial_value(l: Lit) -> Optional[bool]:
    """Truth value of a literal decided by syntax alone (x=x, x<=x, x<x)."""
    a = l.atom
    if a.lhs is not a.rhs:
        return None
    v = a.rel != "lt"
    return v if l.pos else not v


def simplify_clause(lits: Iterable[Lit]) -> Optional[Tuple[Lit, ...]]:
    """Drop syntactically false literals; None when the clause is a tautology."""
    out: List[Lit] = []
    seen = set()
    for l in lits:
        v = trivial_value(l)
        if v is True:
            return None
        if v is False or l in seen:
            continue
        if l.negate() in seen:
            return None
        seen.add(l)
        out.append(l)
    return tuple(out)


# --- fresh names ---------------------------------------------------------

class FreshNames:
    """Collision-free generator of reserved-prefix variables."""

    TAGS = {INDEX: "i", ELEM: "e", ARRAY: "a"}

    def __init__(self) -> None:
        self._count = itertools.count(1)

    def var(self, sort: Sort, tag: Optional[str] = None) -> Term:
        return mk_var(f"{RESERVED_PREFIX}{tag or self.TAGS[sort]}{next(self._count)}", sort)


# --- flattening ----------------------------------------------------------

def is_chain_term(t: Term) -> bool:
    m = match_chain(t)
    return m is not None and m[0].is_atomic and m[1].is_atomic


def _flat_rhs(t: Term) -> bool:
    if is_chain_term(t):
        return True
    return all(a.is_atomic for a in t.args)


def is_flat(l: Lit) -> bool:
    """Flat shape: x = t with t of complexity <= 1, x != y, or R(x, y) over atoms."""
    a = l.atom
    if a.rel != "eq":
        return a.lhs.is_atomic and a.rhs.is_atomic
    if not l.pos:
        return a.lhs.is_atomic and a.rhs.is_atomic
    return a.lhs.is_atomic and _flat_rhs(a.rhs) or a.rhs.is_atomic and _flat_rhs(a.lhs)


class Flattener:
    """Abstracts nested subterms into fresh variables with defining equalities.

    Definitions are shared: the same subterm is always named by the same variable.
    """

    def __init__(self, fresh: FreshNames) -> None:
        self.fresh = fresh
        self.memo: Dict[Term, Term] = {}
        self.defs: List[Lit] = []
        self.new_vars: List[Term] = []

    def atomic(self, t: Term) -> Term:
        if t.is_atomic:
            return t
        v = self.memo.get(t)
        if v is None:
            rhs = self.shallow(t)
            v = self.fresh.var(t.sort)
            self.memo[t] = v
            self.new_vars.append(v)
            self.defs.append(eq(v, rhs))
        return v

    def shallow(self, t: Term) -> Term:
        """t with every argument made atomic; iterated diffs stay one symbol."""
        if t.is_atomic:
            return t
        m = match_chain(t)
        if m is not None and m[2] > 1:
            a, b, k = m
            return chain_terms(self.atomic(a), self.atomic(b), k)[1][-1]
        return intern_term(t.op, [self.atomic(x) for x in t.args])

    def literal(self, l: Lit) -> Lit:
        a = l.atom
        if a.rel != "eq":
            return Lit(Atom(a.rel, self.atomic(a.lhs), self.atomic(a.rhs)), l.pos)
        x, y = a.lhs, a.rhs
        if not l.pos:
            return neq(self.atomic(x), self.atomic(y))
        if x.is_atomic and y.is_atomic:
            return l
        if y.is_atomic:
            x, y = y, x
        if not x.is_atomic:
            x = self.atomic(x)
        return eq(x, self.shallow(y))

    def formula(self, f: Formula) -> Formula:
        if isinstance(f, Lit):
            return self.literal(f)
        if isinstance(f, And):
            return conj(*[self.formula(g) for g in f.args])
        return disj(*[self.formula(g) for g in f.args])


def flatten(
    formulas: Iterable[Formula], fresh: Optional[FreshNames] = None
) -> Tuple[List[Formula], List[Term]]:
    """Equisatisfiable flat version of ``formulas`` plus the fresh variables used."""
    fl = Flattener(fresh or FreshNames())
    body = [fl.formula(f) for f in formulas]
    return fl.defs + body, fl.new_vars
