"""From arbitrary quantifier-free input to finite separated pairs."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

from .kernel import (
    ARRAY,
    INDEX,
    And,
    Atom,
    FALSE,
    Flattener,
    Formula,
    FreshNames,
    Lit,
    Term,
    chain_terms,
    conj,
    disj,
    eq,
    formula_terms,
    literals,
    lt,
    match_chain,
    neq,
    rd,
    zero,
)


class SeparationError(RuntimeError):
    """A literal fits neither half of a separated pair (a flattening bug)."""


@dataclass(frozen=True)
class WriteAtom:
    target: Term
    base: Term
    index: Term
    value: Term

    def formula(self) -> Lit:
        from .kernel import wr

        return eq(self.target, wr(self.base, self.index, self.value))


@dataclass(frozen=True)
class DiffAtom:
    """diff_level(left, right) = name."""

    left: Term
    right: Term
    level: int
    name: Term

    def term(self) -> Term:
        return chain_terms(self.left, self.right, self.level)[1][-1]

    def formula(self) -> Lit:
        return eq(self.name, self.term())


@dataclass
class SeparatedPair:
    phi1: List[object] = field(default_factory=list)  # WriteAtom | DiffAtom
    phi2: List[Formula] = field(default_factory=list)

    def copy(self) -> "SeparatedPair":
        return SeparatedPair(list(self.phi1), list(self.phi2))

    @property
    def writes(self) -> List[WriteAtom]:
        return [a for a in self.phi1 if isinstance(a, WriteAtom)]

    @property
    def diffs(self) -> List[DiffAtom]:
        return [a for a in self.phi1 if isinstance(a, DiffAtom)]

    def chains(self) -> Dict[Tuple[Term, Term], List[Term]]:
        """Names k_1..k_l per ordered array pair, in level order."""
        out: Dict[Tuple[Term, Term], Dict[int, Term]] = {}
        for d in self.diffs:
            out.setdefault((d.left, d.right), {}).setdefault(d.level, d.name)
        return {k: [v[j] for j in sorted(v)] for k, v in out.items()}

    def formulas(self) -> List[Formula]:
        return [a.formula() for a in self.phi1] + list(self.phi2)

    def symbols(self) -> set:
        out = set()
        for f in self.formulas():
            out |= {t for t in formula_terms(f) if t.is_var}
        return out

    def vars_of(self, sort) -> List[Term]:
        return sorted((t for t in self.symbols() if t.sort is sort), key=lambda t: t.key)


# --- array equalities ----------------------------------------------------

def _rewrite_lit(l: Lit, fresh: FreshNames) -> Formula:
    a = l.atom
    if a.rel != "eq" or a.sort is not ARRAY or not (a.lhs.is_atomic and a.rhs.is_atomic):
        return l
    x, y = a.lhs, a.rhs
    d = chain_terms(x, y, 1)[1][0]
    if l.pos:
        return conj(eq(zero(), d), eq(rd(x, zero()), rd(y, zero())))
    k = fresh.var(INDEX)
    return conj(eq(k, d), disj(lt(zero(), k), neq(rd(x, zero()), rd(y, zero()))))


def rewrite_array_equalities(f: Formula, fresh: FreshNames) -> Formula:
    """Replace equalities between array variables by diff/read conditions."""
    if isinstance(f, Lit):
        return _rewrite_lit(f, fresh)
    if isinstance(f, And):
        return conj(*[rewrite_array_equalities(g, fresh) for g in f.args])
    return disj(*[rewrite_array_equalities(g, fresh) for g in f.args])


# --- disjunctions --------------------------------------------------------

def is_definitional(l: Lit) -> bool:
    """Positive a = wr(b,i,e) or k = diff_n(a,b): material for the first component."""
    if not l.pos or l.atom.rel != "eq":
        return False
    x, y = l.atom.lhs, l.atom.rhs
    for lhs, rhs in ((x, y), (y, x)):
        if lhs.is_atomic and rhs.op == "wr" and all(t.is_atomic for t in rhs.args):
            return True
        if lhs.is_atomic and lhs.sort is INDEX and rhs.op == "diff":
            m = match_chain(rhs)
            if m and m[0].is_atomic and m[1].is_atomic:
                return True
    return False


def _has_definitional(f: Formula) -> bool:
    return any(is_definitional(l) for l in literals(f))


def split_disjunctions(f: Formula, full_dnf: bool = False) -> List[List[Formula]]:
    """Disjuncts D_1..D_n, each a list of conjuncts, with f equivalent to their disjunction.

    By default a disjunction is case split only when it mentions a
    definitional atom; other disjunctions are kept whole and left to the
    ground solver. ``full_dnf`` splits every disjunction.
    """
    if isinstance(f, Lit):
        return [[f]]
    if isinstance(f, And):
        parts = [split_disjunctions(g, full_dnf) for g in f.args]
        return [list(itertools.chain.from_iterable(combo)) for combo in itertools.product(*parts)]
    if not full_dnf and not _has_definitional(f):
        return [[f]] if f.args else []
    out: List[List[Formula]] = []
    for g in f.args:
        out.extend(split_disjunctions(g, full_dnf))
    return out


# --- separated pairs -----------------------------------------------------

def _phi2_atom_ok(a: Atom) -> bool:
    if a.sort is INDEX:
        return a.lhs.op != "diff" and a.rhs.op != "diff"
    if a.sort is ARRAY:
        return False
    return all(t.op in ("var", "bot", "rd") and all(s.is_atomic or s.op in ("S", "P") for s in t.args)
               for t in (a.lhs, a.rhs))


def _definitional_parts(l: Lit):
    x, y = l.atom.lhs, l.atom.rhs
    if not x.is_atomic or (y.op not in ("wr", "diff")):
        x, y = y, x
    if y.op == "wr":
        b, i, e = y.args
        return WriteAtom(x, b, i, e)
    a, b, k = match_chain(y)
    return DiffAtom(a, b, k, x)


def to_separated_pair(conjuncts: Iterable[Formula], fresh: FreshNames) -> SeparatedPair:
    """Sort flat conjuncts into definitional atoms and ground facts.

    Repeated names for the same chain level become equalities in the second
    component; missing lower chain levels are filled with fresh names.
    """
    pair = SeparatedPair()
    named: Dict[Tuple[Term, Term, int], Term] = {}
    for f in conjuncts:
        if isinstance(f, Lit) and is_definitional(f):
            atom = _definitional_parts(f)
            if isinstance(atom, DiffAtom):
                key = (atom.left, atom.right, atom.level)
                if key in named:
                    if named[key] is not atom.name:
                        pair.phi2.append(eq(atom.name, named[key]))
                    continue
                named[key] = atom.name
            if atom not in pair.phi1:
                pair.phi1.append(atom)
            continue
        for l in literals(f):
            if not _phi2_atom_ok(l.atom):
                raise SeparationError(f"literal outside the separated-pair grammar: {l}")
        if f == FALSE or f not in pair.phi2:
            pair.phi2.append(f)
    # prefix closure of every chain
    for (a, b, k) in sorted(named, key=lambda t: (t[0].key, t[1].key, t[2])):
        for lvl in range(1, k):
            if (a, b, lvl) not in named:
                named[(a, b, lvl)] = fresh.var(INDEX)
                pair.phi1.append(DiffAtom(a, b, lvl, named[(a, b, lvl)]))
    return pair


def check_pair(pair: SeparatedPair) -> None:
    """Assert both separated-pair invariants."""
    levels: Dict[Tuple[Term, Term], set] = {}
    for d in pair.diffs:
        levels.setdefault((d.left, d.right), set()).add(d.level)
    for key, ls in levels.items():
        if ls != set(range(1, max(ls) + 1)):
            raise SeparationError(f"chain for {key} not prefix closed: {sorted(ls)}")
    for f in pair.phi2:
        for l in literals(f):
            if not _phi2_atom_ok(l.atom):
                raise SeparationError(f"bad second-component literal {l}")


def preprocess(
    formulas: Sequence[Formula], fresh: FreshNames, full_dnf: bool = False
) -> List[SeparatedPair]:
    """Finitely many separated pairs whose disjunction is equisatisfiable with the input."""
    fl = Flattener(fresh)
    body = [fl.formula(f) for f in formulas]
    whole = conj(*fl.defs, *body)
    whole = rewrite_array_equalities(whole, fresh)
    pairs = []
    for d in split_disjunctions(whole, full_dnf):
        pairs.append(to_separated_pair(d, fresh))
    return pairs
