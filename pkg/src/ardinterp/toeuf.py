"""Ground reasoning in total orders plus uninterpreted functions.

Reads rd(a, i) as the application f_a(i). Index literals become weighted
edges of an order graph (an edge u -> v of weight w says u - v <= w);
element literals go to a congruence closure whose function arguments are
index classes of the graph. Index disequalities are split at the clause
level, so the order graph only ever sees convex atoms.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .kernel import (
    ELEM,
    INDEX,
    Lit,
    Term,
    bot,
    lt,
    mk_eq,
    offset_of,
    simplify_clause,
    subterms,
    trivial_value,
    zero,
)

INF = float("inf")

Colored = Tuple[Lit, Optional[str]]


@dataclass(frozen=True)
class Edge:
    src: Term
    dst: Term
    weight: int
    lit: Optional[Lit] = None  # None for the S/P successor axioms
    color: Optional[str] = None


def lit_edges(l: Lit) -> Optional[List[Tuple[Term, Term, int]]]:
    """Order-graph edges of an index literal; None for a disequality."""
    a = l.atom
    x, y = a.lhs, a.rhs
    if a.rel == "eq":
        return [(x, y, 0), (y, x, 0)] if l.pos else None
    if a.rel == "le":
        return [(x, y, 0)] if l.pos else [(y, x, -1)]
    return [(x, y, -1)] if l.pos else [(y, x, 0)]


def is_index_diseq(l: Lit) -> bool:
    return l.atom.rel == "eq" and not l.pos and l.atom.sort is INDEX


def split_diseq(l: Lit) -> Tuple[Lit, Lit]:
    return lt(l.atom.lhs, l.atom.rhs), lt(l.atom.rhs, l.atom.lhs)


def expand_clause(lits: Iterable[Lit]) -> Optional[Tuple[Lit, ...]]:
    """Clause with index disequalities replaced by the two strict orders."""
    out: List[Lit] = []
    for l in lits:
        if is_index_diseq(l):
            out.extend(split_diseq(l))
        else:
            out.append(l)
    return simplify_clause(out)


# --- conflicts, models ---------------------------------------------------

@dataclass
class OrderConflict:
    cycle: List[Edge]

    @property
    def weight(self) -> int:
        return sum(e.weight for e in self.cycle)


@dataclass
class Link:
    """One step of an equality chain: u = v by an input literal or congruence."""

    u: Term
    v: Term
    lit: Optional[Lit] = None
    color: Optional[str] = None
    # for congruence: the two index arguments
    args: Optional[Tuple[Term, Term]] = None


@dataclass
class EufConflict:
    diseq: Lit
    color: Optional[str]
    chain: List[Link]


Conflict = object


@dataclass
class GroundModel:
    index: Dict[Term, int]
    elem: Dict[Term, str]
    tables: Dict[Term, Dict[int, str]]

    def value(self, t: Term):
        if t.sort is INDEX:
            return self.index[t]
        return self.elem[t]


@dataclass
class UnsatCore:
    literals: List[Lit]
    conflicts: List[Conflict] = field(default_factory=list)
    minimal: bool = False


# --- congruence closure with explanations --------------------------------

class CongruenceState:
    """Union-find over element terms with a proof forest for explanations."""

    def __init__(self, prefer: Optional[Callable[[Term], bool]] = None) -> None:
        self.parent: Dict[Term, Term] = {}
        self.rank: Dict[Term, int] = {}
        self.rep: Dict[Term, Term] = {}
        self.pparent: Dict[Term, Optional[Term]] = {}
        self.plabel: Dict[Term, Optional[Link]] = {}
        self.prefer = prefer

    def add(self, t: Term) -> None:
        if t not in self.parent:
            self.parent[t] = t
            self.rank[t] = 0
            self.rep[t] = t
            self.pparent[t] = None
            self.plabel[t] = None

    def find(self, t: Term) -> Term:
        p = self.parent
        while p[t] is not t:
            p[t] = p[p[t]]
            t = p[t]
        return t

    def representative(self, t: Term) -> Term:
        return self.rep[self.find(t)]

    def _reroot(self, x: Term) -> None:
        prev: Optional[Term] = None
        prev_label: Optional[Link] = None
        cur: Optional[Term] = x
        while cur is not None:
            nxt, lab = self.pparent[cur], self.plabel[cur]
            self.pparent[cur] = prev
            self.plabel[cur] = prev_label
            prev, prev_label = cur, lab
            cur = nxt

    def merge(self, u: Term, v: Term, label: Link) -> bool:
        ru, rv = self.find(u), self.find(v)
        if ru is rv:
            return False
        self._reroot(u)
        self.pparent[u] = v
        self.plabel[u] = label
        if self.rank[ru] < self.rank[rv]:
            ru, rv = rv, ru
        self.parent[rv] = ru
        if self.rank[ru] == self.rank[rv]:
            self.rank[ru] += 1
        a, b = self.rep[ru], self.rep[rv]
        if self.prefer is not None and not self.prefer(a) and self.prefer(b):
            a = b
        elif (self.prefer is None or self.prefer(a) == self.prefer(b)) and b.key < a.key:
            a = b
        self.rep[ru] = a
        return True

    def explain(self, s: Term, t: Term) -> List[Link]:
        """Chain of links s = ... = t along the proof forest."""
        up_s = [s]
        while self.pparent[up_s[-1]] is not None:
            up_s.append(self.pparent[up_s[-1]])
        on_s = set(up_s)
        up_t = [t]
        while up_t[-1] not in on_s:
            up_t.append(self.pparent[up_t[-1]])
        lca = up_t[-1]
        links: List[Link] = []
        for x in up_s[: up_s.index(lca)]:
            lab = self.plabel[x]
            links.append(_oriented(lab, x, self.pparent[x]))
        tail: List[Link] = []
        for y in up_t[:-1]:
            lab = self.plabel[y]
            tail.append(_oriented(lab, self.pparent[y], y))
        return links + tail[::-1]


def _oriented(lab: Link, u: Term, v: Term) -> Link:
    if lab.u is u and lab.v is v:
        return lab
    args = (lab.args[1], lab.args[0]) if lab.args else None
    return Link(u, v, lab.lit, lab.color, args)


def congruence_close(
    eqs: Sequence[Tuple[Term, Term]], diseqs: Sequence[Tuple[Term, Term]]
) -> Tuple[CongruenceState, Optional[Tuple[Term, Term]]]:
    """Closure of plain EUF equalities; returns the state and a violated disequality."""
    cc = CongruenceState()
    terms = [t for p in list(eqs) + list(diseqs) for x in p for t in subterms(x)]
    for t in terms:
        cc.add(t)
    pending = [(s, t, Link(s, t)) for s, t in eqs]
    apps = [t for t in cc.parent if t.args]
    while pending:
        s, t, lab = pending.pop(0)
        if cc.merge(s, t, lab):
            sig: Dict[tuple, Term] = {}
            for a in apps:
                k = (a.op,) + tuple(cc.find(x) for x in a.args)
                if k in sig and cc.find(sig[k]) is not cc.find(a):
                    pending.append((a, sig[k], Link(a, sig[k], args=(a.args[-1], sig[k].args[-1]))))
                sig.setdefault(k, a)
    for s, t in diseqs:
        if cc.find(s) is cc.find(t):
            return cc, (s, t)
    return cc, None


# --- the combined theory state -------------------------------------------

class TheoryState:
    """Closure of a conjunction of convex TO/EUF literals.

    ``terms`` registers additional terms so that ``value`` can judge
    literals that are not (yet) asserted.
    """

    def __init__(
        self,
        lits: Sequence[Colored],
        theory: str = "TO",
        terms: Iterable[Term] = (),
        prefer: Optional[Callable[[Term], bool]] = None,
    ) -> None:
        self.theory = theory
        self.lits = list(lits)
        self.conflict: Optional[Conflict] = None
        self.nodes: List[Term] = []
        self.pos: Dict[Term, int] = {}
        self.edges: List[Edge] = []
        self.elem_terms: List[Term] = []
        self._elem_seen: Set[Term] = set()
        self._add_index(zero())
        self._add_elem(bot())
        for t in terms:
            self._register(t)
        elem_eqs: List[Tuple[Term, Term, Lit, Optional[str]]] = []
        self.diseqs: List[Tuple[Term, Term, Lit, Optional[str]]] = []
        for l, color in self.lits:
            a = l.atom
            self._register(a.lhs)
            self._register(a.rhs)
            if a.sort is INDEX:
                es = lit_edges(l)
                if es is None:
                    raise ValueError("index disequalities must be split before the theory check")
                for s, d, w in es:
                    self.edges.append(Edge(s, d, w, l, color))
            elif l.pos:
                elem_eqs.append((a.lhs, a.rhs, l, color))
            else:
                self.diseqs.append((a.lhs, a.rhs, l, color))
        self._close_order()
        if self.conflict is not None:
            return
        self._close_euf(elem_eqs, prefer)

    # registration
    def _register(self, t: Term) -> None:
        if t.sort is INDEX:
            self._add_index(t)
        elif t.sort is ELEM:
            self._add_elem(t)

    def _add_index(self, t: Term) -> None:
        if t in self.pos:
            return
        self.pos[t] = len(self.nodes)
        self.nodes.append(t)
        base, off = offset_of(t)
        if off:
            self._add_index(base)
            self.edges.append(Edge(t, base, off))
            self.edges.append(Edge(base, t, -off))

    def _add_elem(self, t: Term) -> None:
        if t in self._elem_seen:
            return
        self._elem_seen.add(t)
        self.elem_terms.append(t)
        if t.op == "rd":
            self._add_index(t.args[1])

    # order graph
    def _close_order(self) -> None:
        n = len(self.nodes)
        D = np.full((n, n), INF)
        np.fill_diagonal(D, 0.0)
        self.best: Dict[Tuple[int, int], Edge] = {}
        for e in self.edges:
            i, j = self.pos[e.src], self.pos[e.dst]
            if i == j:
                if e.weight < 0:
                    self.conflict = OrderConflict([e])
                    return
                continue
            if e.weight < D[i, j]:
                D[i, j] = e.weight
                self.best[(i, j)] = e
        nxt = np.tile(np.arange(n), (n, 1))
        for k in range(n):
            cand = D[:, k : k + 1] + D[k : k + 1, :]
            mask = cand < D
            if mask.any():
                D = np.where(mask, cand, D)
                nxt = np.where(mask, nxt[:, k : k + 1], nxt)
        self.D = D
        self.nxt = nxt
        if (np.diag(D) < 0).any():
            self.conflict = OrderConflict(self._negative_cycle())
            return
        eqm = (D <= 0) & (D.T <= 0)
        self.cls = [int(np.argmax(eqm[i])) for i in range(n)]

    def _negative_cycle(self) -> List[Edge]:
        n = len(self.nodes)
        dist = [0] * n
        pred: List[Optional[Edge]] = [None] * n
        last = None
        for _ in range(n + 1):
            last = None
            for e in self.edges:
                i, j = self.pos[e.src], self.pos[e.dst]
                if dist[i] + e.weight < dist[j]:
                    dist[j] = dist[i] + e.weight
                    pred[j] = e
                    last = j
            if last is None:
                break
        assert last is not None, "negative diagonal without a negative cycle"
        v = last
        for _ in range(n):
            v = self.pos[pred[v].src]
        cycle: List[Edge] = []
        u = v
        while True:
            e = pred[u]
            cycle.append(e)
            u = self.pos[e.src]
            if u == v:
                break
        cycle.reverse()
        return cycle

    def dist(self, u: Term, v: Term) -> float:
        return self.D[self.pos[u], self.pos[v]]

    def path(self, u: Term, v: Term) -> List[Edge]:
        """Edges of a shortest u -> v path."""
        i, j = self.pos[u], self.pos[v]
        out: List[Edge] = []
        while i != j:
            k = int(self.nxt[i, j])
            out.append(self.best[(i, k)])
            i = k
        return out

    def same_index(self, u: Term, v: Term) -> bool:
        return self.cls[self.pos[u]] == self.cls[self.pos[v]]

    def index_class(self, t: Term) -> List[Term]:
        c = self.cls[self.pos[t]]
        return [x for x in self.nodes if self.cls[self.pos[x]] == c]

    def propagate_equalities(self) -> List[Tuple[Term, Term]]:
        """Entailed equalities between distinct index terms, one per class member."""
        out = []
        for t in self.nodes:
            r = self.nodes[self.cls[self.pos[t]]]
            if r is not t:
                out.append((r, t))
        return out

    # congruence
    def _close_euf(self, elem_eqs, prefer) -> None:
        cc = CongruenceState(prefer)
        for t in self.elem_terms:
            cc.add(t)
        groups: Dict[Tuple[Term, int], Term] = {}
        for t in self.elem_terms:
            if t.op != "rd":
                continue
            key = (t.args[0], self.cls[self.pos[t.args[1]]])
            first = groups.setdefault(key, t)
            if first is not t:
                cc.merge(t, first, Link(t, first, args=(t.args[1], first.args[1])))
        for s, t, l, color in elem_eqs:
            cc.merge(s, t, Link(s, t, l, color))
        self.cc = cc
        for s, t, l, color in self.diseqs:
            if cc.find(s) is cc.find(t):
                self.conflict = EufConflict(l, color, cc.explain(s, t))
                return
        self._diseq_classes = {frozenset((cc.find(s), cc.find(t))) for s, t, _, _ in self.diseqs}

    # queries
    @property
    def consistent(self) -> bool:
        return self.conflict is None

    def value(self, l: Lit) -> Optional[bool]:
        """True if entailed, False if refuted, None if open (sound, not complete)."""
        v = trivial_value(l)
        if v is not None:
            return v
        a = l.atom
        if a.sort is INDEX:
            if a.lhs not in self.pos or a.rhs not in self.pos:
                return None
            x, y = self.pos[a.lhs], self.pos[a.rhs]
            D = self.D
            if a.rel == "eq":
                if D[x, y] <= 0 and D[y, x] <= 0:
                    return l.pos
                if D[x, y] < 0 or D[y, x] < 0:
                    return not l.pos
                return None
            if a.rel == "le":
                holds, fails = D[x, y] <= 0, D[y, x] <= -1
            else:
                holds, fails = D[x, y] <= -1, D[y, x] <= 0
            if holds:
                return l.pos
            if fails:
                return not l.pos
            return None
        if a.lhs not in self._elem_seen or a.rhs not in self._elem_seen:
            return None
        cc = self.cc
        rs, rt = cc.find(a.lhs), cc.find(a.rhs)
        if rs is rt:
            return l.pos
        if frozenset((rs, rt)) in self._diseq_classes:
            return not l.pos
        return None

    def model(self) -> Tuple[GroundModel, Optional[Tuple[Term, Term]]]:
        """A model of the asserted literals and, in IDL, a clash needing a split."""
        n = len(self.nodes)
        reps = sorted({self.cls[i] for i in range(n)}, key=lambda c: self.nodes[c].key)
        if self.theory == "IDL":
            D = np.where(np.isinf(self.D), 0, self.D)
            pot = np.minimum(0, D.min(axis=1))
            base = pot[self.pos[zero()]]
            val = {t: int(pot[self.pos[t]] - base) for t in self.nodes}
        else:
            succs = {c: [d for d in reps if d != c and self.D[c, d] <= 0] for c in reps}
            indeg = {c: 0 for c in reps}
            for c in reps:
                for d in succs[c]:
                    indeg[d] += 1
            zc = self.cls[self.pos[zero()]]

            def prio(c):
                # 0 as early as possible keeps free indexes nonnegative
                return (c != zc, self.nodes[c].key)

            heap = [(prio(c), c) for c in reps if indeg[c] == 0]
            heapq.heapify(heap)
            rank: Dict[int, int] = {}
            while heap:
                _, c = heapq.heappop(heap)
                rank[c] = len(rank)
                for d in succs[c]:
                    indeg[d] -= 1
                    if indeg[d] == 0:
                        heapq.heappush(heap, (prio(d), d))
            z = rank[zc]
            val = {t: rank[self.cls[self.pos[t]]] - z for t in self.nodes}
        cc = self.cc
        tokens: Dict[Term, str] = {cc.find(bot()): "bot"}
        for t in sorted(self.elem_terms, key=lambda t: t.key):
            r = cc.find(t)
            if r not in tokens:
                tokens[r] = f"v{len(tokens)}"
        elem = {t: tokens[cc.find(t)] for t in self.elem_terms}
        tables: Dict[Term, Dict[int, str]] = {}
        owner: Dict[Tuple[Term, int], Term] = {}
        clash = None
        for t in self.elem_terms:
            if t.op != "rd":
                continue
            a, i = t.args
            k = val[i]
            tab = tables.setdefault(a, {})
            if k in tab and tab[k] != elem[t] and clash is None:
                clash = (owner[(a, k)].args[1], i)
            tab.setdefault(k, elem[t])
            owner.setdefault((a, k), t)
        return GroundModel(val, elem, tables), clash


def order_close(atoms: Sequence[Lit], theory: str = "TO") -> TheoryState:
    """Order graph of index literals; ``state.conflict`` holds a negative cycle if any."""
    return TheoryState([(l, None) for l in atoms], theory)


def propagate_equalities(state: TheoryState) -> List[Tuple[Term, Term]]:
    return state.propagate_equalities()


# --- clause-level search -------------------------------------------------

class Unknown(Exception):
    """Raised when a case split cannot be performed (IDL clash across colors)."""


def clause_terms(clauses: Iterable[Sequence[Lit]]) -> List[Term]:
    seen: Dict[Term, None] = {}
    for c in clauses:
        for l in c:
            for t in (l.atom.lhs, l.atom.rhs):
                for s in subterms(t):
                    seen.setdefault(s, None)
    return list(seen)


def _negatable(l: Lit) -> bool:
    return not (l.atom.rel == "eq" and l.atom.sort is INDEX and l.pos)


@dataclass
class SearchResult:
    sat: bool
    model: Optional[GroundModel] = None
    state: Optional[TheoryState] = None
    core: Optional[Set[int]] = None  # indexes of clauses used


Assigned = List[Tuple[Lit, Optional[str], int]]  # literal, color, decision level


def inconsistent(st: TheoryState) -> bool:
    return not st.consistent


def state_at(assigned: Assigned, levels: Set[int], theory: str, terms: Iterable[Term] = ()) -> TheoryState:
    return TheoryState([(l, c) for l, c, lv in assigned if lv in levels], theory, terms)


def blame_levels(
    assigned: Assigned, refuted: Callable[[TheoryState], bool], theory: str, terms: Iterable[Term] = ()
) -> Set[int]:
    """Decision levels that suffice for ``refuted``, minimized by deletion newest first."""
    terms = list(terms)
    keep = {lv for _, _, lv in assigned}
    if not refuted(state_at(assigned, keep, theory, terms)):
        return keep
    for lv in sorted(keep, reverse=True):
        trial = keep - {lv}
        if refuted(state_at(assigned, trial, theory, terms)):
            keep = trial
    return keep


def solve_clauses(
    clauses: Sequence[Sequence[Lit]], theory: str = "TO", max_nodes: int = 2_000_000
) -> SearchResult:
    """Satisfiability of a clause set by case splitting with theory pruning."""
    cls: List[Tuple[Lit, ...]] = []
    origin: List[int] = []
    for n, c in enumerate(clauses):
        e = expand_clause(c)
        if e is None:
            continue
        if not e:
            return SearchResult(False, core={n})
        cls.append(e)
        origin.append(n)
    terms = clause_terms(clauses)  # includes terms of dropped tautologies
    budget = [max_nodes]
    def blame_lits(assigned: Assigned, lits: Iterable[Lit]) -> Set[int]:
        out: Set[int] = set()
        for l in lits:
            ts = list(subterms(l.atom.lhs)) + list(subterms(l.atom.rhs))
            out |= blame_levels(assigned, lambda st, l=l: not st.consistent or st.value(l) is False, theory, ts)
        return out

    def rec(assigned: Assigned, extra: List[Tuple[Lit, ...]], depth: int) -> Tuple[SearchResult, Set[int]]:
        budget[0] -= 1
        if budget[0] < 0:
            raise Unknown("search budget exhausted")
        st = TheoryState([(l, c) for l, c, _ in assigned], theory, terms)
        if not st.consistent:
            return SearchResult(False, state=st, core=set()), blame_levels(assigned, inconsistent, theory)
        best = None
        best_open: List[Lit] = []
        for ci, c in enumerate(cls + extra):
            opened = []
            done = False
            for l in c:
                v = st.value(l)
                if v is True:
                    done = True
                    break
                if v is None:
                    opened.append(l)
            if done:
                continue
            if not opened:
                return SearchResult(False, core={ci}), blame_lits(assigned, c)
            if best is None or len(opened) < len(best_open):
                best, best_open = ci, opened
                if len(opened) == 1:
                    break
        if best is None:
            m, clash = st.model()
            if clash is None:
                return SearchResult(True, m, st), set()
            i, j = clash
            split = (lt(i, j), lt(j, i), Lit(mk_eq(i, j)))
            return rec(assigned, extra + [split], depth)
        level = depth + 1
        core: Set[int] = {best}
        blamed = blame_lits(assigned, [l for l in (cls + extra)[best] if l not in best_open])
        prefix: Assigned = []
        for l in best_open:
            r, why = rec(assigned + prefix + [(l, None, level)], extra, level)
            if r.sat:
                return r, why
            if level not in why:
                return r, why  # the refutation ignores this split
            core |= r.core or set()
            blamed |= why - {level}
            if _negatable(l):
                prefix.append((l.negate(), None, level))
        return SearchResult(False, core=core), blamed

    res, _ = rec([], [], 0)
    if not res.sat:
        res.core = {origin[i] for i in (res.core or set()) if i < len(origin)}
    return res


def check_ground(literals: Sequence[Lit], theory: str = "TO", minimize: bool = True):
    """Sat(GroundModel) or Unsat(UnsatCore) for a conjunction of ground literals."""
    res = solve_clauses([(l,) for l in literals], theory)
    if res.sat:
        return res.model
    core = [literals[i] for i in sorted(res.core or range(len(literals)))]
    minimal = False
    if minimize:
        k = 0
        while k < len(core):
            trial = core[:k] + core[k + 1 :]
            if not solve_clauses([(l,) for l in trial], theory).sat:
                core = trial
            else:
                k += 1
        minimal = True
    return UnsatCore(core, minimal=minimal)
