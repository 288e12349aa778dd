"""Quantifier-free interpolants for ARD via diff saturation over TO/EUF.

Ground level: the clause search of ``toeuf`` is replayed with colors. A
case split on an A-clause joins the branch interpolants with "or", a split
on a B-clause with "and". Every closed branch is a theory conflict, turned
into a colored local proof whose A-to-B boundary facts give the leaf
interpolant.

Array level: fresh shared names for iterated diffs of shared arrays are
added to both sides, one at a time, until the ground reduction of A and B
becomes inconsistent. The names are expanded back at the end.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .instantiate import instantiate
from .kernel import (
    ARRAY,
    FALSE,
    INDEX,
    TRUE,
    Formula,
    FreshNames,
    Lit,
    Term,
    chain_terms,
    conj,
    disj,
    eps,
    eq,
    formula_terms,
    free_symbols,
    implies,
    le,
    lt,
    mk_eq,
    negate,
    rd,
    subst,
    succ,
)
from .preprocess import DiffAtom, SeparatedPair, preprocess
from .solver import Decision, decide_pair, pair_clauses
from .toeuf import (
    Assigned,
    EufConflict,
    OrderConflict,
    TheoryState,
    Unknown,
    inconsistent,
    blame_levels,
    clause_terms,
    expand_clause,
    state_at,
)


class InterpolationError(RuntimeError):
    """An internal invariant of the interpolation procedure failed."""


class Consistent(Exception):
    """The colored clause set has a ground model."""

    def __init__(self, model) -> None:
        super().__init__("consistent")
        self.model = model


# --- colored local proofs ------------------------------------------------

@dataclass(eq=False)
class Step:
    """A derived fact: ('le', u, v, w) for u - v <= w, ('eq', u, v), or ('false',)."""

    fact: tuple
    color: str
    premises: Tuple["Step", ...] = ()


class Vocabulary:
    def __init__(self, a_syms: Set[Term], b_syms: Set[Term]) -> None:
        self.a = a_syms
        self.b = b_syms
        self._memo: Dict[Term, Tuple[bool, bool]] = {}

    def sides(self, t: Term) -> Tuple[bool, bool]:
        r = self._memo.get(t)
        if r is None:
            fs = free_symbols(t)
            r = (fs <= self.a, fs <= self.b)
            self._memo[t] = r
        return r

    def in_a(self, *ts: Term) -> bool:
        return all(self.sides(t)[0] for t in ts)

    def in_b(self, *ts: Term) -> bool:
        return all(self.sides(t)[1] for t in ts)

    def color_of(self, *ts: Term) -> str:
        """B when the terms fit the B side, else A; error if neither."""
        if self.in_b(*ts):
            return "B"
        if self.in_a(*ts):
            return "A"
        raise InterpolationError(f"terms {ts} fit neither side")


class LeafProof:
    """Local proof of a theory conflict, one color per inference step."""

    def __init__(self, st: TheoryState, voc: Vocabulary, theory: str) -> None:
        self.st = st
        self.voc = voc
        self.theory = theory
        self._leaves: Dict[object, Step] = {}

    def weight(self, w: int) -> int:
        # total orders only see the sign of a bound
        if self.theory == "TO":
            return 0 if w >= 0 else -1
        return w

    # order facts
    def edge_step(self, e) -> Step:
        s = self._leaves.get(e)
        if s is None:
            color = e.color if e.color is not None else self.voc.color_of(e.src, e.dst)
            s = Step(("le", e.src, e.dst, self.weight(e.weight)), color)
            self._leaves[e] = s
        return s

    def runs(self, steps: List[Step]) -> List[Step]:
        """Collapse consecutive same-colored order steps into summaries."""
        out: List[Step] = []
        group: List[Step] = []
        for s in steps + [None]:
            if group and (s is None or s.color != group[0].color):
                if len(group) == 1:
                    out.append(group[0])
                else:
                    w = self.weight(sum(g.fact[3] for g in group))
                    out.append(Step(("le", group[0].fact[1], group[-1].fact[2], w), group[0].color, tuple(group)))
                group = []
            if s is not None:
                group.append(s)
        return out

    def derive_le(self, u: Term, v: Term) -> Optional[Step]:
        """A step concluding u - v <= dist(u, v); None when u is v."""
        path = self.st.path(u, v)
        if not path:
            return None
        parts = self.runs([self.edge_step(e) for e in path])
        if len(parts) == 1:
            return parts[0]
        w = self.weight(sum(p.fact[3] for p in parts))
        return Step(("le", u, v, w), self.voc.color_of(u, v), tuple(parts))

    def shifted(self, s: Optional[Step], u: Term, v: Term) -> Optional[Step]:
        """Restate s as u - v <= 0 when u, v are offsets of its endpoints."""
        if s is None:
            return None
        if s.fact[1] is u and s.fact[2] is v and s.fact[3] == 0:
            return s
        return Step(("le", u, v, 0), self.voc.color_of(u, v), (s,))

    def index_eq(self, i: Term, j: Term) -> Tuple[Step, ...]:
        return tuple(s for s in (self.derive_le(i, j), self.derive_le(j, i)) if s is not None)

    # element facts
    def lit_step(self, lit: Lit, color: str) -> Step:
        key = (lit, color)
        s = self._leaves.get(key)
        if s is None:
            a = lit.atom
            fact = ("eq", a.lhs, a.rhs) if lit.pos else ("neq", a.lhs, a.rhs)
            s = Step(fact, color)
            self._leaves[key] = s
        return s

    def congruence(self, u: Term, v: Term, i: Term, j: Term) -> List[Step]:
        """Steps for rd(a,i) = rd(a,j), split through a shared index if needed."""
        voc = self.voc
        if voc.in_b(u, v):
            return [Step(("eq", u, v), "B", self.index_eq(i, j))]
        if voc.in_a(u, v):
            return [Step(("eq", u, v), "A", self.index_eq(i, j))]
        path = self.st.path(i, j)
        nodes = [i] + [e.dst for e in path]
        mid = next((x for x in nodes if voc.in_a(x) and voc.in_b(x)), None)
        if mid is None:
            raise InterpolationError(f"no shared index between {i} and {j}")
        off = int(self.st.dist(i, mid))
        t = succ(mid, off) if off else mid
        a = u.args[0]
        w = rd(a, t)
        c1 = voc.color_of(u, w)
        c2 = voc.color_of(w, v)
        p1 = tuple(
            s
            for s in (
                self.shifted(self.derive_le(i, mid), i, t),
                self.shifted(self.derive_le(mid, i), t, i),
            )
            if s is not None
        )
        p2 = tuple(
            s
            for s in (
                self.shifted(self.derive_le(mid, j), t, j),
                self.shifted(self.derive_le(j, mid), j, t),
            )
            if s is not None
        )
        return [Step(("eq", u, w), c1, p1), Step(("eq", w, v), c2, p2)]

    def eq_chain(self, links) -> List[Step]:
        steps: List[Step] = []
        for ln in links:
            if ln.lit is not None:
                leaf = self.lit_step(ln.lit, ln.color)
                # orient the fact along the chain
                if leaf.fact[1] is ln.u:
                    steps.append(leaf)
                else:
                    steps.append(Step(("eq", ln.u, ln.v), leaf.color, (leaf,)))
            else:
                i, j = ln.args
                steps.extend(self.congruence(ln.u, ln.v, i, j))
        out: List[Step] = []
        group: List[Step] = []
        for s in steps + [None]:
            if group and (s is None or s.color != group[0].color):
                if len(group) == 1:
                    out.append(group[0])
                else:
                    out.append(Step(("eq", group[0].fact[1], group[-1].fact[2]), group[0].color, tuple(group)))
                group = []
            if s is not None:
                group.append(s)
        return out

    # conflicts
    def refute(self) -> Step:
        c = self.st.conflict
        if isinstance(c, OrderConflict):
            steps = [self.edge_step(e) for e in c.cycle]
            colors = [s.color for s in steps]
            if len(set(colors)) == 1:
                return Step(("false",), colors[0], tuple(steps))
            k = next(n for n in range(len(steps)) if colors[n] != colors[n - 1])
            steps = steps[k:] + steps[:k]
            return Step(("false",), "B", tuple(self.runs(steps)))
        if isinstance(c, EufConflict):
            leaf = self.lit_step(c.diseq, c.color)
            parts = self.eq_chain(c.chain)
            return Step(("false",), leaf.color, tuple(parts) + (leaf,))
        raise InterpolationError("no conflict to refute")


def fact_formula(fact: tuple, theory: str) -> Formula:
    kind = fact[0]
    if kind == "false":
        return FALSE
    if kind == "eq":
        return Lit(mk_eq(fact[1], fact[2]))
    if kind == "neq":
        return Lit(mk_eq(fact[1], fact[2]), False)
    _, u, v, w = fact
    if w == 0:
        return le(u, v)
    if w == -1:
        return lt(u, v)
    if theory == "TO":
        return lt(u, v) if w < 0 else TRUE
    return le(u, succ(v, w))


def extract(root: Step, theory: str) -> Formula:
    """Interpolant of a colored local refutation.

    For every A-step feeding a B-step: (B-facts it depends on) -> its fact;
    when the refutation itself is an A-step, the negation of its B-facts.
    """
    memo: Dict[int, Tuple[Step, ...]] = {}

    def imp(s: Step) -> Tuple[Step, ...]:
        if s.color == "B":
            return (s,)
        r = memo.get(id(s))
        if r is None:
            seen: Dict[int, Step] = {}
            for p in s.premises:
                for q in imp(p):
                    seen.setdefault(id(q), q)
            r = tuple(seen.values())
            memo[id(s)] = r
        return r

    parts: List[Formula] = []
    visited: Set[int] = set()
    stack = [root]
    while stack:
        s = stack.pop()
        if id(s) in visited:
            continue
        visited.add(id(s))
        for p in s.premises:
            if s.color == "B" and p.color == "A":
                hyps = [fact_formula(q.fact, theory) for q in imp(p)]
                parts.append(implies(hyps, fact_formula(p.fact, theory)))
            stack.append(p)
    if root.color == "A":
        parts.append(negate(conj(*[fact_formula(q.fact, theory) for q in imp(root)])))
    return conj(*parts)


def leaf_interpolant(st: TheoryState, voc: Vocabulary, theory: str) -> Formula:
    return extract(LeafProof(st, voc, theory).refute(), theory)


# --- colored clause search -----------------------------------------------

def _negatable(l: Lit) -> bool:
    return not (l.atom.rel == "eq" and l.atom.sort is INDEX and l.pos)


def interpolate_clauses(
    a_clauses: Sequence[Sequence[Lit]],
    b_clauses: Sequence[Sequence[Lit]],
    voc: Vocabulary,
    theory: str = "TO",
    max_nodes: int = 500_000,
) -> Formula:
    """Interpolant of two ground clause sets; raises Consistent if A and B agree."""
    cls: List[Tuple[Tuple[Lit, ...], str]] = []
    for color, group in (("A", a_clauses), ("B", b_clauses)):
        for c in group:
            e = expand_clause(c)
            if e is None:
                continue
            if not e:
                return FALSE if color == "A" else TRUE
            cls.append((e, color))
    terms = clause_terms(c for c, _ in cls)
    budget = [max_nodes]

    def rec(assigned: Assigned, extra, depth: int) -> Tuple[Formula, Set[int]]:
        budget[0] -= 1
        if budget[0] < 0:
            raise Unknown("interpolation search budget exhausted")
        st = TheoryState([(l, c) for l, c, _ in assigned], theory, terms)
        if not st.consistent:
            # refute from the blamed levels only, so the result holds above them
            why = blame_levels(assigned, inconsistent, theory)
            return leaf_interpolant(state_at(assigned, why, theory, terms), voc, theory), why
        best = None
        best_lits: List[Lit] = []
        n_open = 0
        for c, color in cls + extra:
            opened: List[Lit] = []
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
            if best is None or len(opened) < n_open:
                # refuted literals still get a branch: they are refuted only
                # jointly, and the other side's interpolant must cover them
                best, n_open = (c, color), len(opened)
                best_lits = [l for l in c if l not in opened] + opened
                if n_open <= 1:
                    break
        if best is None:
            m, clash = st.model()
            if clash is None:
                raise Consistent(m)
            i, j = clash
            if voc.in_b(i, j):
                color = "B"
            elif voc.in_a(i, j):
                color = "A"
            else:
                raise Unknown(f"cannot split {i} against {j} on one side")
            split = ((lt(i, j), lt(j, i), eq(i, j)), color)
            return rec(assigned, extra + [split], depth)
        _, color = best
        level = depth + 1
        kids: List[Formula] = []
        blamed: Set[int] = set()
        prefix: Assigned = []
        for l in best_lits:
            kid, why = rec(assigned + prefix + [(l, color, level)], extra, level)
            if level not in why:
                return kid, why  # the refutation ignores this split
            kids.append(kid)
            blamed |= why - {level}
            if _negatable(l):
                prefix.append((l.negate(), color, level))
        return (disj(*kids) if color == "A" else conj(*kids)), blamed

    return rec([], [], 0)[0]


# --- the diff-saturation loop --------------------------------------------

@dataclass
class LoopState:
    a: SeparatedPair
    b: SeparatedPair
    fresh: FreshNames
    theory: str = "TO"
    diff_names: Dict[Tuple[Term, Term, int], Term] = field(default_factory=dict)
    n: int = 0  # instantiation depth
    iterations: int = 0
    cursor: int = 0
    trace: List[Tuple[Term, Term, int]] = field(default_factory=list)
    m: int = 0  # shared arrays
    index_vars: int = 0

    @property
    def bound(self) -> int:
        return (self.m * self.m - self.m) // 2 * (self.index_vars + 1)


def merge_pairs(p: SeparatedPair, q: SeparatedPair) -> SeparatedPair:
    """The pair of p and q together; duplicate chain names become equalities."""
    out = p.copy()
    have = {(d.left, d.right, d.level): d.name for d in p.diffs}
    for atom in q.phi1:
        if isinstance(atom, DiffAtom):
            key = (atom.left, atom.right, atom.level)
            if key in have:
                if have[key] is not atom.name:
                    out.phi2.append(eq(atom.name, have[key]))
                continue
            have[key] = atom.name
        if atom not in out.phi1:
            out.phi1.append(atom)
    out.phi2.extend(f for f in q.phi2 if f not in out.phi2)
    return out


def add_diff_name(pair: SeparatedPair, a: Term, b: Term, level: int, name: Term) -> SeparatedPair:
    out = pair.copy()
    for d in pair.diffs:
        if (d.left, d.right, d.level) == (a, b, level):
            if d.name is not name:
                out.phi2.append(eq(name, d.name))
            return out
    out.phi1.append(DiffAtom(a, b, level, name))
    return out


@dataclass
class PairResult:
    status: str  # "unsat" | "sat" | "unknown"
    interpolant: Optional[Formula] = None
    decision: Optional[Decision] = None
    iterations: int = 0
    bound: Optional[int] = None
    trace: List[Tuple[Term, Term, int]] = field(default_factory=list)
    names: Dict[Term, Term] = field(default_factory=dict)


def unname_diffs(f: Formula, names: Dict[Term, Term]) -> Formula:
    """Replace diff names by their iterated-diff terms."""
    return subst(f, names) if names else f


def _names_to_terms(diff_names: Dict[Tuple[Term, Term, int], Term]) -> Dict[Term, Term]:
    return {k: chain_terms(a, b, n)[1][-1] for (a, b, n), k in diff_names.items()}


def _mentions_eps(pair: SeparatedPair) -> bool:
    return any(t.op == "eps" for f in pair.formulas() for t in formula_terms(f))


def ard_interpolate(
    a: SeparatedPair,
    b: SeparatedPair,
    fresh: FreshNames,
    theory: str = "TO",
    budget: int = 4,
    a_syms: Optional[Set[Term]] = None,
    b_syms: Optional[Set[Term]] = None,
    check: Sequence[Formula] = (),
) -> PairResult:
    """Interpolant for one pair of separated pairs, or sat, or (IDL) unknown."""
    a_syms = set(a.symbols()) if a_syms is None else set(a_syms)
    b_syms = set(b.symbols()) if b_syms is None else set(b_syms)
    shared = a.symbols() & b.symbols()
    arrays = sorted((t for t in shared if t.sort is ARRAY), key=lambda t: t.key)
    if _mentions_eps(a) or _mentions_eps(b):
        arrays.append(eps())  # a constant, so common to both sides
    pairs = [(x, y) for k, x in enumerate(arrays) for y in arrays[k + 1 :]]
    st = LoopState(a, b, fresh, theory)
    st.m = len(arrays)
    st.index_vars = len({t for t in a.symbols() | b.symbols() if t.sort is INDEX})

    def instances(n: int) -> Tuple[list, list]:
        ai = instantiate(st.a, n, theory)
        bi = instantiate(st.b, n, theory)
        return pair_clauses(ai), pair_clauses(bi)

    def voc() -> Vocabulary:
        ks = set(st.diff_names.values())
        return Vocabulary(a_syms | ks, b_syms | ks)

    # A or B alone
    for side, value in ((a, FALSE), (b, TRUE)):
        d = decide_pair(side, theory, budget)
        if d.status == "unsat":
            return PairResult("unsat", value, bound=st.bound)
    joint = decide_pair(merge_pairs(a, b), theory, budget, check)
    if joint.status == "sat":
        return PairResult("sat", decision=joint, bound=st.bound)
    while True:
        ac, bc = instances(st.n)
        try:
            theta = interpolate_clauses(ac, bc, voc(), theory)
        except Consistent:
            theta = None
        except Unknown:
            return PairResult("unknown", iterations=st.iterations, bound=st.bound, trace=st.trace)
        if theta is not None:
            names = _names_to_terms(st.diff_names)
            final = unname_diffs(theta, names)
            return PairResult("unsat", final, iterations=st.iterations, bound=st.bound,
                              trace=list(st.trace), names=names)
        if not pairs:
            if joint.status == "unknown":
                return PairResult("unknown", iterations=st.iterations, bound=st.bound, trace=st.trace)
            raise InterpolationError("jointly unsat but no shared arrays to saturate")
        if theory == "TO" and st.iterations >= st.bound:
            raise InterpolationError(f"loop exceeded its bound {st.bound}")
        if theory == "IDL" and st.n >= budget:
            return PairResult("unknown", iterations=st.iterations, bound=None, trace=st.trace)
        x, y = pairs[st.cursor % len(pairs)]
        st.cursor += 1
        level = 1
        while (x, y, level) in st.diff_names:
            level += 1
        k = fresh.var(INDEX, "k")
        st.diff_names[(x, y, level)] = k
        st.a = add_diff_name(st.a, x, y, level, k)
        st.b = add_diff_name(st.b, x, y, level, k)
        st.trace.append((x, y, level))
        st.iterations += 1
        st.n += 1


# --- formula-level interpolation -----------------------------------------

@dataclass
class Interpolation:
    status: str  # "unsat" (interpolant found) | "sat" | "unknown"
    interpolant: Optional[Formula] = None
    model: Optional[object] = None
    results: List[PairResult] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return max((r.iterations for r in self.results), default=0)


def interpolate(
    a: Sequence[Formula],
    b: Sequence[Formula],
    theory: str = "TO",
    budget: int = 4,
    full_dnf: bool = False,
) -> Interpolation:
    """Interpolant for A and B; "or" across A-disjuncts, "and" across B-disjuncts."""
    fresh = FreshNames()
    a_syms = set().union(*[free_symbols(f) for f in a]) if a else set()
    b_syms = set().union(*[free_symbols(f) for f in b]) if b else set()
    a_pairs = preprocess(list(a), fresh, full_dnf)
    b_pairs = preprocess(list(b), fresh, full_dnf)
    results: List[PairResult] = []
    outer: List[Formula] = []
    unknown = False
    for ap in a_pairs:
        inner: List[Formula] = []
        for bp in b_pairs:
            r = ard_interpolate(
                ap, bp, fresh, theory, budget,
                a_syms | set(ap.symbols()), b_syms | set(bp.symbols()),
                check=list(a) + list(b),
            )
            results.append(r)
            if r.status == "sat":
                return Interpolation("sat", model=r.decision.model, results=results)
            if r.status == "unknown":
                unknown = True
                continue
            inner.append(r.interpolant)
        outer.append(conj(*inner))
    if unknown:
        return Interpolation("unknown", results=results)
    theta = disj(*outer)
    extra = free_symbols(theta) - (a_syms & b_syms)
    if extra:
        raise InterpolationError(f"interpolant mentions non-shared {sorted(t.name for t in extra)}")
    return Interpolation("unsat", theta, results=results)
