"""S-expression problem format: parsing and printing."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

from .kernel import (
    ARRAY,
    ELEM,
    INDEX,
    RESERVED_PREFIX,
    And,
    Formula,
    IllSortedTerm,
    Lit,
    Or,
    Sort,
    Term,
    conj,
    disj,
    intern_term,
    mk_eq,
    mk_le,
    mk_lt,
    mk_var,
    negate,
    subterms,
)

SORT_NAMES = {"Index": INDEX, "Elem": ELEM, "Array": ARRAY}


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0) -> None:
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


@dataclass
class Sym:
    text: str
    line: int
    col: int


@dataclass
class SList:
    items: list
    line: int
    col: int


SExpr = Union[Sym, SList]


def read_sexprs(text: str) -> List[SExpr]:
    stack: List[SList] = [SList([], 1, 1)]
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "(":
            stack.append(SList([], line, col))
            i += 1
            col += 1
            continue
        if c == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].items.append(done)
            i += 1
            col += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        stack[-1].items.append(Sym(text[i:j], line, col))
        col += j - i
        i = j
    if len(stack) != 1:
        top = stack[-1]
        raise ParseError("unbalanced '(' opened here", top.line, top.col)
    return stack[0].items


@dataclass
class Problem:
    declarations: Dict[str, Sort] = field(default_factory=dict)
    assertions: List[Formula] = field(default_factory=list)
    theory: str = "TO"

    def var(self, name: str) -> Term:
        return mk_var(name, self.declarations[name])


class _Reader:
    def __init__(self, problem: Problem) -> None:
        self.p = problem
        self.scopes: List[Dict[str, Term]] = []

    def err(self, msg: str, e: SExpr) -> ParseError:
        return ParseError(msg, e.line, e.col)

    def term(self, e: SExpr) -> Term:
        if isinstance(e, Sym):
            for scope in reversed(self.scopes):
                if e.text in scope:
                    return scope[e.text]
            if e.text in ("0", "eps", "bot"):
                return intern_term(e.text)
            if e.text in self.p.declarations:
                return mk_var(e.text, self.p.declarations[e.text])
            raise self.err(f"undeclared symbol {e.text!r}", e)
        if not e.items or not isinstance(e.items[0], Sym):
            raise self.err("malformed term", e)
        head = e.items[0].text
        if head == "let":
            return self._let(e, self.term)
        if head in ("S", "P") and self.p.theory != "IDL":
            raise self.err(f"{head} requires (set-index-theory IDL)", e)
        args = [self.term(a) for a in e.items[1:]]
        try:
            return intern_term(head, args)
        except IllSortedTerm as exc:
            raise self.err(str(exc), e) from None

    def _let(self, e: SList, body_fn):
        if len(e.items) != 3 or not isinstance(e.items[1], SList):
            raise self.err("let expects bindings and a body", e)
        scope: Dict[str, Term] = {}
        for b in e.items[1].items:
            if not isinstance(b, SList) or len(b.items) != 2 or not isinstance(b.items[0], Sym):
                raise self.err("malformed let binding", b)
            scope[b.items[0].text] = self.term(b.items[1])
        self.scopes.append(scope)
        try:
            return body_fn(e.items[2])
        finally:
            self.scopes.pop()

    def formula(self, e: SExpr) -> Formula:
        if isinstance(e, Sym):
            if e.text == "true":
                return And(())
            if e.text == "false":
                return Or(())
            raise self.err(f"expected a formula, got {e.text!r}", e)
        if not e.items or not isinstance(e.items[0], Sym):
            raise self.err("malformed formula", e)
        head = e.items[0].text
        rest = e.items[1:]
        if head == "let":
            return self._let(e, self.formula)
        if head == "and":
            return conj(*[self.formula(a) for a in rest])
        if head == "or":
            return disj(*[self.formula(a) for a in rest])
        if head == "not":
            if len(rest) != 1:
                raise self.err("not expects one argument", e)
            return negate(self.formula(rest[0]))
        if head == "=>":
            if len(rest) != 2:
                raise self.err("=> expects two arguments", e)
            return disj(negate(self.formula(rest[0])), self.formula(rest[1]))
        if head in ("=", "<=", "<"):
            if len(rest) != 2:
                raise self.err(f"{head} expects two arguments", e)
            l, r = self.term(rest[0]), self.term(rest[1])
            try:
                if head == "=":
                    return Lit(mk_eq(l, r))
                return Lit(mk_le(l, r) if head == "<=" else mk_lt(l, r))
            except IllSortedTerm as exc:
                raise self.err(str(exc), e) from None
        raise self.err(f"unknown connective {head!r}", e)


def parse_problem(text: str, theory: Optional[str] = None) -> Problem:
    """Parse declarations and assertions; errors carry line and column."""
    p = Problem()
    if theory:
        p.theory = theory
    rd = _Reader(p)
    for cmd in read_sexprs(text):
        if not isinstance(cmd, SList) or not cmd.items or not isinstance(cmd.items[0], Sym):
            raise ParseError("expected a command", cmd.line, cmd.col)
        head = cmd.items[0].text
        args = cmd.items[1:]
        if head == "set-index-theory":
            if len(args) != 1 or not isinstance(args[0], Sym) or args[0].text not in ("TO", "IDL"):
                raise ParseError("index theory must be TO or IDL", cmd.line, cmd.col)
            p.theory = args[0].text
        elif head == "declare-const":
            if len(args) != 2 or not all(isinstance(a, Sym) for a in args):
                raise ParseError("declare-const expects a name and a sort", cmd.line, cmd.col)
            name, sort = args[0].text, args[1].text
            if name.startswith(RESERVED_PREFIX):
                raise ParseError(f"names starting with {RESERVED_PREFIX!r} are reserved", args[0].line, args[0].col)
            if name in ("0", "eps", "bot", "true", "false") or sort not in SORT_NAMES:
                raise ParseError(f"bad declaration of {name!r}", cmd.line, cmd.col)
            if name in p.declarations and p.declarations[name] is not SORT_NAMES[sort]:
                raise ParseError(f"{name!r} redeclared with another sort", cmd.line, cmd.col)
            p.declarations[name] = SORT_NAMES[sort]
        elif head == "assert":
            if len(args) != 1:
                raise ParseError("assert expects one formula", cmd.line, cmd.col)
            p.assertions.append(rd.formula(args[0]))
        else:
            raise ParseError(f"unknown command {head!r}", cmd.line, cmd.col)
    return p


def parse_formula(text: str, declarations: Dict[str, Sort], theory: str = "IDL") -> Formula:
    p = Problem(dict(declarations), [], theory)
    exprs = read_sexprs(text)
    if len(exprs) != 1:
        raise ParseError("expected exactly one formula")
    return _Reader(p).formula(exprs[0])


# --- printing ------------------------------------------------------------

def print_term(t: Term, names: Optional[Dict[Term, str]] = None) -> str:
    if names and t in names:
        return names[t]
    if t.is_var:
        return t.name
    if not t.args:
        return t.op
    return "(" + " ".join([t.op] + [print_term(a, names) for a in t.args]) + ")"


_REL = {"eq": "=", "le": "<=", "lt": "<"}


def _print_f(f: Formula, names) -> str:
    if isinstance(f, Lit):
        a = f.atom
        l, r = a.lhs, a.rhs
        if a.rel == "eq" and l.is_atomic and not r.is_atomic:
            l, r = r, l  # defined term first: (= (diff a b) i)
        s = f"({_REL[a.rel]} {print_term(l, names)} {print_term(r, names)})"
        return s if f.pos else f"(not {s})"
    if isinstance(f, And):
        if not f.args:
            return "true"
        return "(and " + " ".join(_print_f(g, names) for g in f.args) + ")"
    if not f.args:
        return "false"
    return "(or " + " ".join(_print_f(g, names) for g in f.args) + ")"


def _terms_of(f: Formula):
    if isinstance(f, Lit):
        yield f.atom.lhs
        yield f.atom.rhs
    else:
        for g in f.args:
            yield from _terms_of(g)


def print_formula(f: Formula, share: bool = False) -> str:
    """S-expression text; iterated diffs appear expanded into rd/wr/diff.

    With ``share`` every compound subterm used more than once is bound by a let.
    """
    if not share:
        return _print_f(f, None)
    counts: Counter = Counter()

    def visit(t: Term) -> None:
        if t.args:
            counts[t] += 1
            if counts[t] == 1:
                for a in t.args:
                    visit(a)

    for t in _terms_of(f):
        visit(t)
    shared = [t for t, c in counts.items() if c > 1]
    if not shared:
        return _print_f(f, None)
    shared.sort(key=lambda t: (len(list(subterms(t))), t.key))
    names: Dict[Term, str] = {}
    binds = []
    for n, t in enumerate(shared, 1):
        binds.append(f"(?s{n} {print_term(t, names)})")
        names[t] = f"?s{n}"
    body = _print_f(f, names)
    # nested lets keep every binding in scope of the later ones
    out = body
    for b in reversed(binds):
        out = f"(let ({b}) {out})"
    return out
