from hypothesis import given, settings

from ardinterp.kernel import ELEM, INDEX, ARRAY, eq, le, lt, mk_var, neq, rd, succ, zero
from ardinterp.oracle import brute_force_check
from ardinterp.toeuf import (
    GroundModel, OrderConflict, UnsatCore, check_ground, order_close, propagate_equalities,
    solve_clauses,
)

from strategies import ground_literals

i, j, k = (mk_var(n, INDEX) for n in "ijk")
a, b = mk_var("a", ARRAY), mk_var("b", ARRAY)
e, f = mk_var("e", ELEM), mk_var("f", ELEM)


def ground_value(gm, t):
    if t.sort is INDEX:
        return 0 if t is zero() else gm.index[t]
    return gm.elem[t]


def holds(gm, lit):
    x, y = ground_value(gm, lit.atom.lhs), ground_value(gm, lit.atom.rhs)
    v = {"eq": x == y, "le": x <= y if isinstance(x, int) else None, "lt": x < y if isinstance(x, int) else None}[lit.atom.rel]
    return v == lit.pos


def test_negative_cycle_is_reported_with_its_edges():
    st = order_close([lt(i, j), le(j, k), lt(k, i)])
    assert not st.consistent
    assert isinstance(st.conflict, OrderConflict)
    assert {ed.lit for ed in st.conflict.cycle} == {lt(i, j), le(j, k), lt(k, i)}


def test_equalities_propagate_from_order():
    st = order_close([le(i, j), le(j, i), le(k, i)])
    pairs = {frozenset(p) for p in propagate_equalities(st)}
    assert frozenset((i, j)) in pairs


def test_congruence_conflict_core_is_minimal():
    lits = [eq(i, j), neq(rd(a, i), rd(a, j)), lt(zero(), k)]
    res = check_ground(lits)
    assert isinstance(res, UnsatCore) and res.minimal
    assert set(res.literals) == {eq(i, j), neq(rd(a, i), rd(a, j))}


def test_index_disequality_splits():
    res = solve_clauses([(neq(i, j),), (le(i, j),), (eq(rd(a, i), e),), (neq(rd(a, j), e),)])
    assert res.sat


def test_idl_successor_is_strictly_greater():
    res = check_ground([le(succ(i, 1), j), le(j, i)], "IDL")
    assert isinstance(res, UnsatCore)


@settings(max_examples=150, deadline=None)
@given(ground_literals())
def test_ground_solver_agrees_with_brute_force(lits):
    res = check_ground(lits)
    oracle = brute_force_check(lits)
    assert oracle.complete
    if isinstance(res, GroundModel):
        assert all(holds(res, l) for l in lits)
        assert oracle.sat
    else:
        assert not oracle.sat
        assert not solve_clauses([(l,) for l in res.literals]).sat
        for drop in range(len(res.literals)):
            rest = res.literals[:drop] + res.literals[drop + 1:]
            assert solve_clauses([(l,) for l in rest]).sat
