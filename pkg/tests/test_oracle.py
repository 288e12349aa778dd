import pytest
from hypothesis import given, settings

import fixtures as fx
from ardinterp.kernel import (
    ARRAY, ELEM, FALSE, INDEX, bot, conj, diff, eps, eq, le, lt, mk_var, neq, rd, wr, zero,
)
from ardinterp.oracle import (
    FiniteArrayModel, OracleError, brute_force_check, check_axioms, check_interpolant,
    completeness_bounds, eval_term, evaluate, model_from_ground,
)
from ardinterp.solver import decide
from ardinterp.toeuf import GroundModel

from strategies import formulas

a, b = mk_var("a", ARRAY), mk_var("b", ARRAY)
i, j = mk_var("i", INDEX), mk_var("j", INDEX)
e = mk_var("e", ELEM)


def test_diff_is_largest_disagreement():
    m = FiniteArrayModel([0, 1, 2], ["bot", "v"], arrays={a: ((0, "v"),), b: ((0, "v"), (2, "v"))})
    assert eval_term(m, diff(a, b)) == 2
    assert eval_term(m, diff(a, a)) == 0
    assert eval_term(m, diff(eps(), eps())) == 0


def test_write_ignores_negative_index():
    m = FiniteArrayModel([-1, 0], ["bot", "v"], index={i: -1}, elem={e: "v"}, arrays={b: ()})
    assert evaluate(m, eq(wr(b, i, e), b))
    assert evaluate(m, eq(rd(wr(b, i, e), i), bot()))


def test_copy_loop_invariant_on_mid_loop_state():
    h = fx.STRCPY_HEADER
    inv = fx.formula(h, fx.STRCPY_INVARIANT, "IDL")
    a2, b2 = mk_var("a2", ARRAY), mk_var("b2", ARRAY)
    I2, N = mk_var("I2", INDEX), mk_var("N", INDEX)
    # N = 3, one cell copied so far, b still differs at its last cell
    m = FiniteArrayModel([0, 1, 2, 3], ["bot", "v0", "v1", "v2", "w"], index={I2: 1, N: 3},
                         arrays={a2: ((0, "v0"), (1, "v1"), (2, "v2")), b2: ((0, "v0"), (1, "w"), (2, "w"))})
    assert evaluate(m, inv)
    assert eval_term(m, diff(a2, eps())) == eval_term(m, diff(b2, eps())) == 2


@pytest.mark.parametrize("name, fs, sat", [
    ("nonzero diff forces disagreement", [eq(diff(a, b), i), lt(zero(), i), eq(rd(a, i), rd(b, i))], False),
    ("read over write", [eq(a, wr(b, i, e)), le(zero(), i), neq(rd(a, i), e)], False),
    ("two-index witness", [lt(i, j), neq(rd(a, i), rd(a, j))], True),
])
def test_brute_force_examples(name, fs, sat):
    res = brute_force_check(fs)
    assert res.complete and res.sat is sat
    if sat:
        assert all(evaluate(res.model, f) for f in fs)
        assert not check_axioms(res.model)


def test_bounds_below_threshold_warn():
    res = brute_force_check([lt(i, j), neq(rd(a, i), rd(a, j))], max_chain=1, max_elems=2)
    assert res.sat is False and not res.complete and "below" in res.warning


def test_node_budget_reports_undecided():
    fs = [neq(rd(a, i), rd(b, i)), neq(rd(a, j), rd(b, j)), eq(diff(a, b), i)]
    res = brute_force_check(fs, max_nodes=3)
    assert res.sat is None and "budget" in res.warning


def test_model_from_ground_write_example():
    gm = GroundModel(index={i: 0}, elem={e: "w", rd(b, i): "v", rd(a, i): "w"},
                     tables={a: {0: "w"}, b: {0: "v"}})
    m = model_from_ground([eq(a, wr(b, i, e))], gm)
    assert m.chain == [0]
    assert dict(m.arrays[a]) == {0: "w"} and dict(m.arrays[b]) == {0: "v"}
    assert not check_axioms(m)


def test_model_from_ground_empty():
    m = model_from_ground([], GroundModel({}, {}, {}))
    assert m.chain == [0] and not m.arrays
    assert eval_term(m, diff(eps(), eps())) == 0


def test_model_from_ground_surfaces_failures():
    gm = GroundModel(index={i: 0}, elem={e: "w"}, tables={})
    with pytest.raises(OracleError):
        model_from_ground([eq(a, wr(b, i, e))], gm)


def test_false_interpolates_only_unsat_a():
    rep = check_interpolant([lt(i, i)], [eq(i, i)], FALSE)
    assert rep.passed
    rep = check_interpolant([lt(i, j)], [lt(j, i)], FALSE)
    assert not rep.passed and rep.a_implies is False


def test_local_symbol_fails_symbol_check():
    k = mk_var("k", INDEX)
    rep = check_interpolant([lt(i, k), lt(k, j)], [le(j, i)], conj(lt(i, k), lt(k, j)))
    assert rep.symbols_ok is False and rep.bad_symbols == ["k"]
    assert not rep.passed


def test_completeness_bounds_count_terms():
    chain, elems = completeness_bounds([eq(diff(a, b), i), neq(rd(a, i), e)])
    assert chain == 1 + 1 + 1 + 0
    assert elems == 1 + 1 + 1 + 2


@settings(max_examples=80, deadline=None)
@given(formulas(depth=1, names=[a, b], max_lits=2))
def test_decision_models_satisfy_axioms_and_input(f):
    d = decide([f])
    if d.status == "sat":
        assert evaluate(d.model, f)
        assert not check_axioms(d.model)
    res = brute_force_check([f], max_nodes=50_000)
    if res.sat:
        assert evaluate(res.model, f)
        assert not check_axioms(res.model)
    if res.sat is not None and res.complete:
        assert res.sat == (d.status == "sat")


def test_disagreement_witness_needs_an_unnamed_point():
    # sat only with an index beyond 0, though no index variable names it
    fs = [neq(a, b), eq(rd(a, zero()), rd(b, zero()))]
    assert brute_force_check(fs, max_chain=1, max_elems=3).sat is False
    assert brute_force_check(fs).sat is True
    assert decide(fs).status == "sat"
