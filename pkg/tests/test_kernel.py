import pytest
from hypothesis import given, settings

from ardinterp.kernel import (
    ARRAY, ELEM, INDEX, FreshNames, IllSortedTerm, chain_terms, conj, diff, eq, flatten,
    free_symbols, intern_term, is_flat, le, literals, lt, match_chain, mk_var, negate, neq, rd,
    simplify_clause, subst, succ, offset_of, wr, zero,
)
from ardinterp.oracle import brute_force_check

from strategies import formulas

a, b = mk_var("a", ARRAY), mk_var("b", ARRAY)
i, j = mk_var("i", INDEX), mk_var("j", INDEX)
e = mk_var("e", ELEM)


def test_terms_are_interned():
    assert rd(a, i) is rd(mk_var("a", ARRAY), mk_var("i", INDEX))
    assert wr(a, i, e) is not wr(b, i, e)


def test_sort_errors():
    with pytest.raises(IllSortedTerm):
        intern_term("rd", (i, a))
    with pytest.raises(IllSortedTerm):
        intern_term("rd", (a,))


def test_successor_cancels_predecessor():
    assert succ(succ(i, -2), 2) is i
    assert offset_of(succ(i, 3)) == (i, 3)
    assert offset_of(succ(i, -1)) == (i, -1)


def test_equality_is_unordered():
    assert eq(a, b) == eq(b, a)
    assert negate(negate(lt(i, j))) == lt(i, j)
    assert negate(le(i, j)) == le(i, j).negate()
    assert not negate(le(i, j)).pos


def test_chain_terms_unfold_overwrites():
    bs, ds = chain_terms(a, b, 2)
    assert ds[0] is diff(a, b)
    assert ds[1] is diff(a, wr(b, diff(a, b), rd(a, diff(a, b))))
    assert match_chain(ds[1]) == (a, b, 2)


def test_simplify_clause():
    assert simplify_clause([eq(i, i), lt(i, j)]) is None
    assert simplify_clause([lt(i, i), lt(i, j)]) == (lt(i, j),)
    assert simplify_clause([lt(i, j), negate(lt(i, j))]) is None


def test_subst_and_symbols():
    f = conj(eq(rd(a, i), e), neq(i, zero()))
    g = subst(f, {i: j})
    assert free_symbols(g) == {a, j, e}


@settings(max_examples=60, deadline=None)
@given(formulas(depth=1, max_lits=2))
def test_flatten_gives_flat_equisatisfiable_literals(f):
    flat, new = flatten([f], FreshNames())
    assert all(is_flat(l) for g in flat for l in literals(g))
    assert all(v.name.startswith("__") for v in new)
    before = brute_force_check([f], max_nodes=50_000)
    after = brute_force_check(flat, max_nodes=50_000)
    if before.sat is not None and after.sat is not None and before.complete and after.complete:
        assert before.sat == after.sat
