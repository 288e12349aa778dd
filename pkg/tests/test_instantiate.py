import fixtures as fx
from ardinterp.frontend import print_formula
from ardinterp.instantiate import index_terms, instances, instantiate
from ardinterp.kernel import FreshNames, INDEX, mk_var, succ, trivial_value, zero
from ardinterp.preprocess import preprocess
from ardinterp.solver import cnf


def ex1_pair():
    return preprocess(fx.assertions(fx.EX1_HEADER, fx.EX1_A), FreshNames())[0]


def keys(clauses):
    return {frozenset(print_formula(l) for l in c) for c in clauses}


def test_write_frame_instance_present():
    got = keys(c for c, _ in instances(ex1_pair(), 0, "TO"))
    want = keys(cnf(fx.formula(fx.EX1_HEADER, "(=> (not (= i3 0)) (= (rd a 0) (rd a1 0)))")))
    assert want <= got


def test_no_syntactic_tautologies():
    for clause, _ in instances(ex1_pair(), 0, "TO"):
        assert all(trivial_value(l) is None for l in clause)


def test_to_terms_are_variables_and_zero():
    pair = ex1_pair()
    terms = index_terms(pair, 0, "TO")
    assert zero() in terms
    assert all(t.is_var or t is zero() for t in terms)


def test_idl_terms_grow_with_depth():
    pair = ex1_pair()
    i1 = mk_var("i1", INDEX)
    t1 = index_terms(pair, 1, "IDL")
    t2 = index_terms(pair, 2, "IDL")
    assert succ(i1, 1) in t1 and succ(i1, -1) in t1
    assert succ(i1, 2) in t2 and succ(i1, 2) not in t1
    assert set(t1) < set(t2)


def test_instantiate_is_idempotent():
    pair = ex1_pair()
    once = instantiate(pair, 0, "TO")
    twice = instantiate(once, 0, "TO")
    assert len(once.phi2) == len(twice.phi2)
