import pytest
from hypothesis import given, settings

from ardinterp.frontend import ParseError, parse_formula, parse_problem, print_formula
from ardinterp.kernel import ARRAY, ELEM, INDEX, And, chain_terms, conj, diff, eq, mk_var, rd, zero

from strategies import formulas

DECLS = {"a": ARRAY, "b": ARRAY, "c": ARRAY, "i": INDEX, "j": INDEX, "k": INDEX, "e": ELEM, "f": ELEM}


def test_parse_one_assertion():
    p = parse_problem("(declare-const a Array)(declare-const i Index)(assert (= (rd a i) bot))")
    assert len(p.assertions) == 1


@pytest.mark.parametrize("text, message", [
    ("(assert (= a b))", "undeclared"),
    ("(declare-const a Array)(assert (= (rd a) bot))", "expects 2"),
    ("(declare-const a Array)(declare-const i Index)(assert (= a i))", "between array and index"),
    ("(declare-const __x Index)", "reserved"),
    ("(assert (= 0 0)", "unbalanced"),
])
def test_parse_errors(text, message):
    with pytest.raises(ParseError) as exc:
        parse_problem(text)
    assert message in str(exc.value).lower()


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as exc:
        parse_problem("(declare-const a Array)\n(assert (= a b))")
    assert str(exc.value).startswith("2:")


def test_print_examples():
    a, b = mk_var("a", ARRAY), mk_var("b", ARRAY)
    f = conj(eq(diff(a, b), zero()), eq(rd(a, zero()), rd(b, zero())))
    assert print_formula(f) == "(and (= (diff a b) 0) (= (rd a 0) (rd b 0)))"
    assert print_formula(And(())) == "true"
    assert print_formula(eq(chain_terms(a, b, 2)[1][-1], zero())) == \
        "(= (diff a (wr b (diff a b) (rd a (diff a b)))) 0)"


def test_theory_directive_and_successor():
    p = parse_problem("(set-index-theory IDL)(declare-const i Index)(assert (< i (S i)))")
    assert p.theory == "IDL"


@settings(max_examples=200, deadline=None)
@given(formulas(depth=2))
def test_print_parse_round_trip(f):
    for share in (False, True):
        assert parse_formula(print_formula(f, share=share), DECLS) == f
