from hypothesis import given, settings

import fixtures as fx
from ardinterp.kernel import ARRAY, FreshNames, free_symbols, literals
from ardinterp.oracle import brute_force_check
from ardinterp.preprocess import DiffAtom, WriteAtom, check_pair, preprocess

from strategies import formulas


def test_definitional_atoms_form_first_component():
    a = fx.assertions(fx.EX1_HEADER, fx.EX1_A)
    pairs = preprocess(a, FreshNames())
    assert len(pairs) == 1
    pair = pairs[0]
    assert len(pair.phi1) == 4 and not pair.phi2
    assert sum(isinstance(x, WriteAtom) for x in pair.phi1) == 2
    assert sum(isinstance(x, DiffAtom) for x in pair.phi1) == 2


def test_array_disequality_becomes_diff_fact():
    p = fx.assertions(fx.decls("a b"), "(assert (not (= a b)))")
    pair = preprocess(p, FreshNames())[0]
    check_pair(pair)
    assert pair.diffs and all(d.level == 1 for d in pair.diffs)


@settings(max_examples=60, deadline=None)
@given(formulas(depth=1, max_lits=2))
def test_pairs_satisfy_invariants_and_preserve_satisfiability(f):
    pairs = preprocess([f], FreshNames(), full_dnf=True)
    for pair in pairs:
        check_pair(pair)
        for g in pair.phi2:
            assert all(l.atom.sort is not ARRAY for l in literals(g))
    orig = brute_force_check([f], max_nodes=50_000)
    split = [brute_force_check(list(p.formulas()), max_nodes=50_000) for p in pairs]
    if orig.sat is None or any(r.sat is None for r in split):
        return
    if orig.complete and all(r.complete for r in split):
        assert orig.sat == any(r.sat for r in split)


def test_fresh_names_are_reserved():
    p = fx.assertions(fx.decls("a b", "i"), "(assert (= (rd (wr a i (rd b i)) 0) (rd b (diff a b))))")
    pair = preprocess(p, FreshNames())[0]
    new = set().union(*[free_symbols(f) for f in pair.formulas()]) - set().union(*map(free_symbols, p))
    assert new and all(v.name.startswith("__") for v in new)
