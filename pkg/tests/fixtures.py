"""Problem texts shared by the test modules."""
from ardinterp.frontend import parse_formula, parse_problem


def decls(arrays="", indexes="", elems=""):
    out = []
    for names, sort in ((arrays, "Array"), (indexes, "Index"), (elems, "Elem")):
        out += [f"(declare-const {n} {sort})" for n in names.split()]
    return "".join(out)


# Four definitional atoms whose 0-instantiation is tabulated by hand.
EX1_HEADER = decls("a b c1 c2 a1", "i1 i2 i3", "e1 e3")
EX1_A = "(assert (= (diff a c1) i1))(assert (= (diff b c2) i1))(assert (= a (wr a1 i3 e3)))(assert (= a1 (wr b i1 e1)))"
EX1_B = "(assert (< i1 i2))(assert (< i2 i3))(assert (not (= (rd c1 i2) (rd c2 i2))))"

# 0-instantiation instances, as printed in the source table.
EX1_TABLE = [
    "(<= 0 i1)",
    "(=> (= (rd a i1) (rd c1 i1)) (= i1 0))",
    "(=> (= (rd b i1) (rd c2 i1)) (= i1 0))",
    "(=> (< i1 i3) (= (rd a i3) (rd c1 i3)))",
    "(=> (< i1 i3) (= (rd b i3) (rd c2 i3)))",
    "(= (rd a i3) e3)",
    "(= (rd a1 i1) e1)",
    "(=> (not (= i1 i3)) (= (rd a i1) (rd a1 i1)))",
    "(=> (not (= i1 i3)) (= (rd a1 i3) (rd b i3)))",
    "(=> (not (= i3 0)) (= (rd a 0) (rd a1 0)))",
    "(=> (not (= i1 0)) (= (rd a1 0) (rd b 0)))",
]

# x = wr(y,i,e) against two distinct disagreement points of x and y.
JHALA_HEADER = decls("x y", "i j k", "e")
JHALA_A = "(assert (= x (wr y i e)))"
JHALA_B = "(assert (not (= (rd x j) (rd y j))))(assert (not (= (rd x k) (rd y k))))(assert (not (= j k)))"

# Order and congruence micro cases: (header, A, B).
MICRO_HEADER = decls("f", "i1 i3 t c1 c2 z")
MICRO = {
    "path summary": ("(assert (<= i1 t))(assert (<= t i3))", "(assert (< i3 i1))"),
    "strict weakening": ("(assert (< i1 t))(assert (<= t i3))", "(assert (<= i3 i1))"),
    "squeezed equality": ("(assert (<= c1 z))(assert (<= z c2))(assert (<= c2 c1))",
                          "(assert (not (= (rd f c1) (rd f c2))))"),
}

# Copy loop unrolled twice, with the error condition after the second step.
STRCPY_HEADER = decls("a0 b0 a1 b1 a2 b2", "I0 I1 I2 N")
STRCPY_INIT = "(assert (= I0 0))(assert (= (diff a0 eps) (P N)))(assert (= (diff b0 eps) (P N)))(assert (< 0 N))"


def strcpy_step(k, l):
    return (f"(assert (< I{k} N))(assert (= I{l} (S I{k})))(assert (= a{l} a{k}))"
            f"(assert (= b{l} (wr b{k} I{k} (rd a{k} I{k}))))")


STRCPY_ERROR = "(assert (not (= a2 b2)))(assert (= I2 N))"
STRCPY_INVARIANT = "(or (= a2 b2) (and (< (diff a2 b2) N) (<= I2 (diff a2 b2))))"


def assertions(header, body, theory=None):
    return parse_problem(header + body, theory).assertions


def formula(header, text, theory="TO"):
    return parse_formula(text, parse_problem(header).declarations, theory)
