import fixtures as fx
from ardinterp.cli import main


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out.splitlines()


def test_sat_mode_unsat(tmp_path, capsys):
    f = write(tmp_path, "p.smt", "(declare-const i Index)(assert (< i i))")
    code, out = run(capsys, ["sat", f])
    assert code == 0 and out[0] == "unsat"


def test_sat_mode_prints_model_without_internal_names(tmp_path, capsys):
    f = write(tmp_path, "p.smt", fx.decls("x y", "j") + "(assert (not (= (rd (wr x j (rd y j)) 0) (rd y 0))))")
    code, out = run(capsys, ["sat", f, "--check"])
    assert code == 0 and out[0] == "sat"
    assert out[1].startswith("(model")
    assert not any("__" in line for line in out)
    assert "DISAGREES" not in "\n".join(out)


def test_interpolate_a_unsat_prints_false(tmp_path, capsys):
    h = fx.decls("", "i j")
    a = write(tmp_path, "a.smt", h + "(assert (< i i))")
    b = write(tmp_path, "b.smt", h + "(assert (< i j))")
    code, out = run(capsys, ["interpolate", a, b])
    assert code == 0 and out[:2] == ["unsat", "false"]


def test_interpolate_then_check_round_trip(tmp_path, capsys):
    a = write(tmp_path, "a.smt", fx.JHALA_HEADER + fx.JHALA_A)
    b = write(tmp_path, "b.smt", fx.JHALA_HEADER + fx.JHALA_B)
    code, out = run(capsys, ["interpolate", a, b, "--share"])
    assert code == 0 and out[0] == "unsat"
    theta = write(tmp_path, "t.smt", fx.JHALA_HEADER + f"(assert {out[1]})")
    code, out = run(capsys, ["check", a, b, theta])
    assert code == 0 and out[0] == "pass"
    assert all(line.endswith("pass") for line in out[1:6])


def test_parse_failure_exits_nonzero(tmp_path, capsys):
    f = write(tmp_path, "p.smt", "(assert (= a b))")
    assert main(["sat", f]) != 0
    assert main(["sat", str(tmp_path / "missing.smt")]) != 0


def test_budget_exhaustion_prints_unknown(tmp_path, capsys, monkeypatch):
    import ardinterp.cli as cli
    from ardinterp.solver import Decision

    monkeypatch.setattr(cli, "decide", lambda *args, **kw: Decision("unknown", depth=3))
    f = write(tmp_path, "p.smt", "(set-index-theory IDL)(declare-const i Index)(assert (< i (S i)))")
    code, out = run(capsys, ["sat", f])
    assert code != 0 and out == ["unknown", "; instantiation budget exhausted at N=3"]


def test_idl_successor_problem(tmp_path, capsys):
    text = "(set-index-theory IDL)" + fx.decls("a b", "i") + \
        "(assert (= (diff a eps) (S (S i))))(assert (= (diff b eps) i))(assert (= a (wr b (S i) (rd a i))))"
    code, out = run(capsys, ["sat", write(tmp_path, "p.smt", text)])
    assert code == 0 and out[0] == "unsat"
