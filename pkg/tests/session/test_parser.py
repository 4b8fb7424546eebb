import pytest

from homascend.core.errors import SessionParseError
from homascend.session.parser import parse_session, split_list, tokenize
from homascend.session.state import DeclKind, SessionConfig, counts

GAUSSIAN = """\
# (X, Y)^2 over Q and its Gaussian extension
field Q = rationals
field K = extend Q by i^2 + 1
algebra R = quotient Q [X, Y] rels [] trunc 2
map phi = tensor_extension K R as S
module N = cyclic S [X + i*Y]
cmd extended phi N
cmd matrix_equiv phi i
"""


def test_gaussian_session():
    session = parse_session(GAUSSIAN, source="gaussian.hs")
    assert counts(session) == {"field": 2, "algebra": 2, "map": 1, "module": 1}
    assert [c.name for c in session["commands"]] == ["extended", "matrix_equiv"]
    S = session["declarations"]["S"]
    assert S.kind == DeclKind.ALGEBRA
    assert S.value.dim == 6
    assert session["declarations"]["N"].value.dim == 4
    assert session["declarations"]["phi"].extra["scalars"].degree == 2


def test_empty_document():
    session = parse_session("\n# nothing here\n\n")
    assert session["declarations"] == {}
    assert session["commands"] == []


def test_map_violating_the_unit_law_is_rejected():
    text = "field Q = rationals\nalgebra D = quotient Q [x] rels [] trunc 2\nmap bad = matrix D -> D [[0, 0], [0, 0]]\n"
    with pytest.raises(SessionParseError) as err:
        parse_session(text)
    assert err.value.line == 3


def test_syntax_error_position():
    text = "field Q = rationals\nalgebra R = quotient Q [X, Y] relz [] trunc 2\n"
    with pytest.raises(SessionParseError) as err:
        parse_session(text)
    assert (err.value.line, err.value.column) == (2, 31)
    assert "rels" in err.value.reason


def test_unknown_line():
    with pytest.raises(SessionParseError) as err:
        parse_session("field Q = rationals\n  frobnicate Q\n")
    assert (err.value.line, err.value.column) == (2, 3)


def test_duplicate_identifier():
    with pytest.raises(SessionParseError) as err:
        parse_session("field Q = rationals\nfield Q = prime 3\n")
    assert err.value.line == 2
    assert "already declared" in err.value.reason


def test_wrong_kind_and_undeclared_references():
    base = "field Q = rationals\nalgebra A = quotient Q [x] rels [] trunc 3\n"
    with pytest.raises(SessionParseError):
        parse_session(base + "module M = regular Q\n")
    with pytest.raises(SessionParseError):
        parse_session(base + "cmd hom M M\n")
    with pytest.raises(SessionParseError):
        parse_session(base + "module M = regular A\ncmd hom M\n")


def test_reducible_extension_is_rejected():
    with pytest.raises(SessionParseError) as err:
        parse_session("field Q = rationals\nfield L = extend Q by t^2 - 1\n")
    assert err.value.line == 2


def test_module_and_complex_forms():
    text = """\
field F = prime 3
algebra A = quotient F [x, y] rels [x*y] trunc 3
algebra B = quotient_of A by [y]
map p = projection A by [y] as C
module M = present A cols 2 rels [[x, y]]
module K = residue A
module T = sum M K
module U = actions A dim 1 [[[0]], [[0]]]
module V = restrict p C_reg
complex X = koszul A
complex Y = resolution K 2
complex Z = concentrated K -1
pid P = free 1 torsion [2, 3]
"""
    with pytest.raises(SessionParseError):
        parse_session(text)
    fixed = text.replace("module V = restrict p C_reg\n", "module W = regular C\nmodule V = restrict p W\n")
    session = parse_session(fixed)
    decls = session["declarations"]
    assert decls["B"].value.dim == 3
    assert decls["C"].value.dim == 3
    assert decls["T"].value.dim == decls["M"].value.dim + 1
    assert decls["U"].value.dim == 1
    assert decls["V"].value.dim == 3
    assert decls["X"].value.degrees() == range(0, 3)
    assert decls["Z"].value.lo == -1
    assert decls["P"].value.invariants == (1, (2, 3))


def test_config_lines_and_overrides():
    text = "config ext_range = 3\nconfig seed = 7\n"
    assert parse_session(text)["config"].ext_range == 3
    merged = parse_session(text, config=SessionConfig(ext_range=2))["config"]
    assert (merged.ext_range, merged.seed) == (2, 7)
    with pytest.raises(SessionParseError):
        parse_session("config ext_range = 99\n")
    with pytest.raises(SessionParseError):
        parse_session("config colour = blue\n")


def test_command_options_are_checked():
    with pytest.raises(SessionParseError):
        parse_session("cmd gallery 2.9 q=3\n")
    session = parse_session("cmd gallery 2.9 p=3 N=2\n")
    assert session["commands"][0].options == (("p", "3"), ("N", "2"))


def test_tokenize_keeps_brackets_together():
    tokens = tokenize("cyclic A [x + y, x^2]  [[1, 0]]")
    assert [t.text for t in tokens] == ["cyclic", "A", "[x + y, x^2]", "[[1, 0]]"]
    assert [t.column for t in tokens] == [1, 8, 10, 24]
    with pytest.raises(SessionParseError):
        tokenize("[x")


def test_split_list():
    assert split_list("[]") == []
    assert split_list("[a, [b, c], d]") == ["a", "[b, c]", "d"]


def test_pid_relations_form():
    session = parse_session("pid P = relations [[x^2, 0], [0, x*(1+x)]] cols 2\npid F = relations [[x, 0]] cols 2\n")
    decls = session["declarations"]
    assert decls["P"].value.invariants == (0, (1, 2))
    assert decls["P"].extra["presentation"].generators == 2
    assert decls["F"].value.invariants == (1, (1,))
    with pytest.raises(SessionParseError) as err:
        parse_session("pid P = relations [[x, 0], [1]] cols 2\n")
    assert err.value.line == 1


def test_list_arguments_of_new_commands():
    text = """\
field Q = rationals
algebra D = quotient Q [x] rels [] trunc 4
map q = projection D by [x^2] as E
module Er = regular E
pid A = torsion [3]
pid B = torsion [2]
cmd vmax q Er [[1, 0], [0, 1]]
cmd pid_extension A B [[1]]
"""
    commands = parse_session(text)["commands"]
    assert commands[0].args == ("q", "Er", "[[1, 0], [0, 1]]")
    assert commands[1].args == ("A", "B", "[[1]]")
    with pytest.raises(SessionParseError):
        parse_session(text + "cmd vmax q Er\n")
