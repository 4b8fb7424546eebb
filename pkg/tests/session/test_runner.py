import json

import pytest

from homascend.schemas import CommandResult, CommandStatus, Report
from homascend.session.parser import parse_session
from homascend.session.runner import OutputFormat, emit, exit_code, run
from homascend.session.state import SessionConfig

SESSION = """\
field Q = rationals
field K = extend Q by i^2 + 1
algebra R = quotient Q [X, Y] rels [] trunc 2
algebra D = quotient Q [x] rels [] trunc 4
map phi = tensor_extension K R as S
map q = projection D by [x^2] as E
module k = residue R
module N = cyclic S [X + i*Y]
module Dk = residue D
complex X = koszul R
pid P = torsion [1]
pid F = free 1
cmd ext k k 2
cmd flat phi
cmd dagger q
cmd ascend q Dk
cmd homology X
cmd extended phi N
cmd matrix_equiv phi -2
cmd pid_ext P F 1
cmd gallery 2.11 n=2 L=3
"""


def _report(*statuses, complete=True):
    results = [CommandResult(index=i, command="hom M N", status=s) for i, s in enumerate(statuses)]
    return Report(service="homascend", version="test", complete=complete, results=results)


def test_session_results():
    report = run(parse_session(SESSION, source="mixed.hs"))
    assert exit_code(report) == 0
    by_name = {r.command.split()[0]: r.result for r in report.results}
    assert by_name["ext"]["dims"] == [1, 2, 4]
    assert by_name["flat"]["flat"] is True and by_name["flat"]["rank"] == 2
    assert by_name["dagger"]["dagger"] is True
    assert by_name["ascend"]["conditions"]["compatible-structure"] is True
    assert by_name["homology"]["dims"]["0"] == 1
    assert by_name["extended"]["extended"] is False
    assert by_name["extended"]["summand"]["verified"] is True
    assert by_name["matrix_equiv"]["equivalent"] is True
    assert by_name["pid_ext"]["ext"]["exponents"] == [1]
    assert by_name["gallery"]["values"]["ext"] == [1, 0, 0, 0]


def test_results_follow_command_order():
    report = run(parse_session(SESSION))
    assert [r.index for r in report.results] == list(range(9))
    assert [r.line for r in report.results] == list(range(13, 22))


def test_json_is_byte_stable_across_thread_counts():
    one = emit(run(parse_session(SESSION, config=SessionConfig(threads=1))), OutputFormat.JSON)
    again = emit(run(parse_session(SESSION, config=SessionConfig(threads=1))), OutputFormat.JSON)
    pooled = emit(run(parse_session(SESSION, config=SessionConfig(threads=4))), OutputFormat.JSON)
    assert one == again == pooled
    assert one.endswith(b"\n")


def test_json_round_trip():
    data = emit(run(parse_session(SESSION, source="mixed.hs")), OutputFormat.JSON)
    payload = json.loads(data)
    assert payload["schema"] == 1
    assert payload["source"] == "mixed.hs"
    reloaded = Report.model_validate_json(data)
    assert reloaded.model_dump(mode="json", by_alias=True) == payload


def test_provenance_tags():
    report = run(parse_session("pid M = torsion [2]\ncmd pid_ascent M\n"))
    provenance = report.results[0].provenance
    assert provenance["ext-vanishing(1)"].value == "asserted-by-theorem"
    assert provenance["compatible-structure"].value == "computed"
    assert b"asserted-by-theorem" in emit(report, OutputFormat.JSON)


def test_empty_report():
    report = run(parse_session(""))
    assert report.results == [] and report.complete
    assert exit_code(report) == 0
    assert b"(no commands)" in emit(report, OutputFormat.TEXT)
    assert json.loads(emit(report, OutputFormat.JSON))["results"] == []


def test_resource_bound_marks_report_incomplete():
    report = run(parse_session("cmd gallery 2.9 p=4\ncmd gallery 2.10\n"))
    assert [r.status for r in report.results] == [CommandStatus.RESOURCE_LIMIT, CommandStatus.OK]
    assert not report.complete
    assert exit_code(report) == 3
    assert b"report incomplete" in emit(report, OutputFormat.TEXT)


def test_hypothesis_violation_is_a_command_error():
    text = """\
field Q = rationals
field K = extend Q by i^2 + 1
algebra k = field Q
map s = tensor_extension K k as L
module V = regular k
cmd ascend s V
"""
    report = run(parse_session(text))
    assert report.results[0].status == CommandStatus.ERROR
    assert "HypothesisViolation" in report.results[0].error
    assert exit_code(report) == 2


@pytest.mark.parametrize(
    "statuses, complete, code",
    [
        ((CommandStatus.OK, CommandStatus.OK), True, 0),
        ((CommandStatus.OK, CommandStatus.EQUIVALENCE_FAILURE), True, 1),
        ((CommandStatus.ERROR, CommandStatus.EQUIVALENCE_FAILURE), True, 1),
        ((CommandStatus.ERROR,), True, 2),
        ((CommandStatus.RESOURCE_LIMIT, CommandStatus.ERROR), False, 3),
    ],
)
def test_exit_codes(statuses, complete, code):
    assert exit_code(_report(*statuses, complete=complete)) == code


def test_unknown_format():
    with pytest.raises(ValueError):
        emit(_report(), "yaml")


EXTENDED_COMMANDS = """\
field Q = rationals
field K = extend Q by i^2 + 1
algebra R = quotient Q [X, Y] rels [] trunc 2
algebra D = quotient Q [x] rels [] trunc 4
map phi = tensor_extension K R as S
map q = projection D by [x^2] as E
module k = residue R
module Rr = regular R
module kS = residue S
module Er = regular E
complex P = koszul R
complex C = concentrated k
pid T = relations [[x^2, 0], [0, x*(1+x)]] cols 2
pid F = free 1
pid A = torsion [3]
pid B = torsion [2]
cmd annihilator k
cmd socle Rr
cmd filtration Rr
cmd tensor k k
cmd quasi_iso C C [1]
cmd quasi_iso C C [0]
cmd hom_qis P C C [1]
cmd vmax q Er [[1, 0], [0, 1]]
cmd vmax q Er [[0, 0]]
cmd hom_into_vmax q Er Er [[1, 0], [0, 1]]
cmd descend_extension phi kS kS
cmd descend_kernel phi kS kS [[0, 0], [0, 0]]
cmd descend_cokernel phi kS kS [[0, 0], [0, 0]]
cmd pid_classify T
cmd pid_extend F
cmd pid_extension A B 1
cmd pid_vmax F [[1]]
"""


def test_module_complex_descent_and_pid_commands():
    report = run(parse_session(EXTENDED_COMMANDS))
    assert [r.status for r in report.results] == [CommandStatus.OK] * 17
    assert exit_code(report) == 0
    r = [res.result for res in report.results]
    assert r[0]["dim"] == 2 and r[0]["support_is_maximal_ideal"] is True
    assert r[1]["dim"] == 2
    assert r[2] == {"dims": [3, 2, 0], "loewy_length": 2}
    assert r[3]["dim"] == 1 and r[3]["pieces"] == [1]
    assert r[4]["morphism_space_dim"] == 1 and r[4]["quasi_iso"] is True
    assert r[5]["quasi_iso"] is False
    assert r[6]["alpha_qis"] is True and r[6]["hom_P_alpha_qis"] is True
    assert r[7]["dim"] == 2 and r[7]["submodule_dim"] == 2
    assert r[8]["dim"] == 0
    assert r[9]["bijective"] is True and r[9]["vmax_dim"] == 2
    assert r[10]["status"] == "extended" and r[10]["witness"]["dim"] == 2
    assert r[11]["status"] == "extended" and r[11]["details"]["dim"] == 2
    assert r[12]["status"] == "extended" and r[12]["details"]["dim"] == 2
    assert r[13]["module"]["exponents"] == [1, 2]
    assert r[14]["descended"]["free_rank"] == 1
    assert r[15]["middle"]["exponents"] == [1, 4]
    assert r[15]["formula"]["exponents"] == [1, 4]
    assert r[16]["vmax"] == {"free_rank": 0, "exponents": [], "side": "over-S"}


def test_descent_of_a_module_that_is_not_extended():
    text = """\
field Q = rationals
field K = extend Q by i^2 + 1
algebra R = quotient Q [X, Y] rels [] trunc 2
map phi = tensor_extension K R as S
module N = cyclic S [X + i*Y]
module kS = residue S
cmd descend_kernel phi N kS [[0, 0, 0, 0], [0, 0, 0, 0]]
"""
    report = run(parse_session(text))
    assert report.results[0].status == CommandStatus.ERROR
    assert "HypothesisViolation" in report.results[0].error
