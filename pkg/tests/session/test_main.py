import json

import pytest

from homascend.main import build_parser, main

DUAL = """\
field Q = rationals
algebra D = quotient Q [x] rels [] trunc 2
module k = residue D
module A = regular D
cmd ext k A 3
cmd decompose A
"""


@pytest.fixture
def session_file(tmp_path):
    path = tmp_path / "dual.hs"
    path.write_text(DUAL, encoding="utf-8")
    return path


def test_run_json(session_file, capsysbinary):
    assert main(["run", str(session_file), "--format", "json"]) == 0
    payload = json.loads(capsysbinary.readouterr().out)
    assert payload["source"] == str(session_file)
    assert [r["result"]["dims"] for r in payload["results"]] == [[1, 0, 0, 0], [2]]


def test_run_text(session_file, capsysbinary):
    assert main(["run", str(session_file), "--seed", "3"]) == 0
    out = capsysbinary.readouterr().out.decode("utf-8")
    assert "seed=3" in out
    assert "[0] ext k A 3  ok" in out


def test_timings_are_opt_in(session_file, capsysbinary):
    main(["run", str(session_file), "--format", "json"])
    plain = json.loads(capsysbinary.readouterr().out)
    assert plain["wall_time"] is None
    main(["run", str(session_file), "--format", "json", "--timings"])
    timed = json.loads(capsysbinary.readouterr().out)
    assert timed["wall_time"] is not None
    assert all(r["wall_time"] is not None for r in timed["results"])


def test_gallery(capsysbinary):
    code = main(["gallery", "2.11", "--param", "n=3", "--param", "L=2", "--format", "json"])
    assert code == 0
    result = json.loads(capsysbinary.readouterr().out)["results"][0]
    assert result["result"]["values"]["ext"] == [1, 0, 0]


def test_gallery_resource_bound(capsysbinary):
    assert main(["gallery", "2.9", "--param", "p=11"]) == 3


def test_bad_param(capsysbinary):
    assert main(["gallery", "2.9", "--param", "p"]) == 2
    assert b"KEY=VALUE" in capsysbinary.readouterr().err


def test_parse_error_location(tmp_path, capsysbinary):
    path = tmp_path / "broken.hs"
    path.write_text("field Q = rationals\nmodule M = regular Q\n", encoding="utf-8")
    assert main(["run", str(path)]) == 2
    assert f"{path}:2:".encode() in capsysbinary.readouterr().err


def test_missing_file(tmp_path, capsysbinary):
    assert main(["run", str(tmp_path / "absent.hs")]) == 2


def test_invalid_threads(session_file, capsysbinary):
    assert main(["run", str(session_file), "--threads", "0"]) == 2


def test_parser_rejects_unknown_item():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["gallery", "3.7"])
