import json

import pytest

from app.core.errors import InconsistencyError
from app.main import main
from conftest import CORPUS


def corpus(name: str) -> str:
    return str(CORPUS / f"{name}.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_kh(capsys):
    code, report = run(capsys, "kh", corpus("hopf2"), "--field", "2")
    assert code == 0
    assert report["verdict"] == "n/a"
    assert report["result"]["total_dim"] == 4
    assert report["result"]["blocks"][0] == {"i": 0, "q": 0, "k": None, "dim": 1}
    assert report["command"] == ["kh", corpus("hopf2"), "--field", "2"]


def test_digest_is_stable_and_parameter_sensitive(capsys):
    _, first = run(capsys, "kh", corpus("hopf2"))
    _, again = run(capsys, "--threads", "1", "kh", corpus("hopf2"))
    _, other = run(capsys, "kh", corpus("hopf2"), "--field", "3")
    assert first["digest"] == again["digest"]
    assert first["digest"] != other["digest"]


def test_akh(capsys):
    code, report = run(capsys, "akh", corpus("hopf-quotient"))
    assert code == 0
    assert {(b["i"], b["q"], b["k"]) for b in report["result"]["blocks"]} == {
        (0, 3, 2), (1, 3, 0), (0, 1, 0), (0, -1, -2),
    }


def test_ekh(capsys):
    code, report = run(capsys, "ekh", corpus("hopf2"), "--p", "2", "--r", "3")
    assert code == 0
    assert report["result"]["total_dim"] == 4
    assert [space["s"] for space in report["result"]["spaces"]] == [0, 1]


def test_borel(capsys):
    code, report = run(capsys, "borel", corpus("hopf2"), "--p", "2", "--max-degree", "12", "--annular")
    assert code == 0
    assert report["verdict"] == "pass"
    assert report["result"]["stable_rank"] == 4


@pytest.mark.parametrize("argv", [
    ("verify", "permutohedra", "--max-r", "3"),
    ("verify", corpus("hopf2"), "counting", "--max-index", "2"),
    ("verify", corpus("hopf2"), "smith"),
    ("verify", corpus("trefoil-3periodic"), "fixed-gens"),
])
def test_verify(capsys, argv):
    code, report = run(capsys, *argv)
    assert (code, report["verdict"]) == (0, "pass")


def test_periodicity_from_polynomial_and_from_diagram(capsys):
    code, report = run(capsys, "periodicity", corpus("trefoil-khp"), "--p", "3", "--s", "2")
    assert (code, report["verdict"], report["result"]["count"]) == (0, "pass", 1)
    code, report = run(capsys, "periodicity", corpus("trefoil-3periodic"), "--p", "3", "--s", "2")
    assert (code, report["verdict"]) == (0, "pass")


def test_periodicity_failure_exit_code(capsys):
    code, report = run(capsys, "periodicity", corpus("anchorless-khp"), "--p", "3", "--s", "2")
    assert (code, report["verdict"]) == (1, "fail")


def test_periodicity_node_cap_is_inconclusive(capsys, monkeypatch):
    monkeypatch.setenv("PERKH_SEARCH_NODE_CAP", "1")
    code, report = run(capsys, "periodicity", corpus("trefoil-khp"), "--p", "3", "--s", "2")
    assert (code, report["verdict"]) == (2, "inconclusive")


def test_permutohedron(capsys):
    code, report = run(capsys, "permutohedron", "--S", "1,2,3", "--partition", "1,3|2", "--equal", "1,3")
    result = report["result"]
    assert code == 0
    assert result["vertices"] == 6
    assert result["face"]["dim"] == 1
    assert result["intersection"]["reduced_S"] == [1, 2]
    assert result["intersection"]["faces"] == [
        {"partition": "({1,3},{2})", "image": "({1},{2})", "point": ["3/2", "3", "3/2"]},
    ]


def test_lift_then_quotient(capsys, tmp_path):
    code, report = run(capsys, "lift", corpus("hopf-quotient"), "--p", "2")
    assert code == 0
    assert [c["edges"] for c in report["result"]["crossings"]] == [[2, 1, 3, 4], [1, 2, 4, 3]]
    lifted = tmp_path / "lifted.json"
    lifted.write_text(json.dumps(report["result"]))
    code, report = run(capsys, "quotient", str(lifted))
    assert code == 0
    assert [c["edges"] for c in report["result"]["crossings"]] == [[1, 1, 3, 3]]


def test_pretty_output(capsys):
    code = main(["--pretty", "kh", corpus("hopf2")])
    out = capsys.readouterr().out
    assert code == 0
    assert "verdict: n/a" in out
    assert "blocks:" in out


@pytest.mark.parametrize("argv", [
    ("kh", "does-not-exist.json"),
    ("kh", corpus("hopf2"), "--field", "4"),
    ("verify", "smith"),
    ("ekh", corpus("hopf2"), "--p", "2", "--r", "2"),
    ("permutohedron", "--S", "3,2,1"),
])
def test_input_errors_exit_with_three(capsys, argv):
    code, report = run(capsys, *argv)
    assert code == 3
    assert report["verdict"] == "n/a"
    assert "error" in report["result"]


def test_inconsistency_is_reported_as_failure(capsys, monkeypatch):
    def broken(*args, **kwargs):
        raise InconsistencyError("d^2 != 0 in block q=0")

    monkeypatch.setattr("app.runner.homology", broken)
    code, report = run(capsys, "kh", corpus("hopf2"))
    assert (code, report["verdict"]) == (1, "fail")
    assert report["result"]["kind"] == "InconsistencyError"
