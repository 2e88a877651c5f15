import csv
import json

import numpy as np
import pytest

from affectdt.io import (
    FIXTURE_ENV,
    InputError,
    RunConfig,
    data_dir,
    emit_results,
    load_catalog,
    load_tables,
    parse_network_file,
    parse_scenario_file,
    quarter_law_tables,
    read_json,
    resolve_network_config,
    run,
    trajectory_rows,
    write_scenario,
)
from affectdt.network import AgentGroup, Trajectory, simulate_discrete
from affectdt.paradox import run_scenario
from affectdt.qmeasure import verify_suite


def scenario_dict(name):
    return json.loads((data_dir() / "scenarios" / f"{name}.json").read_text())


def test_catalog_round_trip(tmp_path):
    for s in load_catalog():
        path = tmp_path / f"{s.id}.json"
        write_scenario(s, path)
        assert parse_scenario_file(path) == s


def test_bad_probabilities_name_the_lottery(tmp_path):
    d = scenario_dict("disposition")
    d["lotteries"][2]["probs"] = [0.6, 0.5]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    with pytest.raises(InputError, match="L3"):
        parse_scenario_file(path)


def test_missing_ranking(tmp_path):
    d = scenario_dict("disposition")
    d["stages"][0]["attraction"] = {"from": "ranking", "ref": "nope"}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    with pytest.raises(InputError, match="missing ranking 'nope'"):
        parse_scenario_file(path)


def test_json_syntax_error_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "id": "x",\n  "lotteries": [1, 2,,]\n}\n')
    with pytest.raises(InputError) as e:
        read_json(path)
    msg = str(e.value)
    assert f"{path}:3:" in msg and '"lotteries": [1, 2,,]' in msg


def test_network_name_resolution():
    assert resolve_network_config("fig4").name == "fig4.json"
    assert parse_network_file("fig4.json").id == "fig4"
    with pytest.raises(InputError):
        resolve_network_config("fig99")


def test_trajectory_csv(tmp_path):
    tr = simulate_discrete([AgentGroup(0.5, 0.25, 0.1), AgentGroup(0.5, 0.0, 0.1)], 3)
    path = tmp_path / "t.csv"
    emit_results(tr, path, "csv")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "p1", "p2", "q1", "q2", "M1", "M2"]
    assert len(rows) == 5 and rows[1][0] == "0"
    assert float(rows[-1][1]) == tr.p[-1, 0]


def test_empty_trajectory_is_header_only(tmp_path):
    empty = np.zeros((0, 2))
    tr = Trajectory(np.zeros(0), empty, empty, empty, empty, (), "discrete", 1.0, 1.0, 0)
    path = tmp_path / "e.csv"
    emit_results(tr, path, "csv")
    assert path.read_text() == "t,p1,p2,q1,q2,M1,M2\n"
    assert trajectory_rows(tr)[1] == []


def test_paradox_json_summary(tmp_path):
    reports = [run_scenario(s) for s in load_catalog()]
    path = tmp_path / "r.json"
    emit_results(reports, path)
    data = json.loads(path.read_text())
    assert data["scenarios"] == len(reports) == data["passed"]
    assert data["entries"]["passed"] == data["entries"]["total"]
    emit_results(reports, tmp_path / "r.csv", "csv")
    assert (tmp_path / "r.csv").read_text().startswith("scenario,key,predicted,computed")


def test_emit_rejects_unknown(tmp_path):
    with pytest.raises(InputError):
        emit_results(object(), tmp_path / "x.json")
    with pytest.raises(InputError):
        emit_results({"a": 1}, tmp_path / "x.csv", "csv")
    with pytest.raises(InputError):
        emit_results({"a": 1}, tmp_path / "x.txt", "txt")


def test_suite_emission_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    emit_results(verify_suite(7, 10), a)
    emit_results(verify_suite(7, 10), b)
    assert a.read_bytes() == b.read_bytes()


def test_fixture_env_override(tmp_path, monkeypatch):
    (tmp_path / "scenarios").mkdir()
    d = scenario_dict("disposition")
    (tmp_path / "scenarios" / "only.json").write_text(json.dumps(d))
    monkeypatch.setenv(FIXTURE_ENV, str(tmp_path))
    assert data_dir() == tmp_path
    assert [s.id for s in load_catalog()] == ["disposition"]
    monkeypatch.setenv(FIXTURE_ENV, str(tmp_path / "missing"))
    with pytest.raises(InputError):
        load_catalog()


def test_quarter_law_tables_pass():
    checks = quarter_law_tables(load_tables())
    assert checks and all(c.passed for c in checks)
    means = {(c.table, c.column): c.computed for c in checks}
    assert sum(1 for k in means if k[1] in ("q1", "q2")) == 6


def test_run_config_validation():
    with pytest.raises(InputError):
        RunConfig("bogus")
    with pytest.raises(InputError):
        RunConfig("paradox", base=1.0)
    with pytest.raises(InputError):
        RunConfig("network", ("fig1",), h=0.0)
    with pytest.raises(InputError):
        RunConfig("network", ("fig1",), thresholds={"nonsense": 1})
    with pytest.raises(InputError):
        RunConfig("paradox", ("/no/such/file.json",))


def test_run_reports_input_errors(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{")
    assert run(RunConfig("paradox", (str(path),))) == 2
    assert "broken.json:1:2" in capsys.readouterr().err
