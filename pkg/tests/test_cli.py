import csv
import json
import subprocess
import sys

import pytest

from lefschetz_lab.cli import load_schema, main, validate_report


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def strip_timings(doc):
    for s in doc["scenarios"]:
        s.pop("timings")
    return doc


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert "disk-reflection c=0.5" in out and "annulus-swap c=0.5" in out
    assert len(out.splitlines()) >= 8


def test_run_disk_reflection(tmp_path, capsys):
    report, table = tmp_path / "r.json", tmp_path / "s.csv"
    code = main(["run", "--scenario", "disk-reflection", "--routes", "simplicial",
                 "--report", str(report), "--csv", str(table)])
    assert code == 0
    doc = json.loads(report.read_text())
    validate_report(doc)
    assert doc["verdict"] == "pass"
    assert all(i["residual"] == 0.0 for i in doc["scenarios"][0]["identities"])
    rows = read_csv(table)
    assert rows and all(r["verdict"] == "pass" for r in rows)
    assert "pass" in capsys.readouterr().out


@pytest.mark.slow
def test_run_heat_route(tmp_path):
    report = tmp_path / "r.json"
    code = main(["run", "--scenario", "disk-reflection", "--routes", "heat",
                 "--t-grid", "0.2,0.1,0.05,0.025", "--report", str(report)])
    assert code == 0
    ids = json.loads(report.read_text())["scenarios"][0]["identities"]
    heat = [i for i in ids if i["name"].startswith("heat")]
    assert heat and all(i["residual"] <= 1e-3 for i in heat)


def test_missing_config_exits_2(capsys):
    assert main(["run", "--config", "missing.cfg"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_config_errors_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("[scenario x]\nmodel = disk\nc = 1\nB = refl\n")
    assert main(["run", "--config", str(p)]) == 2
    assert "c = 1" in capsys.readouterr().err


def test_usage_errors_exit_2():
    assert main(["run"]) == 2
    assert main(["run", "--scenario", "nope"]) == 2
    assert main(["run", "--scenario", "disk-reflection", "--routes", "magic"]) == 2
    assert main(["run", "--scenario", "disk-reflection", "--t-grid", "a,b"]) == 2
    assert main(["heat-diagnostics", "--bc", "Pnowhere"]) == 2


def test_verification_failure_exits_1(tmp_path):
    p = tmp_path / "suite.cfg"
    p.write_text("[scenario interval-identity]\nroutes = simplicial\n")
    assert main(["run", "--config", str(p)]) == 0
    # an extrapolated heat limit cannot meet a 1e-300 tolerance
    p.write_text("[scenario interval-identity]\nroutes = heat\nheat_tolerance = 1e-300\n")
    assert main(["run", "--config", str(p)]) == 1


def test_config_run_writes_configured_outputs(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "suite.cfg").write_text(
        "[suite]\nroutes = simplicial\nreport = rep.json\ncsv = sum.csv\n\n"
        "[scenario interval-swap]\n\n[scenario annulus-swap]\n")
    assert main(["run", "--config", "suite.cfg"]) == 0
    doc = json.loads((tmp_path / "rep.json").read_text())
    assert [s["scenario"] for s in doc["scenarios"]] == ["interval-swap c=0.5", "annulus-swap c=0.5"]
    assert (tmp_path / "sum.csv").exists()


def test_empty_config_succeeds(tmp_path):
    p = tmp_path / "empty.cfg"
    p.write_text("[suite]\nroutes = simplicial\n")
    out = tmp_path / "r.json"
    assert main(["run", "--config", str(p), "--report", str(out)]) == 0
    assert json.loads(out.read_text())["scenarios"] == []


def test_reports_are_deterministic(tmp_path):
    docs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert main(["run", "--scenario", "annulus-swap", "--scenario", "interval-identity",
                     "--report", str(out)]) == 0
        docs.append(strip_timings(json.loads(out.read_text())))
    assert json.dumps(docs[0], sort_keys=True) == json.dumps(docs[1], sort_keys=True)


def test_jobs_from_environment(tmp_path, monkeypatch):
    out = tmp_path / "r.json"
    monkeypatch.setenv("LEFSCHETZ_LAB_JOBS", "2")
    assert main(["run", "--scenario", "interval-swap", "--scenario", "interval-identity",
                 "--routes", "simplicial", "--report", str(out)]) == 0
    assert [s["scenario"] for s in json.loads(out.read_text())["scenarios"]] == \
        ["interval-swap c=0.5", "interval-identity c=0.5"]
    monkeypatch.setenv("LEFSCHETZ_LAB_JOBS", "many")
    assert main(["run", "--scenario", "interval-swap", "--routes", "simplicial"]) == 2


def test_heat_diagnostics_gaussian_factor(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["heat-diagnostics", "--model", "disk", "--c", "3", "--bc", "PminusL0",
                 "--t-grid", "0.2,0.1", "--collar", "0.15", "--csv", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 2
    assert all(float(r["tangential_dirichlet"]) == 0.125 for r in rows)
    assert all(float(r["difference"]) < 1e-5 for r in rows)


def test_heat_diagnostics_parametrix(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["heat-diagnostics", "--parametrix", "--t-grid", "0.5,0.25,0.125,0.0625",
                 "--csv", str(out)]) == 0
    err = [float(r["error"]) for r in read_csv(out)]
    assert len(err) == 4 and all(a > b for a, b in zip(err, err[1:]))


def test_schema_rejects_malformed_report():
    import jsonschema
    assert load_schema()["type"] == "object"
    with pytest.raises(jsonschema.ValidationError):
        validate_report({"tool": "lefschetz-lab"})


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "lefschetz_lab", "list-scenarios"], capture_output=True, text=True)
    assert res.returncode == 0 and "disk-reflection c=0.5" in res.stdout
