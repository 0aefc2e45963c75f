"""End-to-end tests for the command-line runner and reporter."""

import json
import os

import pytest

from shrinktargets.cli import main


def _write_config(path, theorem, params):
    with open(path, "w") as fh:
        json.dump({"theorem": theorem, "params": params}, fh)
    return str(path)


def test_run_writes_record_and_csv(tmp_path, capsys):
    cfg = _write_config(tmp_path / "cfg.json", "lln",
                        {"N": 2000, "seeds": 2, "tol": 0.5})
    rc = main(["--out", str(tmp_path / "runs"), "run", cfg])
    assert rc == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out
    run_dirs = os.listdir(tmp_path / "runs")
    assert len(run_dirs) == 1
    d = tmp_path / "runs" / run_dirs[0]
    record = json.loads((d / "record.json").read_text())
    assert record["theorem"] == "lln"
    assert record["assertions"][0]["passed"]
    assert (d / "traces.csv").exists()
    header = (d / "traces.csv").read_text().splitlines()[0]
    assert header == "scheme,seed,x_id,N,re,im,reference_re,reference_im"


def test_rerun_is_byte_identical(tmp_path):
    cfg = _write_config(tmp_path / "cfg.json", "lln",
                        {"N": 1000, "seeds": 2, "tol": 0.5})
    main(["--out", str(tmp_path / "r1"), "run", cfg])
    main(["--out", str(tmp_path / "r2"), "run", cfg])
    d1 = next((tmp_path / "r1").iterdir())
    d2 = next((tmp_path / "r2").iterdir())
    assert d1.name == d2.name
    assert (d1 / "traces.csv").read_bytes() == (d2 / "traces.csv").read_bytes()
    rec1 = json.loads((d1 / "record.json").read_text())
    rec2 = json.loads((d2 / "record.json").read_text())
    rec1.pop("wall_time_s"), rec2.pop("wall_time_s")
    assert rec1 == rec2


def test_seed_flag_changes_run_id(tmp_path):
    cfg = _write_config(tmp_path / "cfg.json", "lln",
                        {"N": 1000, "seeds": 2, "tol": 0.5})
    main(["--out", str(tmp_path / "runs"), "run", cfg])
    main(["--out", str(tmp_path / "runs"), "--seed", "7", "run", cfg])
    assert len(os.listdir(tmp_path / "runs")) == 2


def test_invalid_config_exit_code(tmp_path, capsys):
    cfg = _write_config(tmp_path / "cfg.json", "C", {"a": "1/2"})
    rc = main(["--out", str(tmp_path / "runs"), "run", cfg])
    assert rc == 2
    assert "config invalid" in capsys.readouterr().err


def test_failing_assertion_exit_code(tmp_path, capsys):
    # an impossible tolerance makes the preset's assertion fail
    cfg = _write_config(tmp_path / "cfg.json", "lln",
                        {"N": 1000, "seeds": 2, "tol": 0.0})
    rc = main(["--out", str(tmp_path / "runs"), "run", cfg])
    assert rc == 1
    assert "[FAIL]" in capsys.readouterr().out


def test_env_var_output_root(tmp_path, monkeypatch):
    cfg = _write_config(tmp_path / "cfg.json", "lln",
                        {"N": 1000, "seeds": 1, "tol": 0.5})
    monkeypatch.setenv("SHRINKTARGETS_OUT", str(tmp_path / "envruns"))
    main(["run", cfg])
    assert (tmp_path / "envruns").is_dir()
    assert len(os.listdir(tmp_path / "envruns")) == 1


def test_report_summary_and_figures(tmp_path, capsys):
    cfg1 = _write_config(tmp_path / "c1.json", "lln",
                         {"N": 1000, "seeds": 2, "tol": 0.5})
    cfg2 = _write_config(tmp_path / "c2.json", "concentration",
                         {"N_grid": [256, 512], "trials": 5,
                          "m_list": [1], "seeds": 1})
    runs = str(tmp_path / "runs")
    main(["--out", runs, "run", cfg1])
    main(["--out", runs, "run", cfg2])
    rep = str(tmp_path / "report")
    rc = main(["--out", rep, "report", runs])
    assert rc == 0
    out = capsys.readouterr().out
    assert "summary.csv" in out
    summary = json.loads((tmp_path / "report" / "summary.json").read_text())
    assert len(summary["records"]) == 2
    assert summary["warning"] == ""
    pngs = [f for f in os.listdir(rep) if f.endswith(".png")]
    assert len(pngs) == 2   # one traces figure, one quantiles figure
    lines = (tmp_path / "report" / "summary.csv").read_text().splitlines()
    assert lines[0] == "theorem,config_hash,run_id,assertion,status,detail"
    assert len(lines) > 2


def test_report_no_records(tmp_path, capsys):
    rc = main(["--out", str(tmp_path / "rep"), "report", str(tmp_path)])
    assert rc == 1
    assert "no run records" in capsys.readouterr().err
