import csv
import json

import jsonschema
import pytest

from canonfield.cli import OUT_ENV, main
from canonfield.catalog import catalog
from canonfield.report import RunConfig, analyze, load_schema


def _run(tmp_path, *args):
    out = tmp_path / "out"
    code = main(["analyze", *args, "--out", str(out)])
    return code, out


def test_conformal_entry_exits_zero(tmp_path):
    code, out = _run(tmp_path, "catalog:sphere")
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, load_schema())


@pytest.mark.parametrize("name", ["cylinder", "sphere_offcenter", "graph4", "helix", "subspace"])
def test_reports_validate_against_schema(tmp_path, name):
    params = ["--param", "c=1"] if name == "plane_offset" else []
    code, out = _run(tmp_path, f"catalog:{name}", *params)
    assert code == 0
    jsonschema.validate(json.loads((out / "report.json").read_text()), load_schema())


def test_failures_exit_one_and_still_write(tmp_path):
    code, out = _run(tmp_path, "catalog:sphere", "--tol", "1e-30")
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    failed = [c for s in report["suites"].values() for c in s["checks"]
              if c["asserted"] and c["status"] == "fail"]
    assert failed


def test_bad_input_exits_two(tmp_path, capsys):
    spec = tmp_path / "bad.imm"
    spec.write_text("dim 2 -> 3;\nx1 = (u1;")
    code, _ = _run(tmp_path, str(spec))
    assert code == 2
    assert "line 2" in capsys.readouterr().err
    assert _run(tmp_path, "catalog:plane_offset")[0] == 2
    assert _run(tmp_path, "catalog:nothing")[0] == 2
    assert _run(tmp_path, str(tmp_path / "missing.imm"))[0] == 2
    assert main(["analyze", "catalog:sphere", "--suite", "bogus"]) == 2
    assert main([]) == 2


def test_spec_file_with_param(tmp_path):
    spec = tmp_path / "circle.imm"
    spec.write_text("dim 1 -> 2; param r = 1; x1 = r*cos(u1); x2 = r*sin(u1)")
    code, out = _run(tmp_path, str(spec), "--param", "r=3", "--suite", "conformal")
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["spec"]["params"] == {"r": 3.0}
    assert list(report["suites"]) == ["conformal"]


def test_determinism(tmp_path):
    a = main(["analyze", "catalog:helix", "--out", str(tmp_path / "a"), "--format", "both"])
    b = main(["analyze", "catalog:helix", "--out", str(tmp_path / "b"), "--format", "both"])
    assert a == b == 0
    for name in ("report.json", "report.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_rows(tmp_path):
    code, out = _run(tmp_path, "catalog:torus", "--grid", "5", "--format", "csv")
    assert code == 0
    rows = list(csv.reader((out / "report.csv").open()))
    assert rows[0] == ["suite", "quantity", "point", "u", "value"]
    spec = catalog("torus").with_grid((5,))
    report = analyze(spec, RunConfig("catalog:torus", grid=(5,)))
    series = sum(1 for s in report.suites.values() for c in s.checks if c.values is not None)
    assert len(rows) - 1 == 25 * series


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("input = catalog:sphere\nparam.r = 2\nsuite = yamabe\ngrid = 6\n"
                   f"out = {tmp_path / 'from_cfg'}\n")
    assert main(["analyze", "--config", str(cfg)]) == 0
    report = json.loads((tmp_path / "from_cfg" / "report.json").read_text())
    assert report["spec"]["params"]["r"] == 2.0 and list(report["suites"]) == ["yamabe"]
    assert main(["analyze", "--config", str(cfg), "--param", "r=3",
                 "--out", str(tmp_path / "flag")]) == 0
    report = json.loads((tmp_path / "flag" / "report.json").read_text())
    assert report["spec"]["params"]["r"] == 3.0
    cfg.write_text("colour = blue\n")
    assert main(["analyze", "--config", str(cfg)]) == 2


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert main(["analyze", "catalog:ellipse", "--suite", "geometry"]) == 0
    assert (tmp_path / "env" / "report.json").exists()


def test_catalog_list(capsys):
    assert main(["catalog", "list"]) == 0
    text = capsys.readouterr().out
    assert "plane_offset" in text and "c=<required>" in text


def test_fd_cross_check(tmp_path):
    code, out = _run(tmp_path, "catalog:torus", "--suite", "conformal", "--fd-check")
    assert code == 0
    checks = {c["name"]: c for c in json.loads((out / "report.json").read_text())["suites"]["conformal"]["checks"]}
    assert checks["fd_lie_derivative"]["status"] == "pass"
    assert checks["fd_conformal_verdict"]["status"] == "pass"
