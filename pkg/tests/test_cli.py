import csv
import json

import pytest

from intermap_lab.cli import main
from intermap_lab.report import ReportError, ReportRow, emit_report, load_report

SCALING = "experiment=scaling\nmap.kind=circle\nmap.gamma=2.0\nN=100000\nseed=1\n"
DENSITY = ("experiment=density\nmap.kind=interval\nmap.kappa=0.5\nmap.gamma=2.0\n"
           "samples=2000000\nburn_in=10000\n")


def write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_scaling_run(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["scaling", "--config", write(tmp_path, SCALING), "--out", str(out)]) == 0
    data = load_report(out / "scaling.json")
    assert data["all_pass"] and data["seed"] == 1 and data["config_hash"]
    rows = {r["metric"]: r for r in data["rows"]}
    assert rows["scaled_one_minus_a"]["value"] == pytest.approx(4.0, rel=0.02)
    assert "PASS" in capsys.readouterr().out


def test_byte_identical_reruns(tmp_path):
    cfg = write(tmp_path, SCALING)
    for d in ("a", "b"):
        assert main(["scaling", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    for f in ("scaling.csv", "scaling_partition.csv", "scaling.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_csv_layout(tmp_path):
    main(["scaling", "--config", write(tmp_path, SCALING), "--out", str(tmp_path)])
    rows = list(csv.reader(open(tmp_path / "scaling.csv")))
    assert rows[0] == ["experiment", "params", "metric", "value", "stderr", "tolerance",
                       "reference", "pass", "config_hash", "seed"]
    assert all(r[-2] == rows[1][-2] and r[-1] == "1" for r in rows[1:])


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("INTERMAP_LAB_OUT", str(tmp_path / "env"))
    assert main(["scaling", "--config", write(tmp_path, SCALING)]) == 0
    assert (tmp_path / "env" / "scaling.json").exists()


def test_seed_override_changes_hash(tmp_path):
    cfg = write(tmp_path, SCALING)
    main(["scaling", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["scaling", "--config", cfg, "--seed", "7", "--out", str(tmp_path / "b")])
    a = load_report(tmp_path / "a" / "scaling.json")
    b = load_report(tmp_path / "b" / "scaling.json")
    assert b["seed"] == 7 and a["config_hash"] != b["config_hash"]


def test_config_error_exit(tmp_path, capsys):
    bad = write(tmp_path, "experiment=density\nmap.kind=circle\nmap.gamma=2.0\n")
    assert main(["density", "--config", bad]) == 2
    assert "density requires interval map" in capsys.readouterr().err


def test_experiment_mismatch_exit(tmp_path):
    assert main(["evl", "--config", write(tmp_path, SCALING)]) == 2


def test_missing_config_exit(tmp_path):
    assert main(["scaling", "--config", str(tmp_path / "missing.toml")]) == 2


def test_numerical_error_exit(tmp_path, capsys):
    deep = SCALING.replace("N=100000", "N=1000000").replace("2.0", "1.5")
    assert main(["scaling", "--config", write(tmp_path, deep), "--out", str(tmp_path)]) == 3
    assert "max achievable N" in capsys.readouterr().err


def test_acceptance_failure_exit(tmp_path):
    # the partition scaling is far from its limit at small depth
    shallow = SCALING.replace("N=100000", "N=20")
    assert main(["scaling", "--config", write(tmp_path, shallow), "--out", str(tmp_path)]) == 4
    assert load_report(tmp_path / "scaling.json")["all_pass"] is False


def test_density_run(tmp_path):
    assert main(["density", "--config", write(tmp_path, DENSITY), "--out", str(tmp_path)]) in (0, 4)
    data = load_report(tmp_path / "density.json")
    rows = {r["metric"]: r for r in data["rows"]}
    assert rows["ulam_l1_exact"]["pass"] is True
    assert (tmp_path / "density_ulam.csv").exists()


# ------------------------------------------------------------------ reports

def test_emit_report_one_row(tmp_path):
    row = ReportRow("scaling", {"N": 1}, "x", 1.0)
    paths = emit_report([row], tmp_path, "r", "abc", 0)
    assert len(paths) == 2
    assert len(open(tmp_path / "r.csv").read().splitlines()) == 2


def test_emit_report_fail_flag(tmp_path):
    rows = [ReportRow("scaling", {}, "ok", 1e-13, tolerance="closed_form"),
            ReportRow("scaling", {}, "bad", 1.0, tolerance="closed_form")]
    assert rows[0].passed is True and rows[1].passed is False
    emit_report(rows, tmp_path, "r", "abc", 0)
    assert json.load(open(tmp_path / "r.json"))["all_pass"] is False


def test_emit_report_preconditions(tmp_path):
    with pytest.raises(ValueError):
        emit_report([], tmp_path, "r", "abc", 0)
    with pytest.raises(ValueError):
        emit_report([ReportRow("e", {}, "m", 1.0)], tmp_path, "r", "", 0)


def test_report_without_hash_rejected(tmp_path):
    p = tmp_path / "r.json"
    p.write_text(json.dumps({"experiment": "scaling", "rows": []}))
    with pytest.raises(ReportError):
        load_report(p)


def test_report_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ReportError, match=str(blocker)):
        emit_report([ReportRow("e", {}, "m", 1.0)], blocker / "sub", "r", "abc", 0)
