import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from herzlab.cli import main

SMALL = {
    "seed": 5,
    "grid": {"dim": 1, "k_min": -1, "k_max": 3, "points_per_unit": 16},
    "suite": {"count": 4},
    "dictionary_size": 3,
    "experiments": [
        {"kind": "lemma2", "trials": 100},
        {"kind": "norm_growth", "grid": {"dim": 1, "k_min": -2, "k_max": 4, "points_per_unit": 16}},
        {"kind": "lp_ratio", "op": "maximal"},
        "herz_ratio",
        {"kind": "decomposition", "suite": {"count": 2}},
    ],
}


def write(tmp_path, raw, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return str(p)


def csv_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_and_report(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("HERZLAB_SEED", raising=False)
    out = tmp_path / "run"
    assert main(["run", write(tmp_path, SMALL), "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 5 and manifest["seed_source"] == "config"
    assert [e["id"] for e in manifest["experiments"]] == ["lemma2", "norm_growth", "lp_ratio", "herz_ratio",
                                                         "decomposition"]
    for e in manifest["experiments"]:
        for f in e["files"]:
            assert (out / f).is_file()
    summary = {r["experiment_id"]: r for r in csv_rows(out / "summary.csv")}
    assert float(summary["lemma2"]["delta"]) == pytest.approx(0.5)
    ratio = csv_rows(out / "herz_ratio.csv")
    assert set(ratio[0]) == {"experiment_id", "function_id", "resolution", "dict_size", "input_norm",
                             "output_norm", "ratio"}
    assert main(["report", str(out)]) == 0
    text = capsys.readouterr().out
    assert "herz_ratio" in text and (out / "report.txt").is_file()
    plot = csv_rows(out / "plot_data.csv")
    assert {r["series"] for r in plot if r["experiment_id"] == "lemma2"} == {"envelope"}


def test_parallel_matches_serial(tmp_path, monkeypatch):
    monkeypatch.delenv("HERZLAB_SEED", raising=False)
    path = write(tmp_path, SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", path, "--out", str(a)]) == 0
    assert main(["run", path, "--out", str(b), "--jobs", "2"]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes(), n


def test_seed_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("HERZLAB_SEED", "99")
    out = tmp_path / "o"
    raw = dict(SMALL, experiments=[{"kind": "lemma2", "trials": 20}])
    assert main(["run", write(tmp_path, raw), "--out", str(out)]) == 0
    m = json.loads((out / "manifest.json").read_text())
    assert m["seed"] == 99 and m["seed_source"] == "HERZLAB_SEED"


def test_window_rejection_exit_code(tmp_path, monkeypatch):
    monkeypatch.delenv("HERZLAB_SEED", raising=False)
    raw = dict(SMALL, herz={"alpha": 0.45}, experiments=["herz_ratio"])
    path = write(tmp_path, raw)
    assert main(["run", path, "--out", str(tmp_path / "r")]) == 3
    status = csv_rows(tmp_path / "r" / "status.csv")
    assert status[0]["status"] == "window_rejected"
    assert main(["run", path, "--out", str(tmp_path / "p"), "--probe"]) == 0
    status = csv_rows(tmp_path / "p" / "status.csv")
    assert status[0]["probe"] == "true"


def test_failure_exit_code(tmp_path, monkeypatch):
    monkeypatch.delenv("HERZLAB_SEED", raising=False)
    raw = dict(SMALL, experiments=["norm_growth"])
    assert main(["run", write(tmp_path, raw), "--out", str(tmp_path / "f")]) == 1
    assert "insufficient shells" in csv_rows(tmp_path / "f" / "status.csv")[0]["notes"]


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["run", write(tmp_path, dict(SMALL, mystery=True))]) == 2
    assert "config error" in capsys.readouterr().err


def test_report_errors(tmp_path, monkeypatch):
    monkeypatch.delenv("HERZLAB_SEED", raising=False)
    assert main(["report", str(tmp_path)]) == 2
    out = tmp_path / "run"
    raw = dict(SMALL, experiments=[{"kind": "lemma2", "trials": 20}])
    assert main(["run", write(tmp_path, raw), "--out", str(out)]) == 0
    (out / "lemma2_points.csv").unlink()
    assert main(["report", str(out)]) == 1


def test_console_script_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "herzlab.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("herzlab ")


def test_shipped_configs_validate():
    from herzlab.config import load_config

    for path in sorted((Path(__file__).parents[1] / "configs").glob("*.json")):
        load_config(path, env={})
