import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from segmarket.cli import MODES, ConfigError, grids_from_env, main, run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

CASES = {
    "monopoly-greedy": "zeno",
    "monopoly-simple": "zeno",
    "monopoly-optimal": "example_instance",
    "monopoly-verify": "zeno",
    "duopoly-benchmark": "hotelling_uniform",
    "duopoly-simple": "hotelling_uniform",
    "duopoly-rich": "hotelling_beta22",
    "duopoly-welfare": "hotelling_uniform",
    "figure-pack": "figure_pack",
}


@pytest.fixture(autouse=True)
def _no_grid_env(monkeypatch):
    monkeypatch.delenv("SEGMARKET_GRID", raising=False)


def _load(out, mode):
    return json.loads((out / f"{mode}.json").read_text())


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def test_every_mode_has_a_case():
    assert set(CASES) == set(MODES)


@pytest.mark.parametrize("mode", sorted(CASES))
def test_mode_runs_and_verifies(mode, tmp_path):
    assert main([mode, "--config", str(CONFIGS / f"{CASES[mode]}.json"), "--strict", "--out", str(tmp_path)]) == 0
    report = _load(tmp_path, mode)
    assert report["mode"] == mode and report["passed"] is True
    for name in report["csv"]:
        assert (tmp_path / name).exists()
    for rep in report["verification"]:
        for c in rep["checks"]:
            assert set(c) >= {"name", "passed", "worst_violation", "witness"}


def test_greedy_report_values(tmp_path):
    run("monopoly-greedy", CONFIGS / "zeno.json", tmp_path)
    r = _load(tmp_path, "monopoly-greedy")["result"]
    assert r["p_star"] == 0.5
    assert r["segmentation"]["cutoffs"][:4] == [1.0, 0.5, 0.25, 0.125]
    rows = list(csv.DictReader(open(tmp_path / "monopoly-greedy-segments.csv")))
    assert float(rows[0]["price"]) == 0.5 and float(rows[0]["mass"]) == 0.5


def test_example_instance(tmp_path):
    run("monopoly-optimal", CONFIGS / "example_instance.json", tmp_path)
    r = _load(tmp_path, "monopoly-optimal")["result"]
    assert r["greedy"]["avg_price"] == pytest.approx(0.50333333333333, abs=1e-12)
    assert r["dp"]["avg_price"] == pytest.approx(4 / 9, abs=1e-12)
    assert r["dp_matches_exhaustive"] is True
    assert r["dp"]["boundaries"] == [0, 2]


def test_duopoly_welfare_values(tmp_path):
    run("duopoly-welfare", CONFIGS / "hotelling_uniform.json", tmp_path)
    r = _load(tmp_path, "duopoly-welfare")["result"]
    assert r["regimes"]["benchmark"]["expected_cost"] == pytest.approx(2.5, abs=1e-12)
    assert r["regimes"]["simple"]["expected_cost"] == pytest.approx(1.25, abs=1e-12)
    assert r["cost_ratio_to_benchmark"]["simple"] == pytest.approx(0.5, abs=1e-12)


def test_figure_pack_headers(tmp_path):
    run("figure-pack", CONFIGS / "figure_pack.json", tmp_path)
    head = {p.name: p.read_text().splitlines()[0] for p in tmp_path.glob("*.csv")}
    assert head == {
        "figure-pack-staircase.csv": "v,price,surplus,benchmark_surplus",
        "figure-pack-duopoly-cutoffs.csv": "firm,s,cutoff,price",
        "figure-pack-costs.csv": "t,benchmark_cost,fully_revealing_cost,simple_cost,rich_cost",
    }
    rows = list(csv.DictReader(open(tmp_path / "figure-pack-duopoly-cutoffs.csv")))
    assert rows[0]["s"] == "0" and rows[0]["price"] == ""


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        run("duopoly-rich", CONFIGS / "hotelling_beta22.json", out)
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes(), f.name


def test_tampered_segmentation(tmp_path, capsys):
    cfg = str(CONFIGS / "tampered.json")
    assert main(["monopoly-verify", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert main(["monopoly-verify", "--config", cfg, "--strict", "--out", str(tmp_path)]) == 3
    report = _load(tmp_path, "monopoly-verify")
    assert report["passed"] is False
    failed = {c["name"] for rep in report["verification"] for c in rep["checks"] if not c["passed"]}
    assert "efficiency" in failed
    assert "FAILED" in capsys.readouterr().out


def test_unknown_field_is_config_error(tmp_path):
    cfg = _write(tmp_path, {"distribution": {"kind": "uniform", "lo": 0, "hi": 1}, "colour": "red"})
    assert run("monopoly-greedy", cfg, tmp_path) == 2
    assert not (tmp_path / "monopoly-greedy.json").exists()


@pytest.mark.parametrize(
    "cfg",
    [
        {"distribution": {"kind": "uniform", "lo": 1, "hi": 0}},
        {"distribution": {"kind": "nope"}},
        {"distribution": {"kind": "uniform", "lo": 0, "hi": 1}, "eps_price": -1},
        {"distribution": {"kind": "uniform", "lo": 0, "hi": 1}, "grids": {"types": 1}},
    ],
)
def test_bad_configs_exit_2(cfg, tmp_path):
    assert run("monopoly-greedy", _write(tmp_path, cfg), tmp_path) == 2


def test_missing_config_exits_2(tmp_path):
    assert run("monopoly-greedy", tmp_path / "absent.json", tmp_path) == 2


def test_duopoly_on_wrong_support_exits_2(tmp_path):
    assert run("duopoly-simple", CONFIGS / "zeno.json", tmp_path) == 2


def test_grid_env_parsing():
    assert grids_from_env({"SEGMARKET_GRID": "50"})["types"] == 50
    g = grids_from_env({"SEGMARKET_GRID": "optimizer=2000, curve=11"})
    assert g["optimizer"] == 2000 and g["curve"] == 11 and g["types"] == 1000
    for bad in ("abc", "types=x", "depth=3"):
        with pytest.raises(ConfigError):
            grids_from_env({"SEGMARKET_GRID": bad})


def test_grid_env_reaches_outputs(tmp_path, monkeypatch):
    monkeypatch.setenv("SEGMARKET_GRID", "curve=11")
    run("duopoly-welfare", CONFIGS / "hotelling_uniform.json", tmp_path)
    assert _load(tmp_path, "duopoly-welfare")["grid_sizes"]["curve"] == 11
    assert len((tmp_path / "duopoly-welfare-costs.csv").read_text().splitlines()) == 12


def test_bad_grid_env_exits_2(tmp_path, monkeypatch):
    monkeypatch.setenv("SEGMARKET_GRID", "lots")
    assert run("monopoly-greedy", CONFIGS / "zeno.json", tmp_path) == 2


def test_console_script(tmp_path):
    exe = shutil.which("segmarket")
    cmd = [exe] if exe else [sys.executable, "-m", "segmarket.cli"]
    proc = subprocess.run(
        cmd + ["duopoly-benchmark", "--config", str(CONFIGS / "hotelling_uniform.json"), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert _load(tmp_path, "duopoly-benchmark")["result"]["p_star"] == 2.0
