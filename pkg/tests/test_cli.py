import json

from vbca.cli import main


def test_run_exit_codes(tmp_path, capsys):
    assert main(["run", "--k", "4", "--seed", "1", "--samples", "20000", "--out", str(tmp_path / "ok")]) == 0
    assert "geometry: tetrahedral" in capsys.readouterr().out
    assert (tmp_path / "ok" / "run.png").exists()
    assert main(["run", "--k", "0", "--out", str(tmp_path / "bad")]) == 1
    assert main(["run", "--max-steps", "5", "--no-plots", "--samples", "5000", "--out", str(tmp_path / "nc")]) == 3
    assert main(["run", "--cp", "200", "--no-plots", "--samples", "5000", "--out", str(tmp_path / "lost")]) == 2


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"k_peripheral": 3, "cp": 10, "seed": 4, "coverage_samples": 5000}))
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--k", "5", "--no-plots", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["k_peripheral"] == 5
    assert report["config"]["cp"] == 10 and report["config"]["seed"] == 4


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"speed": 3}))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    cfg.write_text("{not json")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1


def test_sweeps_write_tables_and_figures(tmp_path):
    assert main(["sweep-distance", "--cp", "10", "40", "--k", "3", "4", "--out", str(tmp_path)]) == 0
    assert main(["sweep-coverage", "--cp", "20", "--k", "3", "4", "--samples", "5000", "--out", str(tmp_path)]) == 0
    assert main(["baseline", "--cp", "40", "--k", "2", "3", "--samples", "5000", "--out", str(tmp_path)]) == 0
    assert main(["stability", "--k", "3", "--horizon", "20", "--out", str(tmp_path)]) == 0
    assert main(["geometries", "--out", str(tmp_path)]) == 0
    for name in ("cp_vs_distance", "coverage_vs_k", "baseline_comparison", "stability"):
        assert (tmp_path / f"{name}.csv").exists() and (tmp_path / f"{name}.png").exists()
    assert (tmp_path / "reference_geometries.csv").exists()


def test_sweep_failures_still_exit_zero(tmp_path):
    assert main(["sweep-distance", "--cp", "200", "--k", "7", "--no-plots", "--out", str(tmp_path)]) == 0
    assert "connectivity_loss" in (tmp_path / "cp_vs_distance.csv").read_text()


def test_sweep_rejects_bad_grid(tmp_path):
    assert main(["sweep-distance", "--k", "0", "--out", str(tmp_path)]) == 1
