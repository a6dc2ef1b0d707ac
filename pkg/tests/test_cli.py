import csv
import json
import math

import pytest

from charpoly.cli import CSV_COLUMNS, ConfigError, main, run, validate_config

VOLATILE = ("timestamp", "wall_time_s")


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def report(tmp_path, cfg, *flags, name="out.json"):
    out = tmp_path / name
    status = main(["--config", write(tmp_path, cfg), "--out", str(out), *flags])
    return status, json.loads(out.read_text()) if out.exists() else None


def strip(rep):
    return {k: v for k, v in rep.items() if k not in VOLATILE}


def test_predict_reports_limit(tmp_path):
    status, rep = report(tmp_path, {"command": "predict", "zetas": [0, 1], "z0": 0, "kappa22": 0})
    assert status == 0
    (res,) = rep["results"]
    assert res["value"] == pytest.approx(0.632121, abs=5e-7)
    assert set(rep) >= {"command", "config", "seed", "results", "flags", "wall_time_s"}
    assert set(res) >= {"name", "log_value", "stderr", "z_score"}


def test_predict_uses_distribution_kappa(tmp_path):
    _, rep = report(tmp_path, {"command": "predict", "zetas": [0, 1], "distribution": "uniform-phase"})
    assert rep["results"][0]["value"] == pytest.approx(0.232544, abs=5e-7)


def test_predict_moment_law(tmp_path):
    _, rep = report(tmp_path, {"command": "predict", "zetas": [0, 0], "z0": 0.5, "n": 64})
    assert rep["results"][0]["name"] == "moment_prediction"


def test_hciz_default(tmp_path):
    status, rep = report(tmp_path, {"command": "hciz-verify", "mc": {"samples": 200_000}})
    closed, mc = rep["results"]
    assert closed["value"] == pytest.approx(1.718282, abs=5e-7)
    assert mc["z_score"] < 4 and status == 0


def test_same_config_twice_identical(tmp_path):
    cfg = {"command": "verify-theorem", "n": 8, "zetas": [0, 1], "mc": {"samples": 2000, "chunk_size": 500}}
    _, a = report(tmp_path, cfg)
    _, b = report(tmp_path, cfg)
    assert json.dumps(strip(a), sort_keys=True) == json.dumps(strip(b), sort_keys=True)


def test_round_trip_from_embedded_config(tmp_path):
    cfg = {"command": "estimate", "n": [4, 6], "z0": [0.1, 0.2], "zetas": [0, [0.5, 0.5]],
           "distribution": {"kind": "radial-two-point", "q": 0.5}, "mc": {"samples": 1000, "chunk_size": 250}}
    _, first = report(tmp_path, cfg, "--seed", "77")
    assert first["seed"] == 77
    _, second = report(tmp_path, first["config"], name="again.json")
    assert first["results"] == second["results"] and first["rows"] == second["rows"]


def test_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    cfg = {"command": "verify-theorem", "n": [8, 12], "zetas": [0, 1],
           "mc": {"samples": 2000, "chunk_size": 500}, "output": {"format": "csv"}}
    main(["--config", write(tmp_path, cfg), "--out", str(out)])
    rows = list(csv.DictReader(out.open()))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [int(r["n"]) for r in rows] == [8, 12]
    assert all(float(r["prediction_log"]) == pytest.approx(math.log(1 - math.exp(-1))) for r in rows)
    assert (tmp_path / "sweep.json").exists()


def test_verify_theorem_gaussian_passes(tmp_path):
    cfg = {"command": "verify-theorem", "n": 16, "zetas": [0, 1], "mc": {"samples": 20_000, "chunk_size": 1000},
           "rel_tol": 0.15}
    status, rep = report(tmp_path, cfg)
    names = [r["name"] for r in rep["results"]]
    assert names == ["mc_ratio", "theorem1_prediction", "ginue_ratio_exact"]
    assert status == 0


def test_verify_theorem_failure_exit_code(tmp_path):
    # the Gaussian limit is not the target for unit-modulus entries with kappa forced to 0
    cfg = {"command": "verify-theorem", "n": 24, "zetas": [0, 1], "distribution": "uniform-phase", "kappa22": 0,
           "mc": {"samples": 50_000, "chunk_size": 1000}}
    status, rep = report(tmp_path, cfg)
    assert status == 1 and rep["passed"] is False


def test_exact_and_f1(tmp_path):
    status, rep = report(tmp_path, {"command": "exact", "n": 2, "zetas": [0]})
    assert rep["results"][0]["value"] == pytest.approx(0.5)
    status, rep = report(tmp_path, {"command": "f1-check", "n": [10, 100], "z0": 0.5})
    assert status == 0
    quad = [r for r in rep["results"] if r["name"] == "f1_exact"]
    assert all(abs(r["rel_diff_quadrature"]) < 1e-8 for r in quad)


@pytest.mark.parametrize(
    "cfg, key",
    [
        ({"command": "predict", "bogus": 1}, "bogus"),
        ({"command": "predict", "mc": {"samplez": 3}}, "samplez"),
        ({"command": "launch"}, "command"),
        ({"command": "predict", "z0": 1.5}, "z0"),
        ({"command": "predict", "distribution": "cauchy"}, "distribution"),
        ({"command": "predict", "n": 0}, "n"),
    ],
)
def test_config_errors(tmp_path, capsys, cfg, key):
    status = main(["--config", write(tmp_path, cfg)])
    assert status == 2
    assert key in capsys.readouterr().err


def test_validate_fills_defaults():
    cfg = validate_config({"command": "exact", "mc": {"seed": 4}})
    assert cfg["mc"]["seed"] == 4 and cfg["mc"]["samples"] == 100_000
    with pytest.raises(ConfigError):
        validate_config({})


def test_strict_turns_flags_into_failure(monkeypatch):
    cfg = validate_config({"command": "estimate", "n": 3, "zetas": [0], "mc": {"samples": 200, "chunk_size": 100}})
    import charpoly.mc as mc

    monkeypatch.setattr(mc, "HEAVY_TAIL_SHARE", 0.0)
    rep, status = run(cfg, strict=False)
    assert rep["flags"] and status == 0
    rep, status = run(cfg, strict=True)
    assert status == 1


def test_threads_env(monkeypatch):
    import charpoly.mc as mc

    monkeypatch.setenv(mc.THREADS_ENV, "3")
    assert mc.default_workers() == 3
