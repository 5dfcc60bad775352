import csv
import json

import pytest

from neutral_inclusions.cli import EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_OK, main, worker_count
from neutral_inclusions.config import ConfigError, dumps, parse_config

HS = {"geometry": {"semi_axes": [1.0, 1.0, 1.0], "theta1": 0.5},
      "materials": {"sigma1": 10, "sigma2": 1}}


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_depol_sphere(tmp_path, capsys):
    code, out, _ = run(capsys, "depol", "--config", write(tmp_path, HS))
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["core"]["d"] == [1 / 3] * 3
    assert rep["exterior"]["sum"] == 1.0


def test_depol_prolate(tmp_path, capsys):
    cfg = {"geometry": {"semi_axes": [2.0, 1.0, 1.0], "theta1": 0.3}, "materials": {"sigma1": 2, "sigma2": 1}}
    code, out, _ = run(capsys, "depol", "--config", write(tmp_path, cfg), "--axis", "1")
    assert code == EXIT_OK
    assert json.loads(out)["axis"]["d_exterior"] == pytest.approx(0.1735639975, abs=1e-10)


def test_negative_axis(tmp_path, capsys):
    code, _, err = run(capsys, "depol", "--config", write(tmp_path, HS), "--axis", "-1")
    assert code == EXIT_CONFIG
    assert "axis" in err


def test_effective_hs(tmp_path, capsys):
    code, out, _ = run(capsys, "effective", "--config", write(tmp_path, HS), "--axis", "1")
    assert code == EXIT_OK
    (ax,) = json.loads(out)["axes"]
    assert ax["sigma_star"] == pytest.approx(2.8, rel=1e-12)


def test_effective_p3_residual(tmp_path, capsys):
    cfg = {"geometry": {"c": [1, 2, 3], "rho_c": 1, "rho_e": 4},
           "materials": {"sigma1": 5, "sigma2": 1, "p": 3, "E": 0.7}}
    code, out, _ = run(capsys, "effective", "--config", write(tmp_path, cfg))
    assert code == EXIT_OK
    for ax in json.loads(out)["axes"]:
        assert ax["f_residual"] < 1e-12 * ax["f_scale"]


def test_effective_singular_field(tmp_path, capsys):
    cfg = {"geometry": HS["geometry"], "materials": {"sigma1": 5, "sigma2": 1, "p": 1.5, "E": 0}}
    code, _, err = run(capsys, "effective", "--config", write(tmp_path, cfg))
    assert code == EXIT_CONFIG
    assert "singular" in err


def test_config_errors(tmp_path, capsys):
    both = {"geometry": {"r_c": 0.5, "r_e": 1, "theta1": 0.3}, "materials": HS["materials"]}
    assert run(capsys, "depol", "--config", write(tmp_path, both))[0] == EXIT_CONFIG
    assert run(capsys, "depol", "--config", str(tmp_path / "missing.json"))[0] == EXIT_CONFIG
    (tmp_path / "broken.json").write_text("{")
    assert run(capsys, "depol", "--config", str(tmp_path / "broken.json"))[0] == EXIT_CONFIG
    with pytest.raises(ConfigError):
        parse_config({"geometry": {"r_c": 2, "r_e": 1}, "materials": HS["materials"]})


def test_verify_small_grid_rejected(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "--config", write(tmp_path, HS), "--grid-n", "8")
    assert code == EXIT_CONFIG
    assert "grid_n" in err


def test_verify_neutral_and_control(tmp_path, capsys):
    csv_path = tmp_path / "field.csv"
    code, out, _ = run(capsys, "verify", "--config", write(tmp_path, HS), "--grid-n", "32",
                       "--csv", str(csv_path))
    assert code == EXIT_OK
    rep = json.loads(out)
    assert set(rep["metrics"]) == {"uniformity_max_u", "uniformity_max_grad", "sigma_eff",
                                   "iterations", "converged"}
    assert rep["metrics"]["converged"] and rep["status"] == "neutral"
    with open(csv_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["index", "x", "y", "z", "u"] and len(rows) == 32**3 + 1

    ctl = dict(HS, run={"matrix": "coating"})
    code, out, _ = run(capsys, "verify", "--config", write(tmp_path, ctl, "ctl.json"), "--grid-n", "32")
    ctl_rep = json.loads(out)
    assert ctl_rep["status"] == "non-neutral"
    assert ctl_rep["metrics"]["uniformity_max_u"] > rep["metrics"]["uniformity_max_u"]


def test_verify_nonconvergence(tmp_path, capsys):
    cfg = {"geometry": HS["geometry"], "materials": {"sigma1": 5, "sigma2": 1, "p": 3},
           "run": {"max_iter": 1}}
    out_path = tmp_path / "rep.json"
    code, _, _ = run(capsys, "verify", "--config", write(tmp_path, cfg), "--grid-n", "16",
                     "--out", str(out_path))
    assert code == EXIT_NONCONVERGENCE
    assert json.loads(out_path.read_text())["metrics"]["converged"] is False


def test_pack_deterministic(tmp_path, capsys):
    cfg = dict(HS, run={"target_fill": 0.4})
    path = write(tmp_path, cfg)
    a = run(capsys, "pack", "--config", path, "--seed", "5")[1]
    b = run(capsys, "pack", "--config", path, "--seed", "5")[1]
    c = run(capsys, "pack", "--config", path, "--seed", "6")[1]
    assert a == b != c
    rep = json.loads(a)
    assert rep["fill"] >= 0.4


def test_sweep_csv(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("NEUTRAL_INCLUSIONS_THREADS", "2")
    cfg = dict(HS, sweep={"parameter": "p", "values": [1.5, 2.0, 3.0]})
    out_csv = tmp_path / "s.csv"
    code, out, _ = run(capsys, "sweep", "--config", write(tmp_path, cfg), "--csv", str(out_csv))
    assert code == EXIT_OK
    rows = list(csv.DictReader(open(out_csv)))
    assert [float(r["p"]) for r in rows] == [1.5, 2.0, 3.0]
    assert float(rows[1]["sigma_star_1"]) == pytest.approx(2.8, rel=1e-12)
    assert json.loads(out)["rows"][1]["sigma_star_1"] == float(rows[1]["sigma_star_1"])


def test_sweep_without_block(tmp_path, capsys):
    assert run(capsys, "sweep", "--config", write(tmp_path, HS))[0] == EXIT_CONFIG


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("NEUTRAL_INCLUSIONS_THREADS", "3")
    assert worker_count(10) == 3 and worker_count(2) == 2
    monkeypatch.setenv("NEUTRAL_INCLUSIONS_THREADS", "zero")
    with pytest.raises(ConfigError):
        worker_count(4)


def test_dumps_round_trip():
    vals = [0.1, 1 / 3, 2.8000000000000007, 1e-300, -7.5e22]
    text = dumps({"v": vals, "n": 3, "ok": True, "none": None})
    assert json.loads(text)["v"] == vals
    assert "0.10000000000000001" in text
