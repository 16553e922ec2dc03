import csv
import json

import numpy as np
import pytest

from pdeapprox import __version__
from pdeapprox.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def read_manifest(path):
    raw = open(path, "rb").read()
    assert b"\r" not in raw and raw.endswith(b"\n")
    return dict(line.split("=", 1) for line in raw.decode("utf-8").splitlines())


def test_solve_writes_csv_and_manifest(tmp_path):
    out = tmp_path / "s.csv"
    rc = main(["solve", "--model", "voter", "--tau", "0.5", "--gamma", "0.5", "--N", "100",
               "--method", "dynamic", "--t", "1", "--init", "sin2", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)
    assert rows[0] == ["z", "u_pde", "x_ode", "abs_err"]
    assert len(rows) == 102
    z, u, x, e = (np.array(c, dtype=float) for c in zip(*rows[1:]))
    assert np.allclose(z, np.arange(101) / 100)
    assert np.allclose(e, np.abs(u - x))
    m = read_manifest(str(out) + ".manifest")
    assert m["version"] == __version__
    assert m["N"] == "100" and m["method"] == "dynamic"
    assert float(m["wall_seconds"]) >= 0
    assert m["backend"] in ("cython", "python")


def test_solve_without_ode_leaves_columns_empty(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["solve", "--N", "20", "--method", "robin", "--no-ode", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert all(r[2] == "" and r[3] == "" for r in rows[1:])


def test_solve_robin_from_point_mass(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["solve", "--model", "voter", "--tau", "0.7", "--gamma", "0.3", "--N", "1000",
               "--method", "robin", "--t", "500", "--init", "delta:199", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out)[1:]
    u = np.array([float(r[1]) for r in rows])
    x = np.array([float(r[2]) for r in rows])
    assert len(rows) == 1001
    assert np.max(np.abs(u - x)) <= 0.02 * np.max(x)


def test_sis_negative_diffusion_exit_codes(tmp_path):
    out = str(tmp_path / "sis.csv")
    assert main(["solve", "--model", "sis", "--N", "100", "--method", "dynamic", "--out", out]) == 3
    assert main(["solve", "--model", "sis", "--N", "100", "--method", "dynamic", "--t", "0.01",
                 "--clamp-diffusion", "--out", out]) == 0


def test_spectral_needs_symmetric_voter(tmp_path):
    out = str(tmp_path / "x.csv")
    assert main(["solve", "--tau", "0.7", "--gamma", "0.3", "--method", "spectral", "--out", out]) == 2


def test_bad_initial_condition(tmp_path):
    out = str(tmp_path / "x.csv")
    assert main(["solve", "--init", "delta:x", "--out", out]) == 2
    assert main(["solve", "--N", "10", "--init", "delta:11", "--out", out]) == 2
    assert main(["solve", "--init", "square", "--out", out]) == 2


def test_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 30, "method": "robin"}))
    out = tmp_path / "s.csv"
    assert main(["solve", "--config", str(cfg), "--N", "40", "--out", str(out)]) == 0
    m = read_manifest(str(out) + ".manifest")
    assert m["N"] == "40" and m["method"] == "robin"
    cfg.write_text(json.dumps({"N": 30, "colour": "blue"}))
    assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 2


def test_converge(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["converge", "--Ns", "25,50,100,200", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["N", "sup_error", "observed_order"]
    orders = [float(r[2]) for r in rows[1:4]]
    assert all(1.6 <= p <= 2.4 for p in orders)
    assert rows[4][2] == ""
    assert "median order" in capsys.readouterr().out


def test_converge_needs_pairs(tmp_path):
    assert main(["converge", "--Ns", "25", "--out", str(tmp_path / "c.csv")]) == 2


def test_converge_robin_schema(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["converge", "--method", "robin", "--Ns", "20,40", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["N", "sup_error", "observed_order"]
    assert len(rows) == 3


def test_figure1(tmp_path, capsys):
    out = tmp_path / "fig.csv"
    assert main(["figure1", "--out", str(out)]) == 0
    ode = read_csv(tmp_path / "fig_ode.csv")
    spec = read_csv(tmp_path / "fig_spectral.csv")
    assert len(ode) == len(spec) == 1002
    x = np.array([float(r[1]) for r in ode[1:]])
    u = np.array([float(r[1]) for r in spec[1:]])
    assert np.max(np.abs(u - x)) <= 0.02 * np.max(x)
    m = read_manifest(str(out) + ".manifest")
    assert float(m["spectral_seconds"]) < float(m["ode_seconds"])


def test_bench_small_and_deterministic(tmp_path, capsys):
    out = tmp_path / "b.txt"
    assert main(["bench", "--N", "10", "--t", "1", "--J", "5", "--out", str(out)]) == 0
    first = read_manifest(str(out))
    for key in ("ode_seconds", "spectral_seconds", "speedup", "sup_difference"):
        assert key in first
    assert main(["bench", "--N", "10", "--t", "1", "--J", "5", "--out", str(out)]) == 0
    assert read_manifest(str(out))["sup_difference"] == first["sup_difference"]


def test_invalid_numbers_are_config_errors(tmp_path):
    out = str(tmp_path / "x.csv")
    assert main(["solve", "--tau", "-1", "--out", out]) == 2
    assert main(["solve", "--rtol", "0", "--out", out]) == 2
    assert main(["solve", "--N", "20", "--M", "40", "--out", out]) == 2


def test_help_exits_cleanly():
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0
