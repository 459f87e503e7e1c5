import json

import numpy as np
import pytest

from magicqpt import criticality as cr
from magicqpt.cli import main


def _run(tmp_path, monkeypatch, *argv):
    monkeypatch.chdir(tmp_path)
    return main(list(argv))


def test_tannni_sweep_files(tmp_path, monkeypatch, capsys):
    rc = _run(tmp_path, monkeypatch, "tannni", "--n", "8", "--j2", "0.5", "--xmin", "-1",
              "--xmax", "1", "--steps", "40", "--measure", "m2tilde", "--sites", "two",
              "--out", "t.csv", "--plot", "--threads", "1")
    assert rc == 0
    s = cr.read_sweep_csv(tmp_path / "t.csv")
    assert s.x.size == 41 and np.max(np.abs(s.y - s.y[::-1])) <= 1e-8
    assert (tmp_path / "t.deriv.csv").exists()
    svg = (tmp_path / "t.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 2
    assert "wrote t.csv" in capsys.readouterr().out


def test_reruns_are_byte_identical(tmp_path, monkeypatch):
    args = ["tfim", "--n", "8", "--xmin", "0.5", "--xmax", "1.5", "--steps", "10",
            "--seed", "3", "--threads", "1"]
    assert _run(tmp_path, monkeypatch, *args, "--out", "a.csv", "--plot") == 0
    assert _run(tmp_path, monkeypatch, *args, "--out", "b.csv", "--plot") == 0
    # the output name is not part of the recorded configuration
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.deriv.csv").read_bytes() == (tmp_path / "b.deriv.csv").read_bytes()
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_config_is_echoed(tmp_path, monkeypatch):
    _run(tmp_path, monkeypatch, "tannni", "--n", "8", "--j2", "0.3", "--xmin", "0.1",
         "--xmax", "0.9", "--steps", "8", "--threads", "1")
    text = (tmp_path / "tannni.csv").read_text()
    for key in ("# engine=ed", "# j2=0.3", "# seed=0", "# tol=1e-10", "# x_min=0.1", "# sites=two"):
        assert key in text


def test_qcm_example(tmp_path, monkeypatch, capsys):
    rc = _run(tmp_path, monkeypatch, "qcm", "--n", "400", "--xmin", "0.5", "--xmax", "1.5",
              "--steps", "500", "--sites", "two", "--measure", "m2tilde", "--out", "qcm.csv",
              "--plot")
    assert rc == 0
    for name in ("qcm.csv", "qcm.deriv.csv", "qcm.svg"):
        assert (tmp_path / name).exists()
    d = cr.read_sweep_csv(tmp_path / "qcm.deriv.csv")
    assert d.derivative and d.x.size == 501


def test_config_file(tmp_path, monkeypatch):
    (tmp_path / "c.json").write_text(json.dumps(
        {"n": 8, "j2": 0.2, "xmin": 0.2, "xmax": 1.0, "steps": 8, "out": "cfg.csv"}))
    assert _run(tmp_path, monkeypatch, "tannni", "--config", "c.json", "--threads", "1") == 0
    s = cr.read_sweep_csv(tmp_path / "cfg.csv")
    assert s.n_sites == 8 and s.metadata["j2"] == 0.2
    # flags win over the file
    assert _run(tmp_path, monkeypatch, "tannni", "--config", "c.json", "--n", "10",
                "--threads", "1") == 0
    assert cr.read_sweep_csv(tmp_path / "cfg.csv").n_sites == 10


def test_single_point(tmp_path, monkeypatch, capsys):
    assert _run(tmp_path, monkeypatch, "tfim", "--n", "8", "--gamma", "1.0", "--out", "p.csv") == 0
    assert "m2_tilde_two_site" in capsys.readouterr().out
    assert cr.read_sweep_csv(tmp_path / "p.csv").x.tolist() == [1.0]


@pytest.mark.parametrize("argv", [
    ["tannni", "--jx", "1.0"],
    ["tfim", "--j2", "0.3"],
    ["qcm", "--j1", "1.0"],
    ["qcm", "--jx", "1.0", "--steps", "20"],
    ["tannni", "--n", "7"],
    ["tannni", "--n", "8", "--xmin", "0", "--xmax", "1", "--steps", "10"],
    ["tannni", "--n", "8", "--sector", "half"],
    ["qcm", "--n", "8", "--separation", "2"],
    ["tannni", "--steps", "4"],
    ["bogus"],
    ["tannni", "--measure", "m3"],
    ["tannni", "--config", "missing.json"],
])
def test_usage_errors(tmp_path, monkeypatch, capsys, argv):
    assert _run(tmp_path, monkeypatch, *argv) == 2
    err = capsys.readouterr().err.strip()
    assert err and "Traceback" not in err


def test_unknown_config_key(tmp_path, monkeypatch, capsys):
    (tmp_path / "c.json").write_text('{"frobnicate": 1}')
    assert _run(tmp_path, monkeypatch, "tannni", "--config", "c.json") == 2
    assert "frobnicate" in capsys.readouterr().err


def test_solver_failure_exit_code(tmp_path, monkeypatch, capsys):
    rc = _run(tmp_path, monkeypatch, "tannni", "--n", "12", "--j2", "0.5", "--xmin", "0.2",
              "--xmax", "0.6", "--steps", "8", "--tol", "1e-14", "--max-iter", "3",
              "--threads", "1")
    assert rc == 3
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "x = 0.2" in err


def test_fss_command(tmp_path, monkeypatch):
    (tmp_path / "fss.json").write_text(json.dumps({
        "model": "tannni", "j2": 0.2, "sizes": [8, 10, 12], "xmin": 0.3, "xmax": 0.9,
        "steps": 60, "measure": "m2tilde", "sites": "two", "kind": "maximum",
        "out": "fit.csv", "threads": 1,
    }))
    assert _run(tmp_path, monkeypatch, "fss", "--config", "fss.json") == 0
    fit = cr.read_fss_csv(tmp_path / "fit.csv")
    assert [n for n, _ in fit["points"]] == [8, 10, 12] and fit["mode"] == "estimated_c"
    cs = [c for _, c in fit["points"]]
    assert cs == sorted(cs)
    assert _run(tmp_path, monkeypatch, "fss", "--config", "fss.json", "--c", "0.6",
                "--out", "known.csv") == 0
    assert cr.read_fss_csv(tmp_path / "known.csv")["mode"] == "known_c"


def test_fss_edge_failure(tmp_path, monkeypatch, capsys):
    rc = _run(tmp_path, monkeypatch, "fss", "--j2", "0.2", "--sizes", "8,10,12", "--xmin",
              "0.3", "--xmax", "0.5", "--steps", "8", "--threads", "1")
    assert rc == 3


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MAGICQPT_THREADS", "zero")
    assert _run(tmp_path, monkeypatch, "tannni", "--n", "8") == 2


def test_selftest_command(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 6
