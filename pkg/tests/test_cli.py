import re

import pytest

from dwlse.cli import main
from dwlse.network import from_edge_list
from dwlse.simkit import tracking20
from dwlse.simkit.campaign import build_topology
from dwlse.simkit.config import dumps_scenario, loads_scenario
from dwlse.simkit.io import read_csv

PLAIN = re.compile(r"^-?\d+(\.\d+)?$")


@pytest.fixture
def short_scenario(tmp_path):
    cfg = tracking20().with_changes(steps=12, runs=2, turns=[(5, 90.0)])
    path = tmp_path / "short.ini"
    path.write_text(dumps_scenario(cfg))
    return path


def test_simulate_writes_csvs(short_scenario, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["simulate", "--scenario", str(short_scenario), "--out", str(out),
                 "--dump-estimates"]) == 0
    assert "avg MSE" in capsys.readouterr().out

    mse = read_csv(out / "mse.csv")
    assert list(mse[0]) == ["step", "node", "estimator", "value"]
    assert len(mse) == 2 * 12 * 20
    assert {r["estimator"] for r in mse} == {"dwlse", "cif"}
    acee = read_csv(out / "acee.csv")
    assert list(acee[0]) == ["step", "estimator", "value"] and len(acee) == 24
    truth = read_csv(out / "truth.csv")
    assert list(truth[0]) == ["step", "px", "py", "vx", "vy"] and len(truth) == 13
    est = read_csv(out / "estimates.csv")
    assert list(est[0])[-1] == "trace_info" and len(est) == 12 * 20

    for name in ("mse", "acee", "truth", "estimates"):
        for row in read_csv(out / f"{name}.csv"):
            for key, value in row.items():
                if key != "estimator":
                    assert PLAIN.match(value), (name, key, value)


def test_simulate_overrides(short_scenario, tmp_path, capsys):
    out = tmp_path / "o"
    main(["simulate", "--scenario", str(short_scenario), "--out", str(out),
          "--runs", "1", "--admm-iters", "3", "--seed", "5"])
    assert "1 runs, L=3" in capsys.readouterr().out


def test_sweep(short_scenario, tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["sweep", "--scenario", str(short_scenario), "--iters", "1,4",
                 "--runs", "1", "--out", str(out)]) == 0
    rows = read_csv(out / "sweep.csv")
    assert list(rows[0]) == ["L", "estimator", "avg_mse", "avg_acee"]
    assert [(r["L"], r["estimator"]) for r in rows] == [
        ("1", "dwlse"), ("1", "cif"), ("4", "dwlse"), ("4", "cif")
    ]
    assert "L=4" in capsys.readouterr().out


def test_sweep_rejects_bad_iters(short_scenario, tmp_path):
    with pytest.raises(SystemExit):
        main(["sweep", "--scenario", str(short_scenario), "--iters", "0,3", "--out", str(tmp_path)])


def test_topology_bundled(capsys):
    assert main(["topology", "--scenario", "tracking20"]) == 0
    topo = from_edge_list(capsys.readouterr().out, 20)
    assert topo == build_topology(tracking20())


def test_scenario_dump(capsys):
    assert main(["scenario", "--scenario", "tracking20", "--seed", "17"]) == 0
    cfg = loads_scenario(capsys.readouterr().out)
    assert cfg.master_seed == 17 and cfg.runs == 100


def test_missing_scenario(capsys):
    assert main(["topology", "--scenario", "no_such_scenario"]) == 2
    assert "no scenario file" in capsys.readouterr().err
