import subprocess
import sys

import numpy as np
import pytest

from rmhd_ap.cli import main
from rmhd_ap.driver import read_csv
from rmhd_ap.scenarios import PRESETS, dumps, preset


def test_presets_lists_all(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in PRESETS)


def test_run_writes_frames(tmp_path, capsys):
    out = tmp_path / "bw.csv"
    rc = main(["run", "--scenario", "brio-wu", "--nx", "20", "--t-end", "0.02",
               "--frames", "0.01", "--out", str(out)])
    assert rc == 0
    assert read_csv(out).nx == 20
    assert len(list(tmp_path.glob("bw.frame*.csv"))) == 2
    assert "steps=" in capsys.readouterr().out


def test_run_from_config_file(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(dumps(preset("brio-wu").with_(nx=12, t_end=0.01)))
    assert main(["run", "--scenario", str(cfg), "--out", str(tmp_path / "o.csv")]) == 0
    assert read_csv(tmp_path / "o.csv").nx == 12


def test_unknown_scenario_exit_code(tmp_path, capsys):
    assert main(["run", "--scenario", "nope", "--out", str(tmp_path / "o.csv")]) == 2
    assert capsys.readouterr().err.startswith("error: kind=KeyError")


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("preset = brio-wu\nwibble = 1\n")
    assert main(["run", "--scenario", str(cfg), "--out", str(tmp_path / "o.csv")]) == 2
    assert "kind=ConfigurationError" in capsys.readouterr().err


def test_solver_failure_exit_code(tmp_path, capsys):
    rc = main(["run", "--scenario", "opaque-blob", "--nx", "100", "--dt", "0.01",
               "--t-end", "0.02", "--out", str(tmp_path / "o.csv")])
    assert rc == 3
    err = capsys.readouterr().err
    assert err.startswith("error: kind=SolverError step=") and " t=" in err


def test_converge(tmp_path, capsys):
    rc = main(["converge", "--scenario", "brio-wu", "--nx-list", "10,20,40", "--cfl", "0.2",
               "--out", str(tmp_path / "c.csv")])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 and "order" in lines[1]


def test_threads_env_and_module_entry(tmp_path):
    env = {"RMHD_THREADS": "1", "PATH": "/usr/bin:/bin"}
    import os
    env = {**os.environ, **env}
    p = subprocess.run([sys.executable, "-m", "rmhd_ap", "presets"], capture_output=True,
                       text=True, env=env)
    assert p.returncode == 0 and "brio-wu" in p.stdout


def test_argparse_rejects_bad_lists(tmp_path):
    with pytest.raises(SystemExit):
        main(["converge", "--scenario", "brio-wu", "--nx-list", "a,b", "--out", "x"])
    with pytest.raises(SystemExit):
        main(["run", "--scenario", "brio-wu", "--cfl", "1", "--dt", "1", "--out", "x"])
