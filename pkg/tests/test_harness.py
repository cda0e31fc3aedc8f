import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from dispersive_lab import cli
from dispersive_lab.config import OUT_ENV, ConfigError, ExperimentConfig, load_config, output_dir, parse_config
from dispersive_lab.evolve import SolverConfig, solve
from dispersive_lab.experiments import (_dependence_task, cauchy_pair, gaussian_packet, initial_data,
                                        random_perturbation, run, run_mollifier_rates)
from dispersive_lab.io import (MAGIC_BYTES, atomic_write, read_csv, read_snapshots, snapshots_bytes,
                               write_snapshots)
from dispersive_lab.mollifier import DEFAULT_PROFILE, verify_rates
from dispersive_lab.nonlin import builtin
from dispersive_lab.spectral import Grid, sobolev_norm_sq

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
SHRO = builtin("4shro", nu=1.0, mu=(1.0,) * 6)

SMALL_SOLVE = """
[experiment]
name = solve
snapshots = true
[grid]
half_width = 16
points = 128
[solver]
dt = 1e-3
T = 0.02
stride = {stride}
"""

SMALL_LIMIT = """
[experiment]
name = parabolic-limit
jobs = {jobs}
[grid]
points = 128
[solver]
dt = 1e-3
T = 0.02
stride = 5
[sweep]
eps = 2^-2, 2^-3, 2^-4, 2^-5
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def cli_run(args):
    return cli.main([str(a) for a in args])


# ------------------------------------------------------------ config

def test_config_parsing_and_defaults():
    cfg = parse_config("[experiment]\nname = cauchy-rates\nseed = 4\n[sweep]\nnu = 2^-2, 2^-3  # dyadic\n")
    assert cfg.seed == 4 and cfg.sweep["nu"] == [0.25, 0.125]
    assert cfg.grid == {"half_width": 16.0, "points": 512}
    assert cfg.system == {"builtin": "4shro"}


@pytest.mark.parametrize("text", [
    "[experiment]\nname = nope\n",
    "[grid]\npoints = 64\n",
    "[experiment]\nname = solve\n[grid]\nbogus = 1\n",
    "[experiment]\nname = solve\n[grid]\npoints = many\n",
    "[experiment]\nname = solve\n[sweep]\neps = 0.1, 0.3, 0.2\n",
    "[experiment]\nname = solve\njobs = 0\n",
    "[experiment]\nname = solve\n[system]\nfspec = missing.fspec\n",
    "[experiment\nname = solve\n",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_shipped_configs_load():
    names = set()
    for p in sorted(CONFIGS.glob("*.ini")):
        names.add(load_config(p).name)
    assert names == set(cli.EXPERIMENTS)


def test_output_dir_precedence(tmp_path, monkeypatch):
    cfg = ExperimentConfig("solve", out=str(tmp_path / "cfg"))
    monkeypatch.delenv(OUT_ENV, raising=False)
    assert output_dir(cfg) == tmp_path / "cfg"
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert output_dir(cfg) == tmp_path / "env"
    assert output_dir(cfg, tmp_path / "flag") == tmp_path / "flag"


# ------------------------------------------------------------ CLI exit codes

def test_cli_exit_codes(tmp_path):
    assert cli_run(["validate", "--config", CONFIGS / "validate_grassmannian.ini", "--out", tmp_path / "a"]) == 0
    rep = json.loads((tmp_path / "a" / "run.json").read_text())
    assert rep["verdict"] == "PASS" and all(c["verdict"] == "PASS" for c in rep["checks"])

    write(tmp_path, "bad.fspec", "n=1; F1[1] = w1^3;")
    cfg = write(tmp_path, "bad.ini", "[experiment]\nname = validate\n[system]\nfspec = bad.fspec\n")
    assert cli_run(["validate", "--config", cfg, "--out", tmp_path / "b"]) == 1
    rows = read_csv(tmp_path / "b" / "series.csv")
    assert rows[0]["target"] == "F1[1]" and rows[0]["accepted"] == "false"

    write(tmp_path, "broken.fspec", "n=1; F2[1] = w1;")
    cfg = write(tmp_path, "broken.ini", "[experiment]\nname = validate\n[system]\nfspec = broken.fspec\n")
    assert cli_run(["validate", "--config", cfg, "--out", tmp_path / "c"]) == 2
    assert cli_run(["validate", "--config", tmp_path / "missing.ini"]) == 2
    assert cli_run(["solve", "--config", CONFIGS / "validate_grassmannian.ini"]) == 2
    cfg = write(tmp_path, "budget.ini", "[experiment]\nname = solve\n[solver]\ndt = 0.5\nT = 1\n")
    assert cli_run(["solve", "--config", cfg, "--out", tmp_path / "d"]) == 2


def test_cli_bad_arguments():
    with pytest.raises(SystemExit) as ei:
        cli.main(["frobnicate"])
    assert ei.value.code == 2


def test_console_script(tmp_path):
    exe = shutil.which("dispersive-lab")
    cmd = [exe] if exe else [sys.executable, "-m", "dispersive_lab.cli"]
    out = subprocess.run(cmd + ["validate", "--config", str(CONFIGS / "validate_grassmannian.ini"),
                                "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert "PASS" in out.stdout


# ------------------------------------------------------------ experiments

def test_solve_stride_zero(tmp_path):
    cfg = write(tmp_path, "s.ini", SMALL_SOLVE.format(stride=0))
    assert cli_run(["solve", "--config", cfg, "--out", tmp_path / "o"]) == 0
    rows = read_csv(tmp_path / "o" / "series.csv")
    assert [float(r["t"]) for r in rows] == [0.0, 0.02]


def test_solve_fspec_config(tmp_path):
    assert cli_run(["solve", "--config", CONFIGS / "solve_fspec.ini", "--out", tmp_path]) == 0


def test_mollifier_delegation():
    cfg = parse_config("[experiment]\nname = mollifier-rates\n[grid]\nhalf_width = 8\npoints = 1024\n"
                       "[data]\nwidth = 0.125\nwavenumbers = 10\n"
                       "[sweep]\neps = 2^-3, 2^-4, 2^-5, 2^-6\n")
    res = run_mollifier_rates(cfg)
    Q0 = initial_data(cfg, 1)
    assert res.details["report"] == verify_rates(Q0, 4, cfg.sweep["eps"]).to_dict()


def _linear_cfg(T=0.05):
    return SolverConfig(points=256, dt=1e-3, T=T, stride=0)


def test_cauchy_degenerate_pair():
    Q0 = gaussian_packet(Grid(16.0, 256), 1, 0.1)
    out = cauchy_pair(Q0, SHRO, _linear_cfg(), 0.25, 0.25, 4)
    assert out["d1"] == 0 and out["dm"] == 0 and out["data_floor"] == 0


def test_cauchy_linear_closed_form():
    spec = SHRO.linear()
    scfg = _linear_cfg()
    g = scfg.grid
    Q0 = gaussian_packet(g, 1, 0.1, 1.0, [2.0])
    nu, mu = 0.25, 0.125
    out = cauchy_pair(Q0, spec, scfg, nu, mu, 4)
    xi = g.wavenumbers

    def exact(eps, t):
        s = -(eps**5) * xi**4 + 1j * (xi**4 - xi**2)
        s[g.nyquist] = -(eps**5) * xi[g.nyquist] ** 4 + 1j * (xi[g.nyquist] ** 4 - xi[g.nyquist] ** 2)
        return np.exp(s * t) * DEFAULT_PROFILE(eps * xi) * Q0.hat

    for key, k in (("d1", 1), ("dm", 4)):
        ref = max(np.sqrt(sobolev_norm_sq(exact(mu, t) - exact(nu, t), g, k)) for t in (0.0, scfg.T))
        assert abs(out[key] - ref) <= 1e-10 * ref


def test_dependence_zero_delta_and_linear_isometry():
    scfg = _linear_cfg()
    g = scfg.grid
    Q0 = gaussian_packet(g, 1, 0.1)
    P = random_perturbation(g, 1, 4, 3)
    assert np.sqrt(sobolev_norm_sq(P.hat, g, 4)) == pytest.approx(1.0, rel=1e-12)
    assert _dependence_task((Q0, P, SHRO, scfg, 0.0, 4))["distance"] == 0.0
    for delta in (1e-2, 1e-3):
        d = _dependence_task((Q0, P, SHRO.linear(), scfg, delta, 4))["distance"]
        assert d == pytest.approx(delta, rel=1e-10)


def test_determinism_and_serial_vs_concurrent(tmp_path):
    serial = write(tmp_path, "serial.ini", SMALL_LIMIT.format(jobs=1))
    pooled = write(tmp_path, "pooled.ini", SMALL_LIMIT.format(jobs=2))
    assert cli_run(["parabolic-limit", "--config", serial, "--out", tmp_path / "a"]) == 0
    assert cli_run(["parabolic-limit", "--config", serial, "--out", tmp_path / "b"]) == 0
    assert cli_run(["parabolic-limit", "--config", pooled, "--out", tmp_path / "c"]) == 0
    a = (tmp_path / "a" / "series.csv").read_bytes()
    assert a == (tmp_path / "b" / "series.csv").read_bytes() == (tmp_path / "c" / "series.csv").read_bytes()
    ja, jb = (tmp_path / "a" / "run.json").read_bytes(), (tmp_path / "b" / "run.json").read_bytes()
    assert ja == jb


def test_verdicts_recomputable_from_series(tmp_path):
    cfg = write(tmp_path, "l.ini", SMALL_LIMIT.format(jobs=1))
    cli_run(["parabolic-limit", "--config", cfg, "--out", tmp_path])
    rows = read_csv(tmp_path / "series.csv")
    dist = [float(r["distance"]) for r in rows]
    rep = json.loads((tmp_path / "run.json").read_text())
    decreasing = all(b < a for a, b in zip(dist, dist[1:]))
    assert rep["checks"][0]["verdict"] == ("PASS" if decreasing else "FAIL")


# ------------------------------------------------------------ io

def test_snapshot_round_trip(tmp_path):
    cfg = write(tmp_path, "s.ini", SMALL_SOLVE.format(stride=5))
    assert cli_run(["solve", "--config", cfg, "--out", tmp_path / "o"]) == 0
    path = tmp_path / "o" / "snapshots.bin"
    raw = path.read_bytes()
    assert raw[:8] == MAGIC_BYTES
    header = np.frombuffer(raw[:48], dtype="<f8")
    assert header[1:].tolist() == [1.0, 1.0, 128.0, 16.0, 5.0]
    times, fields = read_snapshots(path)
    cfg_obj = load_config(cfg)
    tr = run(cfg_obj).trajectory
    assert times == list(tr.times)
    for a, b in zip(fields, tr.fields):
        np.testing.assert_array_equal(a.values, b.values)
    write_snapshots(tmp_path / "again.bin", tr)
    assert (tmp_path / "again.bin").read_bytes() == raw
    with pytest.raises(ValueError):
        snapshots_bytes([], [])
    (tmp_path / "junk.bin").write_bytes(b"x" * 64)
    with pytest.raises(ValueError):
        read_snapshots(tmp_path / "junk.bin")
    (tmp_path / "cut.bin").write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        read_snapshots(tmp_path / "cut.bin")


def test_atomic_write(tmp_path):
    target = tmp_path / "out" / "file.txt"
    atomic_write(target, "first")
    assert target.read_text() == "first"
    assert oct(target.stat().st_mode & 0o777) == oct(0o644)

    class Boom:
        pass

    with pytest.raises(TypeError):
        atomic_write(target, Boom())
    assert target.read_text() == "first"
    assert sorted(os.listdir(target.parent)) == ["file.txt"]
