import hashlib
import json
import os

import numpy as np
import pytest

from floquet1d.cli import run_command, emit_csv, RunConfig
from floquet1d.errors import ConfigError

FREE_CFG = {
    "operator": {"n": 1, "coefficients": [[]]},
    "mu_range": [-1.0, 26.0],
    "grid_density": 64,
    "tolerances": {"ode_tol": 1e-10},
    "test_function": {"kind": "bump", "center": 0.3, "width": 1.0,
                      "support_radius": 4.0},
    "mesh_N": 8,
}


def _write_cfg(tmp_path, doc=FREE_CFG):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    return str(p)


def _manifest(out):
    with open(os.path.join(out, "run_manifest.json")) as fh:
        return json.load(fh)


def test_bands_free_hill(tmp_path):
    cfg = _write_cfg(tmp_path)
    out = str(tmp_path / "out")
    assert run_command(["bands", "--config", cfg, "--out", out]) == 0
    lines = open(os.path.join(out, "bands.csv")).read().splitlines()
    assert lines[0] == "k,j,mu_lo,mu_hi,t_lo,t_hi,orientation,degenerate"
    rows = [ln.split(",") for ln in lines[1:]]
    edges = sorted({float(r[2]) for r in rows} | {float(r[3]) for r in rows})
    for ref in (0.0, 1.0, 4.0, 9.0):
        assert min(abs(e - ref) for e in edges) < 1e-8
    # sorted by (k, j)
    kj = [(int(r[0]), int(r[1])) for r in rows]
    assert kj == sorted(kj)
    man = _manifest(out)
    for name, digest in man["files"].items():
        with open(os.path.join(out, name), "rb") as fh:
            assert hashlib.sha256(fh.read()).hexdigest() == digest


def test_multipliers_deterministic(tmp_path):
    cfg = _write_cfg(tmp_path)
    outs = []
    for tag, threads in (("a", "1"), ("b", "4")):
        out = str(tmp_path / tag)
        assert run_command(["multipliers", "--config", cfg, "--out", out,
                            "--threads", threads]) == 0
        outs.append(open(os.path.join(out, "branches.csv"), "rb").read())
    assert outs[0] == outs[1]
    head = outs[0].decode().splitlines()[0]
    assert head == "mu,k,rho_re,rho_im,abs_rho"


def test_parseval_manifest(tmp_path):
    cfg = _write_cfg(tmp_path)
    out = str(tmp_path / "out")
    assert run_command(["parseval", "--config", cfg, "--out", out]) == 0
    man = _manifest(out)
    assert man["results"]["parseval"]["rel_err"] <= 1e-3
    assert man["subcommand"] == "parseval"
    assert "numpy" in man["versions"] and "wall_time_s" in man


def test_oracle_subcommand(tmp_path):
    cfg = _write_cfg(tmp_path)
    out = str(tmp_path / "out")
    assert run_command(["oracle", "mathieu-edges", "--config", cfg,
                        "--out", out]) == 0
    lines = open(os.path.join(out, "oracle_edges.csv")).read().splitlines()
    assert lines[0] == "index,mu"
    assert float(lines[1].split(",")[1]) == pytest.approx(-0.4551386, abs=1e-6)
    assert run_command(["oracle", "bogus", "--config", cfg,
                        "--out", out]) == 2


def test_config_errors(tmp_path):
    out = str(tmp_path / "out")
    assert run_command(["bands", "--config", str(tmp_path / "missing.json"),
                        "--out", out]) == 2
    bad = dict(FREE_CFG, grid_density=4)
    assert run_command(["bands", "--config", _write_cfg(tmp_path, bad),
                        "--out", out]) == 2
    bad = dict(FREE_CFG, mu_range=[5.0, 5.0])
    assert run_command(["bands", "--config", _write_cfg(tmp_path, bad),
                        "--out", out]) == 2


def test_computational_failure_exit_code(tmp_path):
    # mu_range far beyond the supported growth range -> refusal -> exit 1
    bad = dict(FREE_CFG, mu_range=[-1e8, 1.0])
    out = str(tmp_path / "out")
    assert run_command(["multipliers", "--config", _write_cfg(tmp_path, bad),
                        "--out", out]) == 1


def test_emit_csv_schema_checks(tmp_path):
    p = str(tmp_path / "x.csv")
    with pytest.raises(ConfigError):
        emit_csv(p, "nope", [])
    with pytest.raises(ConfigError):
        emit_csv(p, "reconstruction", [(1.0, 2.0)])
    emit_csv(p, "reconstruction", [])
    assert open(p).read() == "x,f_re,f_im\n"
    emit_csv(p, "reconstruction", [(np.pi, 1.0, 0.0)])
    assert open(p).read().splitlines()[1].startswith("3.1415926535897931,")


def test_runconfig_validation():
    with pytest.raises(ConfigError):
        RunConfig({"operator": {"n": 1}, "tolerances": {"ode_tol": 1.0}})
    with pytest.raises(ConfigError):
        RunConfig({"operator": {"n": 1}, "mesh_N": 1})
    cfg = RunConfig({"operator": {"n": 1}})
    assert cfg.grid_density >= 16
