import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from fractalfn import __version__
from fractalfn.cli import main
from fractalfn.config import ConfigError, config_hash, load_schema, parse_config

ROOT = Path(__file__).resolve().parents[1]

FIG1 = {
    "seed": {"builtin": "fig1"},
    "partition": {"uniform": 10},
    "scaling": {"uniform": 0.9},
    "base": {"kind": "profile"},
}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def run(args, capsys):
    code = main([str(a) for a in args])
    return code, capsys.readouterr().out


def test_shipped_schema_copies_match():
    docs = json.loads((ROOT / "docs" / "config-schema.json").read_text())
    assert docs == load_schema()


def test_parse_defaults():
    cfg = parse_config(FIG1)
    assert cfg.interval.lo == 0.0 and cfg.interval.hi == 1.0
    assert cfg.grid_M == 2**14 + 1
    assert cfg.partition.subinterval_count == 10
    assert len(cfg.hash) == 64


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config({**FIG1, "colour": "red", "base": {"kind": "profile", "power": 2}})
    paths = [e["path"] for e in err.value.errors]
    assert "" in paths and "/base" in paths


def test_every_violation_reported_at_once():
    bad = {
        "seed": {"builtin": "nope"},
        "partition": {"nodes": [0.0, 0.7, 0.4, 1.0]},
        "scaling": {"uniform": 1.5},
        "base": {"kind": "bernstein", "degree": 0},
    }
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    paths = {e["path"] for e in err.value.errors}
    assert {"/seed/builtin", "/scaling/uniform", "/base/degree", "/partition"} <= paths


def test_scaling_length_must_match():
    with pytest.raises(ConfigError) as err:
        parse_config({**FIG1, "scaling": {"values": [0.5, 0.5]}})
    assert err.value.errors[0]["path"] == "/scaling/values"


def test_config_hash_is_order_independent():
    a = {"x": 1, "y": [1, 2]}
    b = {"y": [1, 2], "x": 1}
    assert config_hash(a) == config_hash(b)


def test_render_fig1(tmp_path, capsys):
    cfg = write(tmp_path, {**FIG1, "render": {"quotient": True}})
    code, out = run(["render", "--config", cfg, "--out", tmp_path, "--svg"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["version"] == __version__
    assert report["config_hash"] == config_hash(json.loads(cfg.read_text()))
    raw = (tmp_path / "graph.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "x,f,b,f_alpha"
    assert len(lines) == 2**14 + 2
    quot = np.loadtxt(tmp_path / "quotient.csv", delimiter=",", skiprows=1)
    assert np.all(quot[:, 4] > 0)
    np.testing.assert_allclose(quot[:, 5], quot[:, 3] / quot[:, 4])
    graph = np.loadtxt(tmp_path / "graph.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(quot[:, 1] / quot[:, 2], graph[:, 1], atol=1e-12)
    svg = (tmp_path / "graph.svg").read_text()
    assert 'viewBox="0 0 1000 600"' in svg and "<polyline" in svg


def test_render_is_deterministic(tmp_path, capsys):
    cfg = write(tmp_path, {**FIG1, "grid_M": 2049})
    for d in ("a", "b"):
        assert run(["render", "--config", cfg, "--out", tmp_path / d], capsys)[0] == 0
    assert (tmp_path / "a" / "graph.csv").read_bytes() == (tmp_path / "b" / "graph.csv").read_bytes()
    assert (tmp_path / "a" / "render.json").read_bytes() == (tmp_path / "b" / "render.json").read_bytes()


def test_csv_full_precision(tmp_path, capsys):
    cfg = write(tmp_path, {**FIG1, "grid_M": 33})
    run(["render", "--config", cfg, "--out", tmp_path], capsys)
    row = (tmp_path / "graph.csv").read_text().splitlines()[5].split(",")
    x = float(row[0])
    assert x == 4 / 32
    assert float(row[1]) == float(f"{float(row[1]):.17g}")


def test_render_alpha_zero(tmp_path, capsys):
    cfg = write(tmp_path, {**FIG1, "scaling": {"uniform": 0.0}, "grid_M": 1025})
    assert run(["render", "--config", cfg, "--out", tmp_path], capsys)[0] == 0
    g = np.loadtxt(tmp_path / "graph.csv", delimiter=",", skiprows=1)
    assert np.max(np.abs(g[:, 3] - g[:, 1])) <= 1e-12


def test_grid_override(tmp_path, capsys):
    cfg = write(tmp_path, FIG1)
    code, out = run(["render", "--config", cfg, "--out", tmp_path, "--grid", "257"], capsys)
    assert code == 0 and json.loads(out)["rows"] == 257


def test_dimension_command(tmp_path, capsys):
    code, out = run(["dimension", "--config", write(tmp_path, FIG1), "--out", tmp_path], capsys)
    assert code == 0
    assert json.loads(out)["theoretical_D"] == pytest.approx(1 + math.log10(9), abs=1e-10)
    low = {**FIG1, "scaling": {"uniform": 0.1}}
    code, out = run(["dimension", "--config", write(tmp_path, low), "--out", tmp_path], capsys)
    assert json.loads(out)["theoretical_D"] == 1.0


def test_dimension_of_flat_seed_near_one(tmp_path, capsys):
    cfg = {
        "seed": {"trig": {"a0": 0.0, "a": [0.0], "b": [0.0]}},
        "interval": [0.0, 1.0],
        "partition": {"uniform": 4},
        "scaling": {"uniform": 0.0},
        "base": {"kind": "bernstein", "degree": 3},
        "dimension": {"estimate": True},
    }
    code, out = run(["dimension", "--config", write(tmp_path, cfg), "--out", tmp_path], capsys)
    assert code == 0
    assert json.loads(out)["estimator_D"] == pytest.approx(1.0, abs=0.05)


def test_verify_alpha_zero_smoke(tmp_path, capsys):
    cfg = {
        "seed": {"builtin": "exp01"},
        "partition": {"uniform": 5},
        "scaling": {"uniform": 0.0},
        "base": {"kind": "bernstein", "degree": 4},
        "grid_M": 1025,
    }
    code, out = run(["verify", "--config", write(tmp_path, cfg), "--out", tmp_path], capsys)
    assert code == 0
    checks = json.loads(out)["checks"]
    assert checks and all(abs(c["lhs"]) <= 1e-15 for c in checks)


def test_verify_endpoint_mismatch_is_config_error(tmp_path, capsys):
    cfg = {
        "seed": {"builtin": "sin"},
        "partition": {"uniform": 4},
        "scaling": {"uniform": 0.3},
        "base": {"kind": "explicit", "function": {"trig": {"a0": 1.0}}},
    }
    code, out = run(["verify", "--config", write(tmp_path, cfg), "--out", tmp_path], capsys)
    assert code == 2
    body = json.loads(out)
    assert body["error"] == "config_validation"
    assert body["violations"][0]["path"] == "/base/function"


def test_invalid_json_is_config_error(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert run(["render", "--config", p, "--out", tmp_path], capsys)[0] == 2


def test_non_convergence_exit_code(tmp_path, capsys):
    cfg = {**FIG1, "max_iter": 2, "grid_M": 1001}
    code, out = run(["render", "--config", write(tmp_path, cfg), "--out", tmp_path], capsys)
    assert code == 3
    assert json.loads(out)["error"] == "non_convergence"


def test_minimax_table(tmp_path, capsys):
    cfg = {
        **FIG1,
        "scaling": {"uniform": 0.3},
        "minimax": {
            "degrees": [[2, 0], [2, 1]],
            "jackson": [4, 8],
            "corpus": [{"builtin": "sin"}, {"trig": {"a0": 0.0, "a": [0.0, 0.0, 1.0]}}],
        },
    }
    code, out = run(["minimax", "--config", write(tmp_path, cfg), "--out", tmp_path], capsys)
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[0]["e_proxy"] <= 1e-9
    cos3 = [r for r in rows if r["function"] == "trig" and r["n"] == 0][0]
    assert cos3["e_proxy"] == pytest.approx(1.0, abs=1e-3)
    assert all(r["witness"] <= r["fractal_bound"] + 1e-4 for r in rows)
    table = (tmp_path / "minimax.csv").read_text().splitlines()
    assert table[0].startswith("function,m,n,e_proxy,fractal_bound,witness,jackson_bound")
    assert len(table) == 1 + len(rows)


def test_full_suite_deterministic_and_thread_independent(tmp_path, capsys, monkeypatch):
    outs = []
    for threads, d in (("4", "a"), ("1", "b"), ("4", "c")):
        monkeypatch.setenv("FRACTALFN_THREADS", threads)
        code, out = run(["verify", "--suite", "full", "--out", tmp_path / d], capsys)
        assert code == 0
        outs.append((tmp_path / d / "verify.json").read_bytes())
    assert outs[0] == outs[1] == outs[2]
    report = json.loads(outs[0])
    assert report["n_checks"] >= 12 and report["passed"]


def test_console_entry_point(tmp_path):
    cfg = write(tmp_path, FIG1)
    proc = subprocess.run(
        [sys.executable, "-m", "fractalfn.cli", "dimension", "--config", str(cfg), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "theoretical_D" in proc.stdout
