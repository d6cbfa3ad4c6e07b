"""``fractalfn`` command line: render, dimension, verify, minimax.

Exit codes: 0 success, 1 verification failure, 2 config error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .approx import fractal_minimax_bound, jackson_error_report
from .config import ConfigError, config_hash, load_config
from .core import ConvergenceError, InvariantError
from .dimension import dimension_report
from .fractal import FractalSpec, alpha_fractal
from .report import all_passed
from .spaces import quadratic_profile
from .verify import run_full_suite, verify_config

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3
SVG_W, SVG_H = 1000, 600


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no inf/nan
        return v if math.isfinite(v) else repr(v)
    return obj


def dumps(payload: dict) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


def _write(path: Path, text: str):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def write_csv(path: Path, header, columns):
    rows = [",".join(header)]
    for row in zip(*columns):
        rows.append(",".join(_fmt(v) for v in row))
    _write(path, "\n".join(rows) + "\n")


def svg_polyline(x, ys) -> str:
    """Static polyline plot in a 1000x600 viewport, one polyline per series."""
    x = np.asarray(x, dtype=float)
    lo = min(float(np.min(y)) for y in ys)
    hi = max(float(np.max(y)) for y in ys)
    span_y = hi - lo if hi > lo else 1.0
    span_x = float(x[-1] - x[0])
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
        f'viewBox="0 0 {SVG_W} {SVG_H}">'
    ]
    for k, y in enumerate(ys):
        px = (x - x[0]) / span_x * SVG_W
        py = SVG_H - (np.asarray(y, dtype=float) - lo) / span_y * SVG_H
        pts = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(px, py))
        colour = "black" if k == len(ys) - 1 else "gray"
        lines.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1" points="{pts}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _header(cfg_hash: str, command: str) -> dict:
    return {"command": command, "config_hash": cfg_hash, "version": __version__}


def _fractal(cfg, seed_values, base=None):
    spec = FractalSpec(seed_values, cfg.partition, cfg.scaling, base or cfg.base)
    return alpha_fractal(spec, tol=cfg.tol, max_iter=cfg.max_iter, method=cfg.method)


def cmd_render(cfg, out: Path, svg: bool = False) -> dict:
    f = cfg.seed_values()
    res = _fractal(cfg, f)
    x = f.grid
    write_csv(out / "graph.csv", ("x", "f", "b", "f_alpha"), (x, f.values, res.base.values, res.values.values))
    files = ["graph.csv"]
    if svg or cfg.render.get("svg"):
        _write(out / "graph.svg", svg_polyline(x, [f.values, res.values.values]))
        files.append("graph.svg")
    report = {"iterations": res.iterations, "certified_gap": res.certified_gap, "rows": int(x.size)}
    if cfg.render.get("quotient"):
        p_fn, q_fn = cfg.seed.parts
        # the same base operator acts on p and q separately
        p = f.with_values(np.asarray(p_fn(x), dtype=float))
        q = f.with_values(np.asarray(q_fn(x), dtype=float))
        pa, qa = _fractal(cfg, p).values.values, _fractal(cfg, q).values.values
        qmin = float(np.min(qa))
        if not qmin > 0.0:
            raise InvariantError(f"fractal denominator q^alpha is not positive (min {qmin:.3g})")
        write_csv(
            out / "quotient.csv",
            ("x", "p", "q", "p_alpha", "q_alpha", "quotient"),
            (x, p.values, q.values, pa, qa, pa / qa),
        )
        files.append("quotient.csv")
        report["q_alpha_min"] = qmin
    report["files"] = files
    return report


def cmd_dimension(cfg) -> dict:
    dim = cfg.dimension
    graph = None
    kw = {}
    if dim.get("estimate"):
        graph = _fractal(cfg, cfg.seed_values()).values
        kw = {k: dim[k] for k in ("min_scale", "max_scale", "n_scales", "count") if k in dim}
    rep = dimension_report(cfg.scaling, cfg.partition, graph=graph, seed=cfg.seed_values(), **kw)
    return rep.to_dict()


def cmd_minimax(cfg, out: Path) -> dict:
    mm = cfg.minimax
    grid = int(mm["grid"])
    rows = []
    for fs in cfg.corpus:
        f = fs.sample(cfg.interval if fs.default_interval is None else fs.default_interval, grid + 1)
        L = quadratic_profile(f.interval)
        for m, n in mm["degrees"]:
            b = fractal_minimax_bound(f, m, n, cfg.scaling, L, grid_M=grid, tol=cfg.tol)
            jack = [jackson_error_report(f, k) for k in mm["jackson"]]
            rows.append(
                {
                    "function": fs.label,
                    "m": m,
                    "n": n,
                    "e_proxy": b.e_proxy,
                    "fractal_bound": b.bound,
                    "witness": b.witness,
                    "witness_ok": b.check.passed,
                    "jackson": {str(k): {"actual": a, "bound": j} for k, (a, j, _) in zip(mm["jackson"], jack)},
                    "flags": b.flags,
                }
            )
    lines = ["function,m,n,e_proxy,fractal_bound,witness,jackson_bound,flags"]
    for r in rows:
        jb = min(v["bound"] for v in r["jackson"].values()) if r["jackson"] else float("nan")
        lines.append(
            ",".join(
                [r["function"], str(r["m"]), str(r["n"]), _fmt(r["e_proxy"]), _fmt(r["fractal_bound"]),
                 _fmt(r["witness"]), _fmt(jb), ";".join(r["flags"])]
            )
        )
    _write(out / "minimax.csv", "\n".join(lines) + "\n")
    return {"rows": rows, "all_witness_ok": all(r["witness_ok"] for r in rows)}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fractalfn", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fractalfn {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("render", "dimension", "verify", "minimax"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON experiment config")
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory")
        sp.add_argument("--grid", type=int, help="override grid_M")
        sp.add_argument("--svg", action="store_true", help="also write graph.svg (render)")
        if name == "verify":
            sp.add_argument("--suite", choices=["full"], help="run the builtin fixture suite")
    return p


def _emit(out: Path | None, name: str, payload: dict):
    text = dumps(payload)
    if out is not None:
        _write(out / name, text)
    sys.stdout.write(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out = args.out
    if args.command == "verify" and args.suite == "full":
        checks = run_full_suite()
        ok = all_passed(checks)
        payload = {
            **_header(config_hash({"suite": "full"}), "verify"),
            "suite": "full",
            "n_checks": len(checks),
            "passed": ok,
            "checks": [c.to_dict() for c in checks],
        }
        out.mkdir(parents=True, exist_ok=True)
        _emit(out, "verify.json", payload)
        return EXIT_OK if ok else EXIT_VERIFY
    if args.config is None:
        _parser().error("--config is required")
    try:
        cfg = load_config(args.config)
        if args.grid is not None:
            if args.grid < 2 * cfg.partition.subinterval_count + 1:
                raise ConfigError([{"path": "--grid", "message": "grid too small for the partition"}])
            cfg.grid_M = args.grid
    except ConfigError as exc:
        sys.stdout.write(dumps({**_header("", args.command), **exc.to_dict()}))
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"fractalfn: cannot read config: {exc}\n")
        return EXIT_CONFIG
    head = _header(cfg.hash, args.command)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "render":
            body = cmd_render(cfg, out, args.svg)
            code = EXIT_OK
        elif args.command == "dimension":
            body = cmd_dimension(cfg)
            code = EXIT_OK
        elif args.command == "minimax":
            body = cmd_minimax(cfg, out)
            code = EXIT_OK
        else:
            checks = verify_config(cfg)
            body = {"n_checks": len(checks), "passed": all_passed(checks), "checks": [c.to_dict() for c in checks]}
            code = EXIT_OK if body["passed"] else EXIT_VERIFY
    except ConvergenceError as exc:
        _emit(out, "error.json", {**head, "error": "non_convergence", "message": str(exc),
                                  "final_step": exc.final_step, "iterations": exc.iterations})
        return EXIT_CONVERGENCE
    except InvariantError as exc:
        _emit(out, "error.json", {**head, "error": "invariant", "message": str(exc)})
        return EXIT_VERIFY
    _emit(out, f"{args.command}.json", {**head, **body})
    return code


if __name__ == "__main__":
    sys.exit(main())
