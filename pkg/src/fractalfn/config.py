"""JSON experiment configs: schema validation, semantic checks, object building.

Every violation found is collected into one ``ConfigError`` so a user sees the
whole list at once. Schema problems are reported first; semantic checks (node
order, scaling length, base endpoint agreement, denominator sign) run on
whatever passed the schema.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np
from jsonschema.exceptions import best_match

from .core import Interval, InvariantError, Partition, SampledFunction, ScalingVector
from .seeds import fig1_parts, get_seed
from .spaces import (
    PERIODIC,
    BaseOperator,
    Bernstein,
    Explicit,
    RationalTrig,
    TrigPoly,
    power_map,
    quadratic_profile,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "FunctionSpec",
    "load_schema",
    "load_config",
    "parse_config",
    "config_hash",
]

DEFAULT_GRID = 2**14 + 1
_DEFAULT_MINIMAX = {
    "degrees": [[2, 0], [2, 2]],
    "bernstein": [4, 8, 16, 32],
    "jackson": [2, 4, 8, 16],
    "grid": 4096,
}


class ConfigError(ValueError):
    """Invalid config; ``errors`` lists every violation as {path, message}."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f"{e['path'] or '/'}: {e['message']}" for e in self.errors]
        super().__init__("invalid config:\n  " + "\n  ".join(lines))

    def to_dict(self) -> dict:
        return {"error": "config_validation", "violations": self.errors}


def load_schema() -> dict:
    text = resources.files("fractalfn").joinpath("data/config-schema.json").read_text()
    return json.loads(text)


def config_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass(frozen=True)
class FunctionSpec:
    """A seed or explicit base function and, for quotients, its two parts."""

    label: str
    fn: Callable
    default_interval: Interval | None = None
    parts: tuple | None = None
    rational: RationalTrig | None = None

    def sample(self, interval: Interval, M: int) -> SampledFunction:
        return SampledFunction.from_callable(self.fn, interval, M)


@dataclass
class ExperimentConfig:
    raw: dict
    seed: FunctionSpec
    interval: Interval
    partition: Partition
    scaling: ScalingVector
    base: BaseOperator
    base_spec: dict
    grid_M: int = DEFAULT_GRID
    tol: float | None = None
    max_iter: int = 10000
    method: str = "picard"
    render: dict = field(default_factory=dict)
    dimension: dict = field(default_factory=dict)
    minimax: dict = field(default_factory=dict)
    corpus: list = field(default_factory=list)

    @property
    def hash(self) -> str:
        return config_hash(self.raw)

    def seed_values(self, M: int | None = None) -> SampledFunction:
        return self.seed.sample(self.interval, M or self.grid_M)


def _trig(d: dict) -> TrigPoly:
    return TrigPoly(float(d["a0"]), tuple(d.get("a", ())), tuple(d.get("b", ())))


def _function(spec: dict, path: str, errors: list) -> FunctionSpec | None:
    if "builtin" in spec:
        seed = get_seed(spec["builtin"])
        parts = fig1_parts() if seed.name == "fig1" else None
        return FunctionSpec(seed.name, seed.fn, seed.interval, parts)
    if "trig" in spec:
        t = _trig(spec["trig"])
        return FunctionSpec("trig", t, PERIODIC)
    num, den = _trig(spec["rational"]["num"]), _trig(spec["rational"]["den"])
    try:
        r = RationalTrig(num, den)
    except InvariantError as exc:
        errors.append({"path": path + "/rational/den", "message": str(exc)})
        return None
    return FunctionSpec("rational", r, PERIODIC, (num, den), r)


def _branch(err):
    """The oneOf branch meant by the instance: the one whose required keys
    (and ``kind`` constant, if any) the instance carries."""
    inst = err.instance
    if not isinstance(inst, dict):
        return None
    for sub in err.validator_value:
        if not all(k in inst for k in sub.get("required", ())):
            continue
        kind = sub.get("properties", {}).get("kind", {}).get("const")
        if kind is None or inst.get("kind") == kind:
            return sub
    return None


def _collect(validator, err, out):
    if err.validator == "oneOf":
        sub = _branch(err)
        if sub is not None:
            # re-validate against the intended branch, keeping absolute paths
            for inner in validator.evolve(schema=sub).iter_errors(err.instance):
                inner.path.extendleft(reversed(list(err.absolute_path)))
                _collect(validator, inner, out)
            return
        leaf = best_match(err.context) if err.context else err
        if leaf is not err:
            msg = f"matches none of the allowed forms ({leaf.message})"
        else:
            msg = err.message
    else:
        msg = err.message
    out.append({"path": "/" + "/".join(str(p) for p in err.absolute_path), "message": msg})


def _schema_errors(raw) -> list:
    schema = load_schema()
    validator = jsonschema.Draft202012Validator(schema)
    out = []
    for err in validator.iter_errors(raw):
        _collect(validator, err, out)
    for e in out:
        if e["path"] == "/":
            e["path"] = ""
    out.sort(key=lambda e: (e["path"], e["message"]))
    return out


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate ``raw`` and build the experiment objects, or raise ConfigError."""
    if not isinstance(raw, dict):
        raise ConfigError([{"path": "", "message": "config must be a JSON object"}])
    errors = _schema_errors(raw)
    # semantic checks still run on every top-level section the schema accepted
    bad = {e["path"].split("/")[1] for e in errors if e["path"]}

    def ok(key):
        return key in raw and key not in bad

    seed = _function(raw["seed"], "/seed", errors) if ok("seed") else None

    if "interval" in bad or not ok("partition"):
        lo = hi = None
    elif "interval" in raw:
        lo, hi = raw["interval"]
    elif "nodes" in raw["partition"]:
        lo, hi = raw["partition"]["nodes"][0], raw["partition"]["nodes"][-1]
    elif seed is not None and seed.default_interval is not None:
        lo, hi = seed.default_interval.lo, seed.default_interval.hi
    else:
        lo, hi = -math.pi, math.pi
    interval = None
    if lo is None:
        pass
    elif not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        errors.append({"path": "/interval", "message": "need finite lo < hi"})
    else:
        interval = Interval(float(lo), float(hi))

    partition = None
    if interval is not None:
        part = raw["partition"]
        try:
            if "uniform" in part:
                partition = Partition.uniform(interval.lo, interval.hi, part["uniform"])
            else:
                partition = Partition(part["nodes"])
                span = interval.length
                if abs(partition.nodes[0] - interval.lo) > 1e-12 * span or abs(
                    partition.nodes[-1] - interval.hi
                ) > 1e-12 * span:
                    errors.append(
                        {"path": "/partition/nodes", "message": "end nodes must equal the interval endpoints"}
                    )
                    partition = None
        except (ValueError, InvariantError) as exc:
            errors.append({"path": "/partition", "message": str(exc)})

    scaling = None
    sc = raw.get("scaling")
    if partition is not None and ok("scaling"):
        N = partition.subinterval_count
        if "uniform" in sc:
            scaling = ScalingVector.uniform(sc["uniform"], N)
        elif len(sc["values"]) != N:
            errors.append(
                {
                    "path": "/scaling/values",
                    "message": f"expected {N} values (one per subinterval), got {len(sc['values'])}",
                }
            )
        else:
            scaling = ScalingVector(sc["values"])

    grid_M = int(raw.get("grid_M", DEFAULT_GRID)) if "grid_M" not in bad else DEFAULT_GRID
    if partition is not None and ok("grid_M") and grid_M < 2 * partition.subinterval_count + 1:
        errors.append(
            {"path": "/grid_M", "message": f"grid_M must be at least {2 * partition.subinterval_count + 1}"}
        )

    base = None
    bspec = raw.get("base")
    if interval is not None and ok("base"):
        kind = bspec["kind"]
        if kind == "bernstein":
            base = Bernstein(int(bspec["degree"]))
        elif kind == "profile":
            base = quadratic_profile(interval)
        elif kind == "compose":
            base = power_map(interval, float(bspec.get("power", 3.0)))
        else:
            bfun = _function(bspec["function"], "/base/function", errors)
            if bfun is not None and seed is not None:
                ends = np.array([interval.lo, interval.hi])
                gap = np.abs(np.asarray(bfun.fn(ends), float) - np.asarray(seed.fn(ends), float))
                if float(np.max(gap)) > 1e-8:
                    errors.append(
                        {
                            "path": "/base/function",
                            "message": "base must agree with the seed at both interval endpoints "
                            f"(mismatch {float(np.max(gap)):.3g})",
                        }
                    )
                else:
                    base = Explicit(bfun.sample(interval, grid_M))

    render = dict(raw.get("render", {})) if ok("render") else {}
    if render.get("quotient") and seed is not None and seed.parts is None:
        errors.append(
            {"path": "/render/quotient", "message": "quotient mode needs a rational seed or builtin fig1"}
        )
    dim = dict(raw.get("dimension", {})) if ok("dimension") else {}
    if dim.get("min_scale", 2.0**-10) >= dim.get("max_scale", 2.0**-4):
        errors.append({"path": "/dimension", "message": "min_scale must be below max_scale"})

    minimax = {**_DEFAULT_MINIMAX, **(raw.get("minimax", {}) if ok("minimax") else {})}
    corpus = []
    for k, fspec in enumerate(minimax.pop("corpus", [{"builtin": "sin"}, {"builtin": "abs_sin"}])):
        fs = _function(fspec, f"/minimax/corpus/{k}", errors)
        if fs is None:
            continue
        iv = fs.default_interval
        if iv is None or abs(iv.lo + math.pi) > 1e-12 or abs(iv.hi - math.pi) > 1e-12:
            errors.append(
                {"path": f"/minimax/corpus/{k}", "message": "corpus functions must be periodic on [-pi, pi]"}
            )
        corpus.append(fs)

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        raw=raw,
        seed=seed,
        interval=interval,
        partition=partition,
        scaling=scaling,
        base=base,
        base_spec=bspec,
        grid_M=grid_M,
        tol=raw.get("tol"),
        max_iter=int(raw.get("max_iter", 10000)),
        method=raw.get("method", "picard"),
        render=render,
        dimension=dim,
        minimax=minimax,
        corpus=corpus,
    )


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([{"path": "", "message": f"not valid JSON: {exc}"}]) from None
    return parse_config(raw)
