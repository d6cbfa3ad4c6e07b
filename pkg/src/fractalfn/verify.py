"""Verification runs: a fixed suite on builtin fixtures and per-config checks.

Each fixture returns a list of :class:`Check`. Fixtures are independent, so
they run on a thread pool capped by ``FRACTALFN_THREADS``; results are
collected in fixture order, which keeps the report byte-stable.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .approx import (
    corrected_chain_check,
    density_trend,
    fractal_minimax_bound,
    jackson_error_report,
    nonneg_fractal_approx,
)
from .core import Partition, SampledFunction, ScalingVector, build_affine_maps, sup_distance, sup_norm
from .dimension import dimension_preserving_sequence, solve_box_dimension
from .fractal import (
    FractalSpec,
    alpha_fractal,
    check_lipschitz_process,
    check_operator_norm_bounds,
    check_perturbation_bound,
    node_values,
    self_referential_residual,
)
from .report import Check
from .seeds import get_seed
from .spaces import Bernstein, quadratic_profile, varma_eval, varma_nodes

__all__ = ["thread_count", "FULL_SUITE", "run_full_suite", "verify_config", "residual_threshold"]

_SUITE_GRID = 2**12 + 1


def thread_count() -> int:
    raw = os.environ.get("FRACTALFN_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def residual_threshold(scaling: ScalingVector) -> float:
    return 1e-4 if scaling.sup_abs() <= 0.5 else 5e-3


def _uniform(seed, N):
    iv = get_seed(seed).interval
    return Partition.uniform(iv.lo, iv.hi, N)


def _perturbation_fig1():
    f = get_seed("fig1").sample(_SUITE_GRID)
    spec = FractalSpec(f, _uniform("fig1", 10), ScalingVector.uniform(0.9, 10), quadratic_profile(f.interval))
    res = alpha_fractal(spec)
    lhs, rhs = check_perturbation_bound(spec, res)
    return [Check("perturbation_bound[fig1,profile,0.9]", lhs, rhs, 1e-6)]


def _perturbation_sin():
    f = get_seed("sin").sample(_SUITE_GRID)
    spec = FractalSpec(f, _uniform("sin", 4), ScalingVector([0.5, -0.3, 0.4, -0.5]), Bernstein(8))
    res = alpha_fractal(spec)
    lhs, rhs = check_perturbation_bound(spec, res)
    return [Check("perturbation_bound[sin,bernstein8]", lhs, rhs, 1e-6)]


def _operator_norms():
    f = get_seed("exp01").sample(_SUITE_GRID)
    checks = check_operator_norm_bounds(
        quadratic_profile(f.interval), f, _uniform("exp01", 5), ScalingVector.uniform(0.3, 5)
    )
    return [Check(c.name + "[exp01,profile]", c.lhs, c.rhs, c.slack, c.detail) for c in checks]


def _residual_and_nodes():
    f = get_seed("abs_sin").sample(_SUITE_GRID)
    part = _uniform("abs_sin", 6)
    scaling = ScalingVector([0.4, -0.2, 0.5, 0.3, -0.5, 0.1])
    spec = FractalSpec(f, part, scaling, Bernstein(6))
    res = alpha_fractal(spec)
    node_err = float(np.max(np.abs(node_values(res, spec) - f(part.nodes))))
    return [
        Check("self_referential_residual[abs_sin]", self_referential_residual(res, spec), 1e-4),
        Check("node_interpolation[abs_sin]", node_err, 0.0, 1e-6),
    ]


def _residual_fig1():
    f = get_seed("fig1").sample(2**14 + 1)
    spec = FractalSpec(f, _uniform("fig1", 10), ScalingVector.uniform(0.9, 10), quadratic_profile(f.interval))
    res = alpha_fractal(spec)
    return [Check("self_referential_residual[fig1,0.9]", self_referential_residual(res, spec), 5e-3)]


def _constant_fixed_point():
    iv = get_seed("exp01").interval
    one = SampledFunction.constant(1.0, iv, _SUITE_GRID)
    res = alpha_fractal(FractalSpec(one, Partition.uniform(0.0, 1.0, 3), ScalingVector([0.7, -0.6, 0.5]), Bernstein(5)))
    return [Check("constant_fixed_point[bernstein5]", sup_distance(res.values, one), 0.0, 1e-9)]


def _lipschitz():
    iv = get_seed("exp01").interval
    f = get_seed("exp01").sample(_SUITE_GRID)
    g = SampledFunction.from_callable(lambda x: np.cos(3.0 * x) + x**2, iv, _SUITE_GRID)
    checks = check_lipschitz_process(f, g, Partition.uniform(0.0, 1.0, 4), ScalingVector.uniform(0.9, 4), 6)
    return [Check(c.name + "[0.9]", c.lhs, c.rhs, max(c.slack, 1e-6 if c.name == "lipschitz" else 0.0), c.detail) for c in checks]


def _jackson():
    out = []
    for name in ("sin", "abs_sin", "weierstrass_like"):
        f = get_seed(name).sample(_SUITE_GRID)
        for n in (2, 4, 8, 16):
            actual, bound, _ = jackson_error_report(f, n)
            out.append(Check(f"jackson[{name},n={n}]", actual, bound, 1e-3))
        x = varma_nodes(16)
        node_err = float(np.max(np.abs(varma_eval(f(x), 16, x) - f(x))))
        out.append(Check(f"jackson_nodes[{name},n=16]", node_err, 0.0, 1e-8))
    return out


def _minimax_chain():
    f = get_seed("abs_sin").sample(_SUITE_GRID)
    scaling = ScalingVector.uniform(0.3, 4)
    out = []
    for m, n in ((2, 0), (2, 2)):
        mb = fractal_minimax_bound(f, m, n, scaling, quadratic_profile(f.interval))
        out.append(Check(f"fractal_minimax[abs_sin,{m},{n}]", mb.witness, mb.bound, mb.check.slack, mb.check.detail))
    return out


def _corrected_chain():
    f = get_seed("exp01").sample(_SUITE_GRID)
    rep = corrected_chain_check(f, 2, 1, ScalingVector.uniform(0.5, 4))
    out = [Check(c.name + "[exp01]", c.lhs, c.rhs, c.slack, c.detail) for c in rep["checks"]]
    # each doubling of n must cut the Bernstein term by at least 5%
    out.append(Check("bernstein_term_trend[exp01]", 0.05, min(rep["reductions"])))
    return out


def _density():
    t = get_seed("sin").sample(_SUITE_GRID)
    d = density_trend(t, ScalingVector.uniform(0.5, 4), (4, 8, 16, 32))
    return [Check(f"density_trend[sin,n={n2}]", b, a) for n2, a, b in zip((8, 16, 32), d, d[1:])]


def _nonneg():
    f = get_seed("abs_sin").sample(_SUITE_GRID)
    eps = 0.2
    approx, gap = nonneg_fractal_approx(f, eps, ScalingVector.uniform(0.05, 4), Bernstein(8))
    return [
        Check("nonneg_approx_positive[abs_sin]", -float(np.min(approx.values)), 0.0),
        Check("nonneg_approx_error[abs_sin]", gap, eps),
    ]


def _dimension():
    part = Partition.uniform(0.0, 1.0, 10)
    D = solve_box_dimension(ScalingVector.uniform(0.9, 10), build_affine_maps(part))
    return [Check("box_dimension_closed_form[N=10,0.9]", abs(D - (1.0 + math.log10(9.0))), 0.0, 1e-10)]


def _dimension_sequence():
    f = get_seed("exp01").sample(_SUITE_GRID)
    rep = dimension_preserving_sequence(f, Partition.uniform(0.0, 1.0, 4), ScalingVector.uniform(0.6, 4), (4, 8, 16))
    mem = rep["members"]
    out = [Check("dimension_sequence_same_D", float(len({m["theoretical_D"] for m in mem}) - 1), 0.0)]
    out += [
        Check(f"dimension_sequence_bound[n={m['n']}]", m["sup_distance"], m["bound"], m["slack"])
        for m in mem
    ]
    out += [
        Check(f"dimension_sequence_decreasing[n={b['n']}]", b["sup_distance"], a["sup_distance"])
        for a, b in zip(mem, mem[1:])
    ]
    return out


FULL_SUITE = (
    _perturbation_fig1,
    _perturbation_sin,
    _operator_norms,
    _residual_and_nodes,
    _residual_fig1,
    _constant_fixed_point,
    _lipschitz,
    _jackson,
    _minimax_chain,
    _corrected_chain,
    _density,
    _nonneg,
    _dimension,
    _dimension_sequence,
)


def run_full_suite(threads: int | None = None) -> list[Check]:
    """Run every fixture; checks come back in the fixed fixture order."""
    threads = threads or thread_count()
    if threads == 1:
        groups = [fx() for fx in FULL_SUITE]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            groups = list(pool.map(lambda fx: fx(), FULL_SUITE))
    return [c for g in groups for c in g]


def verify_config(cfg) -> list[Check]:
    """Checks on one configured instance. Every lhs measures a deviation, so an
    alpha = 0 config reports zeros throughout."""
    f = cfg.seed_values()
    spec = FractalSpec(f, cfg.partition, cfg.scaling, cfg.base)
    res = alpha_fractal(spec, tol=cfg.tol, max_iter=cfg.max_iter, method=cfg.method)
    slack = 10.0 * res.tol
    nodes = cfg.partition.nodes
    lhs, rhs = check_perturbation_bound(spec, res)
    checks = [
        Check("node_interpolation", float(np.max(np.abs(node_values(res, spec) - f(nodes)))), 0.0, 1e-6),
        Check("perturbation_bound", lhs, rhs, 1e-6),
        Check("self_referential_residual", self_referential_residual(res, spec), residual_threshold(cfg.scaling)),
    ]
    L = cfg.base
    if L.id_minus_norm is not None:
        checks.append(
            Check(
                "id_minus_fractal",
                lhs,
                cfg.scaling.contraction_ratio() * L.id_minus_norm * sup_norm(f),
                slack + 1e-12,
            )
        )
    if L.fixes_constants:
        one = SampledFunction.constant(1.0, cfg.interval, cfg.grid_M)
        r1 = alpha_fractal(FractalSpec(one, cfg.partition, cfg.scaling, L), tol=cfg.tol, max_iter=cfg.max_iter)
        checks.append(Check("constant_fixed_point", sup_distance(r1.values, one), 0.0, 1e-9))
    if L.kind != "explicit":
        # a fixed base function b is not homogeneous in f
        lam = 2.0
        rl = alpha_fractal(FractalSpec(lam * f, cfg.partition, cfg.scaling, L), tol=cfg.tol, max_iter=cfg.max_iter)
        checks.append(Check("positive_homogeneity", sup_distance(rl.values, lam * res.values), 0.0, 2.0 * res.tol))
    return checks
