"""The alpha-fractal engine.

``alpha_fractal`` computes the fixed point of

    g(x) = f(x) + alpha_i * (g - b)(L_i^{-1}(x)),   x in I_i,

by Picard iteration on a uniform grid, reading ``g - b`` off-grid by linear
interpolation. The interpolation weights are convex, so one sweep is a
contraction with ratio |alpha|_inf in the grid sup norm, which is what the
a posteriori certificate relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .core import (
    ConvergenceError,
    InvariantError,
    Partition,
    SampledFunction,
    ScalingVector,
    _locate_many,
    build_affine_maps,
    sup_distance,
    sup_norm,
)
from .report import Check
from .spaces import BaseOperator, Bernstein

__all__ = [
    "FractalSpec",
    "FractalResult",
    "default_tol",
    "alpha_fractal",
    "evaluate_at",
    "node_values",
    "self_referential_residual",
    "interpolation_error_estimate",
    "fractal_operator_apply",
    "check_perturbation_bound",
    "check_operator_norm_bounds",
    "bernstein_family",
    "check_lipschitz_process",
]

DEFAULT_MAX_ITER = 10_000


def default_tol(scaling: ScalingVector) -> float:
    return 1e-9 if scaling.sup_abs() <= 0.5 else 1e-6


@dataclass(frozen=True)
class FractalSpec:
    """Seed f, partition, scaling vector and base (a function b or an operator L)."""

    seed: SampledFunction
    partition: Partition
    scaling: ScalingVector
    base: Union[SampledFunction, BaseOperator]

    def __post_init__(self):
        iv, piv = self.seed.interval, self.partition.interval()
        width = iv.length
        if abs(iv.lo - piv.lo) > 1e-12 * width or abs(iv.hi - piv.hi) > 1e-12 * width:
            raise ValueError("seed interval and partition interval differ")
        if len(self.scaling) != self.partition.subinterval_count:
            raise ValueError(
                f"scaling has {len(self.scaling)} entries, partition has "
                f"{self.partition.subinterval_count} subintervals"
            )
        self.base_on(self.seed)

    def base_on(self, seed: SampledFunction) -> SampledFunction:
        """b on the grid of ``seed``, with the endpoint conditions enforced."""
        if isinstance(self.base, BaseOperator):
            b = self.base.apply(seed)
        else:
            b = self.base if self.base.same_grid(seed) else seed.with_values(self.base(seed.grid))
        if abs(b.values[0] - seed.values[0]) > 1e-8 or abs(b.values[-1] - seed.values[-1]) > 1e-8:
            raise InvariantError(
                "base function must agree with the seed at both interval endpoints"
            )
        return b


@dataclass(frozen=True)
class FractalResult:
    values: SampledFunction
    base: SampledFunction
    seed: SampledFunction
    iterations: int
    final_step: float
    certified_gap: float
    tol: float

    def __call__(self, x):
        return self.values(x)


@dataclass(frozen=True)
class _ReadPlan:
    """Where each grid point reads the previous iterate: index, weight, alpha."""

    j: np.ndarray
    w: np.ndarray
    alpha: np.ndarray

    def read(self, h: np.ndarray) -> np.ndarray:
        return h[self.j] + self.w * (h[self.j + 1] - h[self.j])


@lru_cache(maxsize=64)
def _plan_cached(nodes: bytes, alphas: bytes, M: int) -> _ReadPlan:
    partition = Partition(np.frombuffer(nodes))
    alpha_vec = np.frombuffer(alphas)
    maps = build_affine_maps(partition)
    iv = partition.interval()
    x = iv.grid(M)
    i = _locate_many(partition, x)
    u = (x - maps.offsets[i - 1]) / maps.slopes[i - 1]
    t = np.clip((u - iv.lo) / (iv.length / (M - 1)), 0.0, M - 1)
    # snap reads that land on a node up to rounding
    r = np.rint(t)
    t = np.where(np.abs(t - r) < 1e-9, r, t)
    j = np.minimum(np.floor(t).astype(np.int64), M - 2)
    w = t - j
    for arr in (j, w):
        arr.setflags(write=False)
    a = alpha_vec[i - 1]
    a.setflags(write=False)
    return _ReadPlan(j, w, a)


def _plan(partition: Partition, scaling: ScalingVector, M: int) -> _ReadPlan:
    return _plan_cached(partition.nodes.tobytes(), scaling.alphas.tobytes(), M)


def alpha_fractal(
    spec: FractalSpec,
    grid_M: int | None = None,
    tol: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    method: str = "picard",
) -> FractalResult:
    """Fixed point of the self-referential equation on a uniform grid.

    ``method="picard"`` iterates from g_0 = f and stops once the sup-step is at
    most ``tol (1 - |alpha|)/|alpha|``, so the certified distance to the grid
    fixed point is at most ``tol``. Raises :class:`ConvergenceError` after
    ``max_iter`` sweeps.

    ``method="series"`` instead sums g(x) = f(x) + sum_k (alpha_{i_1}...alpha_{i_k})
    (f - b)(u_k) along the orbit u_k = L_{i_k}^{-1}(u_{k-1}) of every grid point.
    It never interpolates g, so it returns point values of the continuous fixed
    point; the truncation tail is bounded by |alpha|^K ||f - b|| / (1 - |alpha|).
    The inverse maps expand, so a floating-point orbit drifts by a factor
    1/a_i per step; when |alpha_i| > a_i the accumulated error is of order
    eps^(log|alpha| / log a) and the series is only reliable when the slopes
    and grid make the orbit exact (dyadic cases) or |alpha| is small.
    """
    N = spec.partition.subinterval_count
    seed = spec.seed
    if grid_M is not None and grid_M != seed.sample_count:
        seed = seed.resample(grid_M)
    M = seed.sample_count
    if M < 2 * N + 1:
        raise ValueError(f"grid needs at least 2N+1 = {2 * N + 1} points")
    tol = default_tol(spec.scaling) if tol is None else float(tol)
    if not tol > 0:
        raise ValueError("tol must be positive")
    b = spec.base_on(seed)
    a = spec.scaling.sup_abs()

    f = seed.values
    if a == 0.0:
        return FractalResult(seed, b, seed, 1, 0.0, 0.0, tol)

    if method == "series":
        return _series(spec, seed, b, tol, max_iter)
    if method != "picard":
        raise ValueError("method must be 'picard' or 'series'")

    plan = _plan(spec.partition, spec.scaling, M)
    bv = b.values
    threshold = tol * (1.0 - a) / a
    g = f
    step = np.inf
    for it in range(1, max_iter + 1):
        g_next = f + plan.alpha * plan.read(g - bv)
        step = float(np.max(np.abs(g_next - g)))
        g = g_next
        if step <= threshold:
            return FractalResult(seed.with_values(g), b, seed, it, step, step * a / (1.0 - a), tol)
    raise ConvergenceError(
        f"no convergence after {max_iter} sweeps (last step {step:.3e})",
        final_step=step,
        iterations=max_iter,
    )


def _orbit_sum(spec, seed, b, x, tol, max_iter):
    a = spec.scaling.sup_abs()
    diff = seed - b
    scale = float(np.max(np.abs(diff.values))) / (1.0 - a)
    maps = build_affine_maps(spec.partition)
    lo, hi = seed.interval.lo, seed.interval.hi
    nodes = spec.partition.nodes
    snap = 1e-12 * (hi - lo)
    u = np.array(x, dtype=float)
    weight = np.ones_like(u)
    g = seed(u)
    tail = scale
    k = 0
    while tail > tol:
        if k >= max_iter:
            raise ConvergenceError(
                f"series tail {tail:.3e} above tol after {max_iter} terms",
                final_step=tail,
                iterations=k,
            )
        i = _locate_many(spec.partition, u)
        u = np.clip((u - maps.offsets[i - 1]) / maps.slopes[i - 1], lo, hi)
        # snap to nodes; endpoints are repelling fixed points of the inverse maps
        near = nodes[np.clip(np.searchsorted(nodes, u), 0, nodes.size - 1)]
        near_lo = nodes[np.clip(np.searchsorted(nodes, u) - 1, 0, nodes.size - 1)]
        u = np.where(np.abs(u - near) <= snap, near, np.where(np.abs(u - near_lo) <= snap, near_lo, u))
        weight = weight * spec.scaling.alphas[i - 1]
        g = g + weight * diff(u)
        k += 1
        tail = a**k * scale
    return g, k, tail


def _series(spec, seed, b, tol, max_iter):
    a = spec.scaling.sup_abs()
    g, k, tail = _orbit_sum(spec, seed, b, seed.grid, tol, max_iter)
    last = a**k * float(np.max(np.abs((seed - b).values)))
    return FractalResult(seed.with_values(g), b, seed, k, last, tail, tol)


def evaluate_at(spec: FractalSpec, x, tol: float | None = None, max_iter: int = DEFAULT_MAX_ITER):
    """Point values of the fixed point at arbitrary x by the address series.

    The seed and base are read by linear interpolation of their samples; the
    fixed point itself is never interpolated.
    """
    x = np.asarray(x, dtype=float)
    if not all(spec.seed.interval.contains(v) for v in np.ravel(x)):
        raise ValueError("points must lie in the interval")
    tol = default_tol(spec.scaling) if tol is None else float(tol)
    b = spec.base_on(spec.seed)
    if spec.scaling.sup_abs() == 0.0:
        return spec.seed(x)
    return _orbit_sum(spec, spec.seed, b, x, tol, max_iter)[0]


def node_values(result: FractalResult, spec: FractalSpec):
    """f^alpha at the partition nodes: grid values where the nodes sit on the
    grid, series values otherwise."""
    g = result.values
    nodes = spec.partition.nodes
    pos = (nodes - g.interval.lo) / g.step
    if np.all(np.abs(pos - np.round(pos)) <= 1e-9):
        return g.values[np.round(pos).astype(int)]
    return evaluate_at(spec, nodes, result.tol)


def self_referential_residual(
    result: FractalResult, spec: FractalSpec, where: str = "grid"
) -> float:
    """max |g(x) - f(x) - alpha_i (g - b)(L_i^{-1}(x))| over a set of points.

    ``where="grid"`` evaluates on the evaluation grid itself (this certifies
    the discrete fixed point); ``"midpoints"`` evaluates halfway between grid
    nodes, where every read is an interpolation, so the value also measures
    how well the grid represents the continuous fixed point.
    """
    g, f, b = result.values, result.seed, result.base
    iv = g.interval
    if where == "grid":
        x = g.grid
    elif where == "midpoints":
        x = g.grid[:-1] + 0.5 * g.step
    else:
        raise ValueError("where must be 'grid' or 'midpoints'")
    maps = build_affine_maps(spec.partition)
    i = _locate_many(spec.partition, x)
    u = np.clip((x - maps.offsets[i - 1]) / maps.slopes[i - 1], iv.lo, iv.hi)
    alpha = spec.scaling.alphas[i - 1]
    diff = g - b
    res = g(x) - f(x) - alpha * diff(u)
    return float(np.max(np.abs(res)))


def interpolation_error_estimate(g: SampledFunction) -> float:
    """Half the largest second difference: a proxy for linear-interpolation error."""
    v = g.values
    if v.size < 3:
        return 0.0
    return 0.5 * float(np.max(np.abs(v[2:] - 2.0 * v[1:-1] + v[:-2])))


def fractal_operator_apply(
    L: BaseOperator,
    f: SampledFunction,
    partition: Partition,
    scaling: ScalingVector,
    grid_M: int | None = None,
    tol: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FractalResult:
    return alpha_fractal(FractalSpec(f, partition, scaling, L), grid_M, tol, max_iter)


def check_perturbation_bound(spec: FractalSpec, result: FractalResult):
    """(||f^alpha - f||, |alpha|/(1-|alpha|) ||f - b||) on the result's grid."""
    lhs = sup_distance(result.values, result.seed)
    rhs = spec.scaling.contraction_ratio() * sup_distance(result.seed, result.base)
    return lhs, rhs


def check_operator_norm_bounds(
    L: BaseOperator,
    f: SampledFunction,
    partition: Partition,
    scaling: ScalingVector,
    grid_M: int | None = None,
    tol: float | None = None,
) -> list[Check]:
    """Per-instance consequences of the operator-norm estimates for F^alpha.

    Uses the catalogue's value (or upper bound) for ||Id - L|| and ||L||.
    """
    res = fractal_operator_apply(L, f, partition, scaling, grid_M, tol)
    a = scaling.sup_abs()
    ratio = scaling.contraction_ratio()
    fn = sup_norm(res.seed)
    slack = 10.0 * res.tol + 1e-12
    idl = L.id_minus_norm
    checks = [
        Check(
            "id_minus_fractal",
            sup_distance(res.values, res.seed),
            ratio * idl * fn,
            slack,
            {"id_minus_L": idl, "alpha_inf": a},
        ),
        Check(
            "fractal_norm",
            sup_norm(res.values),
            (1.0 + ratio * idl) * fn,
            slack,
            {"id_minus_L": idl, "alpha_inf": a},
        ),
    ]
    if L.norm is not None and a * L.norm < 1.0:
        checks.append(
            Check(
                "bounded_below",
                (1.0 - a * L.norm) / (1.0 + a) * fn,
                sup_norm(res.values),
                slack,
                {"L_norm": L.norm, "alpha_inf": a},
            )
        )
    if a < 1.0 / (1.0 + idl):
        # inverse bound of the isomorphism regime, tested on this f
        checks.append(
            Check(
                "inverse_norm",
                fn,
                (1.0 + a) / (1.0 - a * L.norm) * sup_norm(res.values),
                slack,
                {"L_norm": L.norm, "alpha_inf": a},
            )
        )
    return checks


def bernstein_family(
    f: SampledFunction,
    partition: Partition,
    scaling: ScalingVector,
    n_list: Sequence[int],
    grid_M: int | None = None,
    tol: float | None = None,
) -> list[FractalResult]:
    """Members f^alpha with base B_n f, one per requested n."""
    return [
        fractal_operator_apply(Bernstein(int(n)), f, partition, scaling, grid_M, tol)
        for n in n_list
    ]


def check_lipschitz_process(
    f: SampledFunction,
    g: SampledFunction,
    partition: Partition,
    scaling: ScalingVector,
    n: int,
    lam: float = 2.0,
    grid_M: int | None = None,
    tol: float | None = None,
) -> list[Check]:
    """Lipschitz estimate and positive homogeneity for the Bernstein member n."""
    if not lam > 0:
        raise ValueError("homogeneity factor must be positive")
    a = scaling.sup_abs()
    L = Bernstein(int(n))
    rf = fractal_operator_apply(L, f, partition, scaling, grid_M, tol)
    rg = fractal_operator_apply(L, g, partition, scaling, grid_M, tol)
    rlam = fractal_operator_apply(L, lam * f, partition, scaling, grid_M, tol)
    lip = (1.0 + a) / (1.0 - a)
    tol_used = rf.tol
    return [
        Check(
            "lipschitz",
            sup_distance(rf.values, rg.values),
            lip * sup_distance(rf.seed, rg.seed),
            2.0 * tol_used,
            {"constant": lip, "n": int(n)},
        ),
        Check(
            "positive_homogeneity",
            sup_distance(rlam.values, lam * rf.values),
            0.0,
            2.0 * tol_used,
            {"lambda": lam, "n": int(n)},
        ),
    ]

