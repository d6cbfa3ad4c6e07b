"""Discrete minimax approximation and the fractal approximation-error checks.

Linear problems (trigonometric polynomials, algebraic polynomials) are solved
with a single-point exchange on a reference of dim+1 points; rational problems
with the differential-correction scheme, whose linear subproblems go to
``scipy.optimize.linprog``. All minimax values are discrete: they are exact on
the working grid and serve as proxies for the continuous errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import linprog

from .core import (
    DegreeExhaustionError,
    Interval,
    Partition,
    SampledFunction,
    ScalingVector,
    sup_distance,
    sup_norm,
)
from .fractal import fractal_operator_apply
from .report import Check
from .spaces import (
    BaseOperator,
    Bernstein,
    RationalTrig,
    TrigPoly,
    _require_periodic,
    modulus_of_continuity,
    trig_basis,
    varma_apply,
)

__all__ = [
    "MinimaxResult",
    "AlgebraicRational",
    "periodic_grid",
    "minimax_trig",
    "minimax_rational_trig",
    "minimax_rational",
    "MinimaxBound",
    "fractal_minimax_bound",
    "corrected_chain_check",
    "density_trend",
    "weierstrass_scale_threshold",
    "nonneg_fractal_approx",
    "jackson_error_report",
]

DEFAULT_GRID = 4096
Q_FLOOR = 1e-6


@dataclass
class MinimaxResult:
    approximant: object
    error: float
    iterations: int
    equioscillation_points: np.ndarray
    converged: bool = True
    history: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def __call__(self, x):
        return self.approximant(x)


@dataclass(frozen=True)
class AlgebraicRational:
    """p/q with p, q in the Chebyshev basis of ``interval``."""

    num: np.ndarray
    den: np.ndarray
    interval: Interval

    @property
    def degrees(self):
        return self.num.size - 1, self.den.size - 1

    def _t(self, x):
        iv = self.interval
        return (2.0 * np.asarray(x, dtype=float) - iv.lo - iv.hi) / iv.length

    def __call__(self, x):
        t = self._t(x)
        return C.chebval(t, self.num) / C.chebval(t, self.den)


def periodic_grid(M: int) -> np.ndarray:
    """M equispaced points of [-pi, pi), the right endpoint left out."""
    return -math.pi + 2.0 * math.pi * np.arange(M) / M


def _values_on(f, x):
    return np.asarray(f(x), dtype=float)


def _alternation_points(x, r, err, rel=1e-6):
    """Alternating-sign extremal points of the residual r."""
    if err == 0.0:
        return np.array([])
    mask = np.abs(r) >= (1.0 - rel) * err
    idx = np.flatnonzero(mask)
    picked = []
    for j in idx:
        if picked and np.sign(r[j]) == np.sign(r[picked[-1]]):
            if abs(r[j]) > abs(r[picked[-1]]):
                picked[-1] = j
        else:
            picked.append(j)
    return x[np.array(picked, dtype=int)]


# -- linear minimax by exchange ---------------------------------------------------


def _exchange(A: np.ndarray, f: np.ndarray, max_iter: int = 2000):
    """Discrete best uniform approximation of f by the columns of A.

    Points are assumed ordered and the column space Haar on them. Returns the
    coefficients, the levelled errors of every reference (nondecreasing) and a
    convergence flag.
    """
    M, d = A.shape
    ref = np.unique(np.linspace(0, M - 1, d + 1).round().astype(int))
    if ref.size != d + 1:
        raise ValueError("working grid too small for the requested degree")
    signs = (-1.0) ** np.arange(d + 1)
    history = []
    coef = np.zeros(d)
    scale = max(float(np.max(np.abs(f))), 1e-300)
    for it in range(1, max_iter + 1):
        system = np.column_stack([A[ref], signs])
        sol = np.linalg.solve(system, f[ref])
        coef, h = sol[:d], sol[d]
        history.append(abs(h))
        r = f - A @ coef
        z = int(np.argmax(np.abs(r)))
        if abs(r[z]) <= abs(h) + 1e-13 * scale:
            return coef, history, it, True
        sz = np.sign(r[z])
        rref = r[ref]
        pos = int(np.searchsorted(ref, z))
        if pos == 0:
            if np.sign(rref[0]) == sz:
                ref[0] = z
            else:
                ref = np.r_[z, ref[:-1]]
        elif pos == ref.size:
            if np.sign(rref[-1]) == sz:
                ref[-1] = z
            else:
                ref = np.r_[ref[1:], z]
        else:
            k = pos - 1 if np.sign(rref[pos - 1]) == sz else pos
            ref[k] = z
    return coef, history, max_iter, False


def minimax_trig(f, m: int, grid_M: int = DEFAULT_GRID, max_iter: int = 2000) -> MinimaxResult:
    """Best uniform approximation of a 2pi-periodic f from trig polynomials of degree m."""
    if m < 0:
        raise ValueError("degree must be >= 0")
    if grid_M < 16 * (2 * m + 2):
        raise ValueError(f"grid_M must be at least {16 * (2 * m + 2)}")
    if isinstance(f, SampledFunction):
        _require_periodic(f)
    x = periodic_grid(grid_M)
    y = _values_on(f, x)
    A = trig_basis(m, x)
    coef, history, iters, ok = _exchange(A, y, max_iter)
    r = y - A @ coef
    err = float(np.max(np.abs(r)))
    out = MinimaxResult(
        TrigPoly.from_vector(coef, m), err, iters, _alternation_points(x, r, err), ok, history
    )
    if not ok:
        out.flags.append("degraded_convergence")
    return out


# -- rational minimax by differential correction -----------------------------------


def _dc_subproblem(P, Q, y, qv, err, floor, bounds, cost, active):
    """One differential-correction LP, solved by adding violated grid points.

    The LP over all grid points and the LP over the final active set share
    the optimum, because every grid constraint holds at the returned point.
    """
    M, dp = P.shape
    yQ = y[:, None] * Q
    scale = max(float(np.max(np.abs(y))), 1.0)
    while True:
        S = np.flatnonzero(active)
        k = S.size
        rows_hi = np.hstack([-P[S], yQ[S] - err * Q[S], -qv[S, None]])
        rows_lo = np.hstack([P[S], -yQ[S] - err * Q[S], -qv[S, None]])
        rows_pos = np.hstack([np.zeros((k, dp)), -Q[S], np.zeros((k, 1))])
        sol = linprog(
            cost,
            A_ub=np.vstack([rows_hi, rows_lo, rows_pos]),
            b_ub=np.r_[np.zeros(2 * k), -floor * np.ones(k)],
            bounds=bounds,
            method="highs",
        )
        if sol.status != 0:
            return None
        a, b, delta = sol.x[:dp], sol.x[dp:-1], sol.x[-1]
        pv, qn = P @ a, Q @ b
        viol = np.maximum(np.abs(y * qn - pv) - err * qn - delta * qv, floor - qn)
        viol[active] = -np.inf
        if np.max(viol) <= 1e-12 * scale:
            return sol.x
        worst = np.argsort(viol)[-64:]
        active[worst[viol[worst] > 1e-12 * scale]] = True


def _differential_correction(P, Q, y, p0, q0, max_iter=60, floor=Q_FLOOR):
    """Discrete rational minimax of y by (P a)/(Q b) started from (p0, q0)."""
    M, dp = P.shape
    dq = Q.shape[1]
    flags = []
    p, q = p0.copy(), q0.copy()
    qv = Q @ q
    err = float(np.max(np.abs(y - (P @ p) / qv)))
    history = [err]
    it = 0
    # decision vector [a (dp), b (dq), Delta]
    cost = np.zeros(dp + dq + 1)
    cost[-1] = 1.0
    bounds = [(None, None)] * dp + [(-1.0, 1.0)] * dq + [(None, None)]
    active = np.zeros(M, dtype=bool)
    active[:: max(1, M // 256)] = True
    for it in range(1, max_iter + 1):
        r = np.abs(y - (P @ p) / qv)
        active[np.argsort(r)[-64:]] = True
        x = _dc_subproblem(P, Q, y, qv, err, floor, bounds, cost, active)
        if x is None:
            flags.append("lp_failure")
            break
        delta = x[-1]
        if delta >= -1e-14:
            break
        p_new, q_new = x[:dp], x[dp : dp + dq]
        qv_new = Q @ q_new
        if np.min(qv_new) <= 0.0:
            flags.append("denominator_rollback")
            break
        norm = float(np.max(qv_new))
        p_new, q_new, qv_new = p_new / norm, q_new / norm, qv_new / norm
        err_new = float(np.max(np.abs(y - (P @ p_new) / qv_new)))
        if err_new >= err * (1.0 - 1e-13):
            if err_new > err:
                flags.append("stagnation")
            break
        p, q, qv, err = p_new, q_new, qv_new, err_new
        history.append(err)
    else:
        flags.append("stagnation")
    return p, q, err, history, it, flags


def minimax_rational_trig(
    f, m: int, n: int, grid_M: int = DEFAULT_GRID, max_iter: int = 60
) -> MinimaxResult:
    """Best uniform approximation of a periodic f by p/q, deg p <= m, deg q <= n, q > 0."""
    if m < 0 or n < 0:
        raise ValueError("degrees must be >= 0")
    if isinstance(f, SampledFunction):
        _require_periodic(f)
    start = minimax_trig(f, m, grid_M)
    x = periodic_grid(grid_M)
    y = _values_on(f, x)
    P, Q = trig_basis(m, x), trig_basis(n, x)
    q0 = np.zeros(2 * n + 1)
    q0[0] = 1.0
    p, q, err, history, iters, flags = _differential_correction(
        P, Q, y, start.approximant.to_vector(), q0, max_iter
    )
    approx = RationalTrig(TrigPoly.from_vector(p, m), TrigPoly.from_vector(q, n))
    r = y - approx(x)
    err = float(np.max(np.abs(r)))
    return MinimaxResult(
        approx,
        err,
        iters,
        _alternation_points(x, r, err),
        not flags,
        history,
        flags,
    )


def _cheb_basis(deg, t):
    return C.chebvander(t, deg)


def minimax_rational(
    f, l: int, m: int, interval, grid_M: int = DEFAULT_GRID, max_iter: int = 60
) -> MinimaxResult:
    """Best uniform approximation on an interval by algebraic rationals of type (l, m)."""
    iv = interval if isinstance(interval, Interval) else Interval(*interval)
    x = iv.grid(grid_M)
    t = (2.0 * x - iv.lo - iv.hi) / iv.length
    y = _values_on(f, x)
    P, Q = _cheb_basis(l, t), _cheb_basis(m, t)
    coef, history, iters, ok = _exchange(P, y)
    flags = [] if ok else ["degraded_convergence"]
    q0 = np.zeros(m + 1)
    q0[0] = 1.0
    if m > 0:
        coef, q, _, hist2, it2, more = _differential_correction(P, Q, y, coef, q0, max_iter)
        history, iters, flags = history + hist2, iters + it2, flags + more
    else:
        q = q0
    approx = AlgebraicRational(coef, q, iv)
    r = y - approx(x)
    err = float(np.max(np.abs(r)))
    return MinimaxResult(approx, err, iters, _alternation_points(x, r, err), not flags, history, flags)


# -- fractal error bounds -----------------------------------------------------------


def _sample_like(fn: Callable, f: SampledFunction) -> SampledFunction:
    return f.with_values(np.asarray(fn(f.grid), dtype=float))


def _uniform_partition(f: SampledFunction, scaling: ScalingVector) -> Partition:
    return Partition.uniform(f.interval.lo, f.interval.hi, len(scaling))


@dataclass
class MinimaxBound:
    bound: float
    e_proxy: float
    witness: float
    f_norm: float
    id_minus_L: float
    alpha_inf: float
    check: Check
    flags: list = field(default_factory=list)

    def to_dict(self):
        return {
            "bound": self.bound,
            "e_proxy": self.e_proxy,
            "witness": self.witness,
            "f_norm": self.f_norm,
            "id_minus_L": self.id_minus_L,
            "alpha_inf": self.alpha_inf,
            "passed": self.check.passed,
            "flags": list(self.flags),
        }


def _bound_formula(e, a, idl, fnorm):
    return (1.0 + a * (idl - 1.0)) / (1.0 - a) * e + a / (1.0 - a) * idl * fnorm


def fractal_minimax_bound(
    f: SampledFunction,
    m: int,
    n: int,
    scaling: ScalingVector,
    L: BaseOperator,
    partition: Partition | None = None,
    grid_M: int = DEFAULT_GRID,
    tol: float | None = None,
    slack: float = 1e-4,
) -> MinimaxBound:
    """Upper bound for the fractal rational-trig minimax error, with its witness.

    The bound uses the discrete minimax error in place of E_mn; the witness is
    ||f - F^alpha(r_*)|| for the discrete best approximant r_*.
    """
    _require_periodic(f)
    best = minimax_rational_trig(f, m, n, grid_M) if n > 0 else minimax_trig(f, m, grid_M)
    partition = partition or _uniform_partition(f, scaling)
    r_star = _sample_like(best.approximant, f)
    frac = fractal_operator_apply(L, r_star, partition, scaling, tol=tol)
    a = scaling.sup_abs()
    e = best.error
    fnorm = sup_norm(f)
    bound = _bound_formula(e, a, L.id_minus_norm, fnorm)
    witness = sup_distance(f, frac.values)
    total_slack = slack + 10.0 * frac.tol
    return MinimaxBound(
        bound,
        e,
        witness,
        fnorm,
        L.id_minus_norm,
        a,
        Check("fractal_minimax", witness, bound, total_slack, {"m": m, "n": n, "e_proxy": e}),
        list(best.flags),
    )


def corrected_chain_check(
    f: SampledFunction,
    l: int,
    m: int,
    scaling: ScalingVector,
    bernstein_n_list: Sequence[int] = (4, 8, 16, 32),
    partition: Partition | None = None,
    grid_M: int = DEFAULT_GRID,
    tol: float | None = None,
    slack: float = 1e-4,
) -> dict:
    """Per-n chain ||f - F_n(r*)|| <= ||f - r*|| + |alpha|/(1-|alpha|) ||r* - B_n r*||.

    r* is the discrete best algebraic rational approximant of type (l, m) on
    f's interval, F_n the fractal operator with base B_n.
    """
    best = minimax_rational(f, l, m, f.interval, grid_M)
    partition = partition or _uniform_partition(f, scaling)
    r_star = _sample_like(best.approximant, f)
    dist = sup_distance(f, r_star)
    ratio = scaling.contraction_ratio()
    checks, terms = [], []
    for n in bernstein_n_list:
        frac = fractal_operator_apply(Bernstein(int(n)), r_star, partition, scaling, tol=tol)
        term = sup_distance(r_star, frac.base)
        terms.append(term)
        checks.append(
            Check(
                f"corrected_chain_n{int(n)}",
                sup_distance(f, frac.values),
                dist + ratio * term,
                slack + 10.0 * frac.tol,
                {"n": int(n), "bernstein_term": term, "classical_distance": dist},
            )
        )
    reductions = [1.0 - b / a if a > 0 else 0.0 for a, b in zip(terms, terms[1:])]
    return {
        "classical_distance": dist,
        "bernstein_terms": terms,
        "reductions": reductions,
        "checks": checks,
        "flags": best.flags,
    }


def density_trend(
    t: SampledFunction,
    scaling: ScalingVector,
    n_list: Sequence[int] = (4, 8, 16, 32),
    partition: Partition | None = None,
    tol: float | None = None,
) -> list[float]:
    """||t - F^alpha_{B_n}(t)|| for each n."""
    partition = partition or _uniform_partition(t, scaling)
    return [
        sup_distance(t, fractal_operator_apply(Bernstein(int(n)), t, partition, scaling, tol=tol).values)
        for n in n_list
    ]


def weierstrass_scale_threshold(
    epsilon: float, t, L: BaseOperator | float, grid_M: int = 2**14
) -> float:
    """Largest |alpha|_inf that keeps the fractal perturbation of t within epsilon/2.

    ``t`` may be a callable on [-pi, pi] (sampled on a dense periodic grid) or
    a SampledFunction; ``L`` may be a catalogue operator or a bare number for
    ||Id - L||.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    idl = L if isinstance(L, (int, float)) else L.id_minus_norm
    tnorm = sup_norm(t) if isinstance(t, SampledFunction) else float(
        np.max(np.abs(_values_on(t, periodic_grid(grid_M))))
    )
    half = 0.5 * epsilon
    return min(half / (half + idl * tnorm), 1.0 - 1e-9)


DEFAULT_DEGREES = tuple((k, k) for k in range(0, 7))


def nonneg_fractal_approx(
    f: SampledFunction,
    epsilon: float,
    scaling: ScalingVector,
    L: BaseOperator,
    partition: Partition | None = None,
    degrees: Sequence[tuple] = DEFAULT_DEGREES,
    grid_M: int = DEFAULT_GRID,
    tol: float | None = None,
):
    """Non-negative fractal rational-trig approximant t^alpha + epsilon/2.

    Searches the degree list for a rational t with ||f - F^alpha(t)|| < epsilon/2
    and returns (approximant, ||f - approximant||).
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not L.fixes_constants:
        raise ValueError("the base operator must fix constant functions")
    _require_periodic(f)
    if float(np.min(f.values)) < 0.0:
        raise ValueError("f must be non-negative")
    partition = partition or _uniform_partition(f, scaling)
    half = 0.5 * epsilon
    tried = []
    for m, n in degrees:
        best = minimax_rational_trig(f, m, n, grid_M) if n > 0 else minimax_trig(f, m, grid_M)
        t = _sample_like(best.approximant, f)
        t_alpha = fractal_operator_apply(L, t, partition, scaling, tol=tol).values
        inner = sup_distance(f, t_alpha)
        tried.append((m, n, inner))
        if inner < half:
            approx = t_alpha + half
            return approx, sup_distance(f, approx)
    raise DegreeExhaustionError(
        f"no degree pair reached ||f - t^alpha|| < {half:g} "
        f"(best {min(e for *_, e in tried):.4g}); try larger m, n or a smaller |alpha|"
    )


def jackson_error_report(f: SampledFunction, n: int):
    """(||f - Lambda_n f||, 2 w_f(pi sqrt3/n), 2 w_f(2 pi sqrt3/(n+2)))."""
    if n < 2:
        raise ValueError("n must be >= 2")
    approx = varma_apply(f, n)
    actual = sup_distance(f, approx)
    bound = 2.0 * modulus_of_continuity(f, math.pi * math.sqrt(3.0) / n)
    coarse = 2.0 * modulus_of_continuity(f, 2.0 * math.pi * math.sqrt(3.0) / (n + 2))
    return actual, bound, coarse
