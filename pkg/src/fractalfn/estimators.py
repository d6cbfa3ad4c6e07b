"""scikit-learn style wrappers around the fractal engine and the minimax solvers.

``FractalTransformer`` maps rows of sampled functions (one function per row,
uniform grid over ``interval``) to their alpha-fractal perturbations. The
minimax regressors fit discrete best uniform approximants to scattered
(x, y) data and predict with them.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import chebyshev as C
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .approx import AlgebraicRational, _differential_correction, _exchange
from .core import Interval, Partition, SampledFunction, ScalingVector, build_affine_maps
from .dimension import solve_box_dimension
from .fractal import FractalSpec, alpha_fractal
from .spaces import Bernstein, RationalTrig, TrigPoly, power_map, quadratic_profile, trig_basis

__all__ = ["FractalTransformer", "TrigMinimaxRegressor", "RationalMinimaxRegressor"]


def _make_base(kind, degree, power, interval):
    if kind == "bernstein":
        return Bernstein(int(degree))
    if kind == "profile":
        return quadratic_profile(interval)
    if kind == "compose":
        return power_map(interval, power)
    raise ValueError(f"unknown base kind {kind!r}")


class FractalTransformer(TransformerMixin, BaseEstimator):
    """Row-wise alpha-fractal perturbation F^alpha(f) with base L f.

    Parameters
    ----------
    interval : (lo, hi)
    n_subintervals : int
        Uniform partition size; ignored when ``nodes`` is given.
    nodes : sequence of float, optional
    alpha : float or sequence of float
    base : {"bernstein", "profile", "compose"}
    degree : int
        Bernstein degree for ``base="bernstein"``.
    power : float
        Exponent of the monotone reparametrization for ``base="compose"``.
    """

    def __init__(
        self,
        interval=(0.0, 1.0),
        n_subintervals=4,
        nodes=None,
        alpha=0.5,
        base="bernstein",
        degree=8,
        power=3.0,
        tol=None,
        max_iter=10000,
        method="picard",
    ):
        self.interval = interval
        self.n_subintervals = n_subintervals
        self.nodes = nodes
        self.alpha = alpha
        self.base = base
        self.degree = degree
        self.power = power
        self.tol = tol
        self.max_iter = max_iter
        self.method = method

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_features=3)
        lo, hi = self.interval
        self.interval_ = Interval(float(lo), float(hi))
        if self.nodes is not None:
            self.partition_ = Partition(self.nodes)
        else:
            self.partition_ = Partition.uniform(lo, hi, int(self.n_subintervals))
        N = self.partition_.subinterval_count
        if np.ndim(self.alpha) == 0:
            self.scaling_ = ScalingVector.uniform(float(self.alpha), N)
        else:
            self.scaling_ = ScalingVector(self.alpha)
        self.base_ = _make_base(self.base, self.degree, self.power, self.interval_)
        self.dimension_ = solve_box_dimension(self.scaling_, build_affine_maps(self.partition_))
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "partition_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} samples per row, expected {self.n_features_in_}"
            )
        out = np.empty_like(X)
        for k, row in enumerate(X):
            f = SampledFunction(self.interval_, row)
            spec = FractalSpec(f, self.partition_, self.scaling_, self.base_)
            res = alpha_fractal(spec, tol=self.tol, max_iter=self.max_iter, method=self.method)
            out[k] = res.values.values
        return out


def _levelled_fit(P, y, Q=None, max_iter=60):
    # rows of P must follow increasing abscissa
    coef, _, _, ok = _exchange(P, y)
    flags = [] if ok else ["degraded_convergence"]
    if Q is None:
        return coef, None, flags
    q0 = np.zeros(Q.shape[1])
    q0[0] = 1.0
    p, q, _, _, _, more = _differential_correction(P, Q, y, coef, q0, max_iter)
    return p, q, flags + more


class TrigMinimaxRegressor(RegressorMixin, BaseEstimator):
    """Discrete minimax fit by p/q with trig degrees (m, n) on 2pi-periodic data.

    ``n = 0`` gives the best trigonometric polynomial of degree m.
    """

    def __init__(self, m=2, n=0, max_iter=60):
        self.m = m
        self.n = n
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=2 * (self.m + self.n) + 3)
        if X.shape[1] != 1:
            raise ValueError("X must have exactly one column of abscissae")
        x = np.mod(X[:, 0] + math.pi, 2.0 * math.pi) - math.pi
        order = np.argsort(x, kind="stable")
        x, y = x[order], y[order]
        P = trig_basis(self.m, x)
        Q = trig_basis(self.n, x) if self.n > 0 else None
        p, q, flags = _levelled_fit(P, y, Q, self.max_iter)
        den = TrigPoly.from_vector(q, self.n) if q is not None else TrigPoly(1.0)
        self.approximant_ = RationalTrig(TrigPoly.from_vector(p, self.m), den)
        self.error_ = float(np.max(np.abs(y - self.approximant_(x))))
        self.flags_ = flags
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "approximant_")
        X = check_array(X)
        return self.approximant_(X[:, 0])


class RationalMinimaxRegressor(RegressorMixin, BaseEstimator):
    """Discrete minimax fit by algebraic rationals of type (l, m).

    The Chebyshev basis is taken over ``interval``, or over the data range when
    ``interval`` is None.
    """

    def __init__(self, l=2, m=0, interval=None, max_iter=60):
        self.l = l
        self.m = m
        self.interval = interval
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=self.l + self.m + 2)
        if X.shape[1] != 1:
            raise ValueError("X must have exactly one column of abscissae")
        order = np.argsort(X[:, 0], kind="stable")
        x, y = X[order, 0], y[order]
        lo, hi = self.interval if self.interval is not None else (x[0], x[-1])
        iv = Interval(float(lo), float(hi))
        t = (2.0 * x - iv.lo - iv.hi) / iv.length
        P = C.chebvander(t, self.l)
        Q = C.chebvander(t, self.m) if self.m > 0 else None
        p, q, flags = _levelled_fit(P, y, Q, self.max_iter)
        self.approximant_ = AlgebraicRational(p, q if q is not None else np.ones(1), iv)
        self.error_ = float(np.max(np.abs(y - self.approximant_(x))))
        self.flags_ = flags
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "approximant_")
        X = check_array(X)
        return self.approximant_(X[:, 0])
