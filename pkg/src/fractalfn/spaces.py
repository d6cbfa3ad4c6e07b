"""Concrete function families: trigonometric polynomials and their quotients,
Bernstein polynomials, the Jackson kernel with the positive interpolating
operator built from it, and the catalogue of base operators L."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .core import Interval, InvariantError, SampledFunction

__all__ = [
    "TrigPoly",
    "RationalTrig",
    "eval_trig",
    "sample_trig",
    "eval_rational",
    "trig_basis",
    "jackson_kernel",
    "varma_denominator",
    "varma_nodes",
    "varma_eval",
    "varma_apply",
    "bernstein_basis",
    "bernstein_apply",
    "modulus_of_continuity",
    "BaseOperator",
    "Bernstein",
    "MultiplyByProfile",
    "ComposeWith",
    "Explicit",
    "quadratic_profile",
    "power_map",
    "base_operator_apply",
]

PERIODIC = Interval(-math.pi, math.pi)
MAX_BERNSTEIN_DEGREE = 60
_JACKSON_EPS = 1e-9


# -- trigonometric polynomials ------------------------------------------------


@dataclass(frozen=True)
class TrigPoly:
    """t(x) = a0 + sum_k (a_k cos kx + b_k sin kx), k = 1..m."""

    a0: float = 0.0
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        m = max(len(a), len(b))
        a += (0.0,) * (m - len(a))
        b += (0.0,) * (m - len(b))
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def degree(self) -> int:
        return len(self.a)

    @classmethod
    def from_vector(cls, coef, m: int) -> "TrigPoly":
        """Inverse of :meth:`to_vector`; layout [a0, a1, b1, ..., am, bm]."""
        coef = np.asarray(coef, dtype=float)
        return cls(coef[0], coef[1::2][:m], coef[2::2][:m])

    def to_vector(self) -> np.ndarray:
        out = np.empty(2 * self.degree + 1)
        out[0] = self.a0
        out[1::2] = self.a
        out[2::2] = self.b
        return out

    def coefficient_sum(self) -> float:
        return abs(self.a0) + sum(map(abs, self.a)) + sum(map(abs, self.b))

    def __call__(self, x):
        return eval_trig(self, x)


def trig_basis(m: int, x) -> np.ndarray:
    """Columns 1, cos x, sin x, ..., cos mx, sin mx evaluated at x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((x.size, 2 * m + 1))
    out[:, 0] = 1.0
    for k in range(1, m + 1):
        out[:, 2 * k - 1] = np.cos(k * x)
        out[:, 2 * k] = np.sin(k * x)
    return out


def eval_trig(t: TrigPoly, x):
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, t.a0)
    for k, (ak, bk) in enumerate(zip(t.a, t.b), start=1):
        if ak:
            out = out + ak * np.cos(k * x)
        if bk:
            out = out + bk * np.sin(k * x)
    return out if out.ndim else float(out)


def sample_trig(t, interval, M: int) -> SampledFunction:
    return SampledFunction.from_callable(t, interval, M)


class RationalTrig:
    """p/q with q > 0, positivity checked on 64*(deg q + 1) sample points."""

    def __init__(self, num: TrigPoly, den: TrigPoly):
        self.num = num
        self.den = den
        probe = np.linspace(-math.pi, math.pi, 64 * (den.degree + 1), endpoint=False)
        lowest = float(np.min(eval_trig(den, probe)))
        if not lowest > 0.0:
            raise InvariantError(
                f"denominator is not positive (sampled minimum {lowest:.6g})"
            )
        self.den_min = lowest

    @property
    def degrees(self):
        return self.num.degree, self.den.degree

    def __call__(self, x):
        return eval_rational(self, x)

    def __repr__(self):
        return f"RationalTrig(num={self.num}, den={self.den})"


def eval_rational(r: RationalTrig, x):
    return eval_trig(r.num, x) / eval_trig(r.den, x)


# -- Jackson kernel and the interpolating operator -----------------------------


def jackson_kernel(n: int, x):
    """(sin(nx/2) / (n sin(x/2)))**2, continuously extended by 1 at x = 0 mod 2pi."""
    if n < 1:
        raise ValueError("Jackson kernel needs n >= 1")
    x = np.asarray(x, dtype=float)
    s = np.sin(x / 2.0)
    small = np.abs(s) < _JACKSON_EPS
    safe = np.where(small, 1.0, s)
    out = np.where(small, 1.0, (np.sin(n * x / 2.0) / (n * safe)) ** 2)
    return out if out.ndim else float(out)


def varma_denominator(n: int, x):
    return 1.0 - ((n * n - 1.0) / (3.0 * n * n)) * (1.0 - np.cos(n * np.asarray(x, dtype=float)))


def varma_nodes(n: int) -> np.ndarray:
    """x_kn = 2k pi/n, folded into [-pi, pi) by periodicity."""
    x = 2.0 * math.pi * np.arange(n) / n
    return np.where(x >= math.pi, x - 2.0 * math.pi, x)


def varma_eval(node_values, n: int, x):
    """Evaluate the operator given the values f(x_kn), k = 0..n-1."""
    if n < 2:
        raise ValueError("the interpolating operator needs n >= 2")
    node_values = np.asarray(node_values, dtype=float)
    if node_values.shape != (n,):
        raise ValueError(f"expected {n} node values")
    x = np.asarray(x, dtype=float)
    xk = 2.0 * math.pi * np.arange(n) / n
    kern = jackson_kernel(n, x[..., None] - xk) ** 2
    out = (kern @ node_values) / varma_denominator(n, x)
    return out if out.ndim else float(out)


def _require_periodic(f: SampledFunction, atol=1e-8):
    if f.interval != PERIODIC:
        raise ValueError("expected a function sampled on [-pi, pi]")
    if abs(f.values[0] - f.values[-1]) > atol:
        raise ValueError("f(-pi) != f(pi): function is not 2pi-periodic")


def varma_apply(f: SampledFunction, n: int) -> SampledFunction:
    if n < 2:
        raise ValueError("the interpolating operator needs n >= 2")
    _require_periodic(f)
    return f.with_values(varma_eval(f(varma_nodes(n)), n, f.grid))


# -- Bernstein operator ---------------------------------------------------------


def bernstein_basis(n: int, t) -> np.ndarray:
    """Matrix of C(n,k) t^k (1-t)^(n-k), rows indexed by t, columns by k."""
    if n < 1:
        raise ValueError("Bernstein degree must be >= 1")
    if n > MAX_BERNSTEIN_DEGREE:
        raise ValueError(f"Bernstein degree above {MAX_BERNSTEIN_DEGREE} is not supported")
    t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
    k = np.arange(n + 1)
    binom = np.array([math.comb(n, j) for j in k], dtype=float)
    return binom * t**k * (1.0 - t) ** (n - k)


def bernstein_apply(f: SampledFunction, n: int) -> SampledFunction:
    iv = f.interval
    samples = f(iv.lo + (np.arange(n + 1) / n) * iv.length)
    t = (f.grid - iv.lo) / iv.length
    values = bernstein_basis(n, t) @ samples
    values[0], values[-1] = samples[0], samples[-1]
    return f.with_values(values)


# -- modulus of continuity ------------------------------------------------------


def modulus_of_continuity(f: SampledFunction, delta: float) -> float:
    """Grid proxy for sup |f(x) - f(y)| over |x - y| <= delta."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    v = f.values
    k = int(math.floor(delta / f.step * (1 + 1e-12)))
    if k < 1:
        return 0.0
    if k + 1 >= v.size:
        return float(v.max() - v.min())
    # any two nodes within k steps share a window of k+1 consecutive samples
    width = k + 1
    hi = maximum_filter1d(v, size=width, mode="nearest")
    lo = minimum_filter1d(v, size=width, mode="nearest")
    return float(np.max(hi - lo))


# -- base operators L -----------------------------------------------------------


class BaseOperator:
    """Bounded linear map L with (Lf)(x_0) = f(x_0), (Lf)(x_N) = f(x_N).

    Subclasses report ``norm`` (||L||, or an upper bound) and ``id_minus_norm``
    (||Id - L|| or an upper bound); ``exact_norms`` says which.
    """

    kind = "abstract"
    exact_norms = False
    fixes_constants = False
    norm: float | None = None
    id_minus_norm: float | None = None

    def apply(self, f: SampledFunction) -> SampledFunction:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class Bernstein(BaseOperator):
    degree: int
    kind = "bernstein"
    fixes_constants = True
    norm = 1.0
    id_minus_norm = 2.0

    def __post_init__(self):
        if not 1 <= self.degree <= MAX_BERNSTEIN_DEGREE:
            raise ValueError(f"Bernstein degree must lie in [1, {MAX_BERNSTEIN_DEGREE}]")

    def apply(self, f):
        return bernstein_apply(f, self.degree)

    def describe(self):
        return {"kind": self.kind, "degree": self.degree}


def _dense(interval: Interval) -> np.ndarray:
    return interval.grid(2**16 + 1)


@dataclass(frozen=True)
class MultiplyByProfile(BaseOperator):
    """Lf = nu * f; requires nu = 1 at both interval endpoints."""

    profile: Callable = field(repr=False)
    interval: Interval
    name: str = "profile"
    kind = "profile"
    exact_norms = True

    def __post_init__(self):
        iv = self.interval
        ends = np.asarray(self.profile(np.array([iv.lo, iv.hi])), dtype=float)
        if np.max(np.abs(ends - 1.0)) > 1e-10:
            raise InvariantError("profile must equal 1 at both endpoints")
        nu = np.asarray(self.profile(_dense(iv)), dtype=float)
        object.__setattr__(self, "norm", float(np.max(np.abs(nu))))
        object.__setattr__(self, "id_minus_norm", float(np.max(np.abs(1.0 - nu))))

    def apply(self, f):
        return f.with_values(np.asarray(self.profile(f.grid), dtype=float) * f.values)

    def describe(self):
        return {"kind": self.kind, "profile": self.name}


@dataclass(frozen=True)
class ComposeWith(BaseOperator):
    """Lf = f o phi for an increasing bijection phi of the interval."""

    phi: Callable = field(repr=False)
    interval: Interval
    name: str = "phi"
    kind = "compose"
    fixes_constants = True
    norm = 1.0
    id_minus_norm = 2.0

    def __post_init__(self):
        iv = self.interval
        ends = np.asarray(self.phi(np.array([iv.lo, iv.hi])), dtype=float)
        if abs(ends[0] - iv.lo) > 1e-10 or abs(ends[1] - iv.hi) > 1e-10:
            raise InvariantError("phi must fix both interval endpoints")
        vals = np.asarray(self.phi(_dense(iv)), dtype=float)
        if np.any(np.diff(vals) < 0):
            raise InvariantError("phi must be increasing")

    def apply(self, f):
        x = np.clip(np.asarray(self.phi(f.grid), dtype=float), f.interval.lo, f.interval.hi)
        values = f(x)
        values[0], values[-1] = f.values[0], f.values[-1]
        return f.with_values(values)

    def describe(self):
        return {"kind": self.kind, "phi": self.name}


class Explicit(BaseOperator):
    """A fixed base function b, independent of the seed (not linear)."""

    kind = "explicit"

    def __init__(self, b: SampledFunction):
        self.b = b

    def apply(self, f):
        if self.b.same_grid(f):
            return self.b
        return f.with_values(self.b(f.grid))


def quadratic_profile(interval) -> MultiplyByProfile:
    """nu(x) = 1 + (x - lo)(x - hi)/(hi - lo)^2; equals 1 + x(x - 1) on [0, 1]."""
    iv = interval if isinstance(interval, Interval) else Interval(*interval)
    lo, hi, w2 = iv.lo, iv.hi, iv.length**2

    def nu(x):
        x = np.asarray(x, dtype=float)
        return 1.0 + (x - lo) * (x - hi) / w2

    return MultiplyByProfile(nu, iv, name="quadratic")


def power_map(interval, power: float = 3.0) -> ComposeWith:
    """phi(x) = lo + w ((x - lo)/w)^power; equals x^power on [0, 1]."""
    iv = interval if isinstance(interval, Interval) else Interval(*interval)
    lo, w = iv.lo, iv.length

    def phi(x):
        u = np.clip((np.asarray(x, dtype=float) - lo) / w, 0.0, 1.0)
        return lo + w * u**power

    return ComposeWith(phi, iv, name=f"power{power:g}")


def base_operator_apply(L: BaseOperator, f: SampledFunction, atol=1e-10) -> SampledFunction:
    b = L.apply(f)
    if abs(b.values[0] - f.values[0]) > atol or abs(b.values[-1] - f.values[-1]) > atol:
        raise InvariantError("base function does not match the seed at the endpoints")
    return b
