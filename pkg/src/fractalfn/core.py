"""Domain types shared by every other module: intervals, partitions, scaling
vectors, the affine maps L_i and uniformly sampled functions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ConvergenceError",
    "InvariantError",
    "DegreeExhaustionError",
    "Interval",
    "Partition",
    "ScalingVector",
    "AffineMapFamily",
    "SampledFunction",
    "build_affine_maps",
    "locate_subinterval",
    "sup_norm",
    "sup_distance",
]


class InvariantError(ValueError):
    """A construction invariant (endpoint matching, positivity, ...) fails."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, final_step=None, iterations=None):
        super().__init__(message)
        self.final_step = final_step
        self.iterations = iterations


class DegreeExhaustionError(RuntimeError):
    """No degree in the allowed range reaches the requested accuracy."""


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
            raise ValueError(f"interval needs finite lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def grid(self, M: int) -> np.ndarray:
        return self.lo + np.arange(M) * (self.length / (M - 1))

    def contains(self, x, rtol=1e-12) -> bool:
        slack = rtol * max(1.0, abs(self.lo), abs(self.hi))
        return self.lo - slack <= x <= self.hi + slack


class Partition:
    """Strictly increasing nodes x_0 < ... < x_N with N >= 2."""

    def __init__(self, nodes: Sequence[float]):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("a partition needs at least 3 nodes (N >= 2)")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("partition nodes must be finite")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("partition nodes must be strictly increasing")
        self._nodes = _frozen(nodes)

    @classmethod
    def uniform(cls, lo: float, hi: float, N: int) -> "Partition":
        if N < 2:
            raise ValueError("N must be >= 2")
        return cls(Interval(lo, hi).grid(N + 1))

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def subinterval_count(self) -> int:
        return self._nodes.size - 1

    def interval(self) -> Interval:
        return Interval(self._nodes[0], self._nodes[-1])

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self._nodes, other._nodes)

    def __hash__(self):
        return hash(self._nodes.tobytes())

    def __repr__(self):
        return f"Partition(N={self.subinterval_count}, [{self._nodes[0]}, {self._nodes[-1]}])"


class ScalingVector:
    """Scale factors alpha_i, one per subinterval, each strictly inside (-1, 1)."""

    def __init__(self, alphas: Sequence[float]):
        alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
        if alphas.ndim != 1 or alphas.size == 0:
            raise ValueError("scaling vector must be a non-empty 1-d sequence")
        if not np.all(np.abs(alphas) < 1.0):
            raise ValueError("every scale factor must satisfy |alpha_i| < 1")
        self._alphas = _frozen(alphas)

    @classmethod
    def uniform(cls, value: float, N: int) -> "ScalingVector":
        return cls(np.full(N, float(value)))

    @property
    def alphas(self) -> np.ndarray:
        return self._alphas

    def __len__(self):
        return self._alphas.size

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self._alphas)))

    def sum_abs(self) -> float:
        return float(np.sum(np.abs(self._alphas)))

    def contraction_ratio(self) -> float:
        """|alpha|/(1-|alpha|), the factor that appears in every perturbation bound."""
        a = self.sup_abs()
        return a / (1.0 - a)

    def __repr__(self):
        return f"ScalingVector({self._alphas.tolist()})"


@dataclass(frozen=True)
class AffineMapFamily:
    """L_i(x) = a_i x + c_i mapping [x_0, x_N] onto [x_{i-1}, x_i]."""

    slopes: np.ndarray
    offsets: np.ndarray
    partition: Partition

    def __len__(self):
        return self.slopes.size

    def forward(self, i: int, x):
        """L_i(x) for the 1-based subinterval index i."""
        return self.slopes[i - 1] * np.asarray(x, dtype=float) + self.offsets[i - 1]

    def inverse(self, i: int, x):
        return (np.asarray(x, dtype=float) - self.offsets[i - 1]) / self.slopes[i - 1]


def build_affine_maps(partition: Partition) -> AffineMapFamily:
    x = partition.nodes
    width = x[-1] - x[0]
    slopes = np.diff(x) / width
    # solve a_i x_0 + c_i = x_{i-1}; the right endpoint then follows from the slope
    offsets = x[:-1] - slopes * x[0]
    return AffineMapFamily(_frozen(slopes), _frozen(offsets), partition)


def locate_subinterval(partition: Partition, x: float) -> int:
    """1-based index i with x in [x_{i-1}, x_i); the last subinterval is closed."""
    nodes = partition.nodes
    if not partition.interval().contains(x, rtol=0.0):
        raise ValueError(f"x={x} lies outside [{nodes[0]}, {nodes[-1]}]")
    i = int(np.searchsorted(nodes, x, side="right"))
    return min(i, partition.subinterval_count)


def _locate_many(partition: Partition, xs: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(partition.nodes, xs, side="right")
    return np.clip(idx, 1, partition.subinterval_count)


class SampledFunction:
    """Values of a continuous function on a uniform grid of M points.

    Evaluation between nodes is piecewise linear; at the nodes it returns the
    stored values bit for bit.
    """

    def __init__(self, interval: Interval, values: Sequence[float]):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("a sampled function needs at least 2 values")
        if not isinstance(interval, Interval):
            interval = Interval(*interval)
        self.interval = interval
        self._values = _frozen(values)

    @classmethod
    def from_callable(cls, fn: Callable, interval, M: int) -> "SampledFunction":
        if not isinstance(interval, Interval):
            interval = Interval(*interval)
        if M < 2:
            raise ValueError("M must be >= 2")
        return cls(interval, fn(interval.grid(M)))

    @classmethod
    def constant(cls, value: float, interval, M: int) -> "SampledFunction":
        return cls.from_callable(lambda x: np.full_like(x, float(value)), interval, M)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def sample_count(self) -> int:
        return self._values.size

    @property
    def step(self) -> float:
        return self.interval.length / (self.sample_count - 1)

    @property
    def grid(self) -> np.ndarray:
        return self.interval.grid(self.sample_count)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        # interpolate in the index coordinate so that nodes are hit exactly
        t = (x - self.interval.lo) / self.step
        r = np.rint(t)
        # grid points recomputed from x are off by rounding; snap them
        t = np.where(np.abs(t - r) < 1e-9, r, t)
        j = np.clip(np.floor(t).astype(np.int64), 0, self.sample_count - 2)
        w = t - j
        v = self._values
        out = v[j] + w * (v[j + 1] - v[j])
        on_node = (w == 0.0) | (w == 1.0)
        if np.any(on_node):
            out = np.where(w == 0.0, v[j], np.where(w == 1.0, v[np.minimum(j + 1, v.size - 1)], out))
        return out if out.ndim else float(out)

    def same_grid(self, other: "SampledFunction") -> bool:
        return self.interval == other.interval and self.sample_count == other.sample_count

    def resample(self, M: int) -> "SampledFunction":
        return SampledFunction(self.interval, self(self.interval.grid(M)))

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.interval, values)

    def _check(self, other):
        if not self.same_grid(other):
            raise ValueError("sampled functions live on different grids")

    def __add__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            return self.with_values(self._values + other._values)
        return self.with_values(self._values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            return self.with_values(self._values - other._values)
        return self.with_values(self._values - float(other))

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            return self.with_values(self._values * other._values)
        return self.with_values(self._values * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self._values)

    def __repr__(self):
        return (
            f"SampledFunction([{self.interval.lo}, {self.interval.hi}], "
            f"M={self.sample_count})"
        )


def sup_norm(f: SampledFunction) -> float:
    return float(np.max(np.abs(f.values)))


def sup_distance(f: SampledFunction, g: SampledFunction) -> float:
    if not f.same_grid(g):
        raise ValueError("sup_distance needs identical interval and sample count")
    return float(np.max(np.abs(f.values - g.values)))
