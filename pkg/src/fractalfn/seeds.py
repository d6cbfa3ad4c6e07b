"""Builtin seed functions used by the CLI and the verification corpus."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Interval, SampledFunction
from .spaces import RationalTrig, TrigPoly, jackson_kernel, trig_basis

__all__ = ["Seed", "BUILTIN_SEEDS", "get_seed", "fig1_parts", "fig1_rational"]


@dataclass(frozen=True)
class Seed:
    name: str
    fn: Callable
    interval: Interval
    periodic: bool
    smooth: bool

    def sample(self, M: int, interval: Interval | None = None) -> SampledFunction:
        return SampledFunction.from_callable(self.fn, interval or self.interval, M)


_FIG1_NODES = 2.0 * math.pi * np.arange(3) / 3.0


def _fig1_num(x):
    x = np.asarray(x, dtype=float)
    kern = jackson_kernel(3, x[..., None] - _FIG1_NODES) ** 2
    return 27.0 * (kern @ np.sin(_FIG1_NODES))


def _fig1_den(x):
    return 19.0 + 8.0 * np.cos(3.0 * np.asarray(x, dtype=float))


def _fig1(x):
    return _fig1_num(x) / _fig1_den(x)


def fig1_parts():
    """Numerator and denominator of the figure-1 rational seed as callables."""
    return _fig1_num, _fig1_den


def fig1_rational() -> RationalTrig:
    """Coefficient form of the figure-1 seed (numerator degree 4, denominator 3)."""
    x = np.linspace(-math.pi, math.pi, 64, endpoint=False)
    coef, *_ = np.linalg.lstsq(trig_basis(4, x), _fig1_num(x), rcond=None)
    coef[np.abs(coef) < 1e-13] = 0.0
    return RationalTrig(TrigPoly.from_vector(coef, 4), TrigPoly(19.0, (0.0, 0.0, 8.0)))


def _weierstrass_like(x, terms=12, decay=0.6, base=2):
    x = np.asarray(x, dtype=float)
    return sum(decay**k * np.cos(base**k * x) for k in range(terms))


_PI = Interval(-math.pi, math.pi)
_UNIT = Interval(0.0, 1.0)

BUILTIN_SEEDS = {
    "fig1": Seed("fig1", _fig1, _UNIT, periodic=False, smooth=True),
    "sin": Seed("sin", np.sin, _PI, periodic=True, smooth=True),
    "abs_sin": Seed("abs_sin", lambda x: np.abs(np.sin(x)), _PI, periodic=True, smooth=False),
    "exp01": Seed("exp01", np.exp, _UNIT, periodic=False, smooth=True),
    "weierstrass_like": Seed("weierstrass_like", _weierstrass_like, _PI, periodic=True, smooth=False),
}


def get_seed(name: str) -> Seed:
    try:
        return BUILTIN_SEEDS[name]
    except KeyError:
        raise ValueError(
            f"unknown builtin seed {name!r}; choose from {sorted(BUILTIN_SEEDS)}"
        ) from None
