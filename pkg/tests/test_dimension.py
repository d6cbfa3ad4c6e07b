import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fractalfn.core import Interval, Partition, SampledFunction, ScalingVector, build_affine_maps
from fractalfn.dimension import (
    box_count_estimate,
    dimension_preserving_sequence,
    dimension_report,
    is_collinear,
    moran_residual,
    solve_box_dimension,
)
from oracles import box_dimension_root

UNIT = Interval(0.0, 1.0)


def D(alphas, nodes):
    return solve_box_dimension(ScalingVector(alphas), build_affine_maps(Partition(nodes)))


def test_closed_forms():
    assert D([0.9] * 10, np.linspace(0, 1, 11)) == pytest.approx(1 + math.log10(9), abs=1e-10)
    assert D([0.9] * 2, [0, 0.5, 1]) == pytest.approx(1 + math.log2(1.8), abs=1e-10)
    assert D([0.3, -0.4, 0.2], [0, 0.2, 0.6, 1]) == 1.0
    assert D([0.5, -0.5], [0, 0.5, 1]) == 1.0


@given(st.integers(2, 12), st.data())
def test_root_matches_brent_oracle(N, data):
    al = data.draw(st.lists(st.floats(-0.99, 0.99), min_size=N, max_size=N))
    gaps = data.draw(st.lists(st.floats(0.1, 1.0), min_size=N, max_size=N))
    nodes = np.r_[0.0, np.cumsum(gaps)]
    maps = build_affine_maps(Partition(nodes))
    got = solve_box_dimension(ScalingVector(al), maps)
    assert 1.0 <= got <= 2.0
    if sum(map(abs, al)) > 1.0:
        assert got == pytest.approx(box_dimension_root(al, maps.slopes), abs=1e-10)
        assert abs(moran_residual(ScalingVector(al), maps, got)) <= 1e-12
    else:
        assert got == 1.0


@given(st.floats(0.05, 0.95), st.integers(2, 10))
def test_dimension_monotone_in_alpha(a, N):
    nodes = np.linspace(0, 1, N + 1)
    assert D([a] * N, nodes) <= D([min(a + 0.04, 0.99)] * N, nodes) + 1e-12


def test_box_count_of_a_line_and_a_curve():
    line = SampledFunction.from_callable(lambda x: 2 * x + 1, UNIT, 2**14 + 1)
    est, r2, scales = box_count_estimate(line)
    assert est == pytest.approx(1.0, abs=0.02)
    assert r2 > 0.99 and len(scales) == 7
    smooth = SampledFunction.from_callable(np.sin, Interval(-math.pi, math.pi), 2**14 + 1)
    assert 0.95 <= box_count_estimate(smooth)[0] <= 1.1


def test_box_count_validates_arguments():
    f = SampledFunction.from_callable(np.sin, UNIT, 1025)
    with pytest.raises(ValueError):
        box_count_estimate(f, n_scales=2)
    with pytest.raises(ValueError):
        box_count_estimate(f, min_scale=0.5, max_scale=0.1)
    with pytest.raises(ValueError):
        box_count_estimate(f, count="other")


def test_both_count_rules_give_finite_slopes():
    f = SampledFunction.from_callable(lambda x: np.sin(30 * x), UNIT, 2**12 + 1)
    a = box_count_estimate(f, count="min_cover")
    b = box_count_estimate(f, count="mesh_upper")
    assert np.isfinite(a[0]) and np.isfinite(b[0])


def test_collinearity():
    part = Partition.uniform(0, 1, 4)
    assert is_collinear(SampledFunction.from_callable(lambda x: 3 * x, UNIT, 257), part)
    assert not is_collinear(SampledFunction.from_callable(np.exp, UNIT, 257), part)


def test_report_fields():
    f = SampledFunction.from_callable(np.exp, UNIT, 257)
    rep = dimension_report(ScalingVector.uniform(0.9, 10), Partition.uniform(0, 1, 10), seed=f)
    d = rep.to_dict()
    assert d["theoretical_D"] == pytest.approx(1.9542425094, abs=1e-9)
    assert d["sum_abs_alpha"] == pytest.approx(9.0)
    assert d["hypotheses"]["noncollinear"] is True
    assert d["estimator_D"] is None


def test_dimension_preserving_sequence():
    f = SampledFunction.from_callable(np.exp, UNIT, 2**12 + 1)
    rep = dimension_preserving_sequence(f, Partition.uniform(0, 1, 4), ScalingVector.uniform(0.6, 4), (4, 8, 16))
    mem = rep["members"]
    assert rep["same_dimension"]
    assert len({m["theoretical_D"] for m in mem}) == 1
    dists = [m["sup_distance"] for m in mem]
    assert dists[0] > dists[1] > dists[2]
    for m in mem:
        assert m["sup_distance"] <= m["bound"] + m["slack"]
