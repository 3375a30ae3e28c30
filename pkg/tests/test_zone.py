import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from zonefit.errors import EmptyContourError, GridMismatchError, InvalidExtentError, InvalidParamsError
from zonefit.zone import (
    DEFAULT_EXTENT,
    KBO_ZONE,
    R_CAP,
    Call,
    Extent,
    ProbabilityGrid,
    ZoneParams,
    contour,
    derived_metrics,
    grid_difference,
    probability_grid,
    rulebook_call,
    strike_probability,
    superellipse_distance,
)

P = ZoneParams(x0=0.0, y0=2.5, alpha=0.9, lam=1.11, beta=20.0, r=8.0)

params_st = st.builds(
    ZoneParams,
    x0=st.floats(-0.5, 0.5),
    y0=st.floats(2.0, 3.0),
    alpha=st.floats(0.3, 1.5),
    lam=st.floats(0.5, 2.0),
    beta=st.floats(1.0, 1e4),
    r=st.floats(1.0, R_CAP),
)


def test_probability_examples():
    assert strike_probability(P, 0.0, 2.5) == pytest.approx(1 / (1 + math.exp(-18.0)), rel=1e-15)
    assert strike_probability(P, 0.9, 2.5) == pytest.approx(0.5, abs=1e-15)
    # one unit of beta*(d - alpha) outside the boundary
    assert strike_probability(P, 0.9 + 1 / 20, 2.5) == pytest.approx(0.2689414213699951, rel=1e-12)


@pytest.mark.parametrize(
    "kw", [dict(alpha=0.0), dict(lam=-1.0), dict(beta=0.0), dict(r=0.5), dict(r=65.0), dict(x0=math.nan)]
)
def test_invalid_params(kw):
    base = dict(x0=0.0, y0=2.5, alpha=0.9, lam=1.11, beta=20.0, r=8.0)
    with pytest.raises(InvalidParamsError):
        ZoneParams(**{**base, **kw})


def test_distance_at_rcap_is_finite():
    p = ZoneParams(0.0, 2.5, 0.9, 1.0, 10.0, R_CAP)
    d = superellipse_distance(p, 1e150, 2.5 + 1e150)
    assert math.isfinite(d)
    assert d == pytest.approx(1e150 * 2 ** (1 / R_CAP), rel=1e-12)
    # 0.9 * 2**(1/64), frozen from exact arithmetic
    assert superellipse_distance(p, 0.9, 3.4) == pytest.approx(0.9098003574465304, rel=1e-14)


def test_norm_limits():
    rng = np.random.default_rng(1)
    dx, dy = rng.normal(size=(2, 500))
    diamond = ZoneParams(0.0, 0.0, 1.0, 1.7, 1.0, 1.0)
    assert np.allclose(superellipse_distance(diamond, dx, dy), np.abs(dx) + np.abs(dy / 1.7), rtol=1e-13)
    box = ZoneParams(0.0, 0.0, 1.0, 1.7, 1.0, R_CAP)
    inf_norm = np.maximum(np.abs(dx), np.abs(dy / 1.7))
    d = superellipse_distance(box, dx, dy)
    assert np.all(d >= inf_norm * (1 - 1e-15))
    assert np.all(d <= inf_norm * 2 ** (1 / R_CAP) * (1 + 1e-15))


@settings(max_examples=100, deadline=None)
@given(params_st, st.floats(0, 2 * math.pi), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_radial_monotonicity(p, theta, s1, s2):
    lo, hi = sorted((s1, s2))
    c, s = math.cos(theta), math.sin(theta)
    p_lo = strike_probability(p, p.x0 + lo * c, p.y0 + lo * s)
    p_hi = strike_probability(p, p.x0 + hi * c, p.y0 + hi * s)
    assert p_hi <= p_lo + 1e-15


@settings(max_examples=100, deadline=None)
@given(params_st, st.floats(-3, 3), st.floats(-3, 3))
def test_reflection_symmetry(p, dx, dy):
    v = strike_probability(p, p.x0 + dx, p.y0 + dy)
    # x0 + dx and x0 - dx round differently, so compare to rounding level
    assert strike_probability(p, p.x0 - dx, p.y0 + dy) == pytest.approx(v, rel=1e-12, abs=1e-300)
    assert strike_probability(p, p.x0 + dx, p.y0 - dy) == pytest.approx(v, rel=1e-12, abs=1e-300)


@settings(max_examples=50, deadline=None)
@given(params_st)
def test_scale_coherence(p):
    q = ZoneParams(p.x0, p.y0, 2 * p.alpha, p.lam, p.beta / 2, p.r)
    assert strike_probability(q, p.x0 + q.alpha, p.y0) == pytest.approx(0.5, abs=1e-12)
    assert strike_probability(p, p.x0, p.y0 + p.alpha * p.lam) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(params_st, st.sampled_from([0.1, 0.25, 0.5, 0.75, 0.9]))
def test_contour_consistency(p, level):
    try:
        pts = contour(p, level, 128)
    except EmptyContourError:
        assume(False)
    vals = strike_probability(p, pts[:, 0], pts[:, 1])
    assert np.max(np.abs(vals - level)) < 1e-9


def test_contour_shape_and_start():
    pts = contour(P, 0.5, 256)
    assert pts.shape == (256, 2)
    assert pts[0] == pytest.approx([0.9, 2.5])
    # cos(pi/2) is ~6e-17, and its 2/r power is not quite zero
    assert pts[64] == pytest.approx([0.0, 2.5 + 0.9 * 1.11], abs=1e-3)
    assert pts[64][1] == pytest.approx(2.5 + 0.9 * 1.11, rel=1e-14)


def test_unreachable_contour():
    low_beta = ZoneParams(0.0, 2.5, 0.1, 1.0, 1.0, 2.0)
    with pytest.raises(EmptyContourError):
        contour(low_beta, 0.9)


def test_rulebook_calls():
    assert rulebook_call(KBO_ZONE, 0.0, 2.5) is Call.STRIKE
    assert rulebook_call(KBO_ZONE, 0.9, 2.5) is Call.BALL
    assert rulebook_call(KBO_ZONE, -0.9, 2.5) is Call.BALL
    assert rulebook_call(KBO_ZONE, 0.0, 1.5) is Call.BALL
    assert rulebook_call(KBO_ZONE, 0.0, 3.5) is Call.BALL
    assert rulebook_call(KBO_ZONE, 0.8999, 3.4999) is Call.STRIKE


def test_derived_metrics():
    m = derived_metrics(ZoneParams(0.0, 2.5, 0.9, 10 / 9, 10.0, 2.0))
    assert (m.width, m.height) == pytest.approx((1.8, 2.0))
    m = derived_metrics(ZoneParams(0.1, 2.4, 1.0, 1.0, 10.0, 2.0))
    assert (m.width, m.height, m.center) == (2.0, 2.0, (0.1, 2.4))
    assert derived_metrics(P).height / derived_metrics(P).width == pytest.approx(P.lam)


def test_default_grid():
    g = probability_grid(P)
    assert g.shape == (60, 60)
    assert np.all((g.values > 0) & (g.values < 1))
    assert g.x_centers[0] == pytest.approx(-1.475)
    assert g.y_centers[-1] == pytest.approx(3.975)


def test_single_cell_grid():
    g = probability_grid(P, Extent(-0.025, 0.025, 2.475, 2.525), 0.05)
    assert g.shape == (1, 1)
    assert g.values[0, 0] == strike_probability(P, 0.0, 2.5)


def test_grid_values_at_centres():
    g = probability_grid(P, Extent(-1.0, 1.0, 1.5, 3.5), 0.25)
    i, j = 3, 5
    assert g.values[i, j] == strike_probability(P, g.x_centers[j], g.y_centers[i])


@pytest.mark.parametrize("extent,step", [(Extent(1.0, -1.0, 1.0, 4.0), 0.05), (DEFAULT_EXTENT, 0.0), (DEFAULT_EXTENT, 0.07)])
def test_invalid_extent(extent, step):
    with pytest.raises(InvalidExtentError):
        probability_grid(P, extent, step)


def test_grid_difference():
    a = probability_grid(P)
    b = probability_grid(ZoneParams(0.05, 2.45, 0.85, 1.2, 8.0, 3.0))
    assert np.all(grid_difference(a, a).values == 0)
    assert np.all(grid_difference(a, b).values + grid_difference(b, a).values == 0)
    with pytest.raises(GridMismatchError):
        grid_difference(a, probability_grid(P, DEFAULT_EXTENT, 0.1))


def test_grid_csv_round_trip():
    g = probability_grid(P, Extent(-1.0, 1.0, 1.5, 3.5), 0.1)
    text = g.to_csv()
    lines = text.splitlines()
    assert lines[1].startswith("y\\x,-0.950000")
    back = ProbabilityGrid.from_csv(text)
    assert back.same_frame(g)
    assert np.allclose(back.values, g.values, rtol=1e-11, atol=0)
