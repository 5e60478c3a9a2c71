from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from voronoi_limits.density import (
    GridDensity,
    IsotropicGaussian,
    Mixture,
    UniformBox,
    ball_measure,
    density_eval,
    density_from_spec,
    density_sample,
    predicate_measure_mc,
    read_grid_csv,
    write_grid_csv,
)
from voronoi_limits.geometry import Ball
from voronoi_limits.rng import stream

SQUARE = UniformBox([-1, -1], [1, 1])
GAUSS = IsotropicGaussian([0.0, 0.0], 1.0)


def test_density_eval_examples():
    assert density_eval(SQUARE, [0, 0]) == pytest.approx(0.25)
    assert density_eval(SQUARE, [5, 5]) == 0.0
    assert density_eval(GAUSS, [0, 0]) == pytest.approx(1 / (2 * math.pi))


def test_uniform_samples_in_box():
    rng = stream(1, "dens")
    pts = np.array([density_sample(SQUARE, rng) for _ in range(200)])
    assert np.all(np.abs(pts) <= 1)
    pts = SQUARE.sample(rng, 100_000)
    assert np.all(np.abs(pts) <= 1)


def test_gaussian_sample_mean():
    g = IsotropicGaussian([1.0, -2.0], 0.7)
    pts = g.sample(stream(2, "dens"), 100_000)
    assert np.all(np.abs(pts.mean(axis=0) - [1.0, -2.0]) <= 3 * 0.7 / math.sqrt(len(pts)))


def test_mixture_weights():
    mix = Mixture([0.5, 0.5], [UniformBox([0, 0], [1, 1]), UniformBox([2, 0], [3, 1])])
    n = 100_000
    pts = mix.sample(stream(3, "dens"), n)
    frac = np.mean(pts[:, 0] < 1.5)
    assert abs(frac - 0.5) <= 3 * math.sqrt(0.25 / n)
    with pytest.raises(ValueError):
        Mixture([0.5, 0.6], [SQUARE, SQUARE])


def test_ball_measure_examples():
    assert ball_measure(SQUARE, Ball([0, 0], 0.5)) == pytest.approx(0.25 * math.pi * 0.25, rel=1e-14)
    for dens in (SQUARE, GAUSS):
        assert ball_measure(dens, Ball([0.3, 0.1], 0.0)) == 0.0
    assert ball_measure(GAUSS, Ball([0, 0], 1)) == pytest.approx(1 - math.exp(-0.5), rel=1e-12)


def test_gaussian_ball_measure_against_quadrature():
    c, r = np.array([0.7, -0.2]), 0.9
    f = lambda y, x: math.exp(-(x * x + y * y) / 2) / (2 * math.pi)
    oracle, _ = integrate.dblquad(f, c[0] - r, c[0] + r,
                                  lambda x: c[1] - math.sqrt(max(r * r - (x - c[0]) ** 2, 0)),
                                  lambda x: c[1] + math.sqrt(max(r * r - (x - c[0]) ** 2, 0)))
    assert ball_measure(GAUSS, Ball(c, r)) == pytest.approx(oracle, abs=1e-7)


def test_gaussian_ball_measure_mc_oracle():
    ball = Ball([0, 0], 1)
    est, se = predicate_measure_mc(GAUSS, lambda x: np.sum(x * x, axis=1) < 1, 200_000, stream(4, "dens"),
                                   vectorized=True)
    assert abs(est - ball_measure(GAUSS, ball)) <= 3 * se


@settings(max_examples=100, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0, 3), st.floats(0, 3))
def test_ball_measure_monotone_and_bounded(cx, cy, r1, r2):
    lo, hi = sorted((r1, r2))
    for dens in (SQUARE, GAUSS):
        a = ball_measure(dens, Ball([cx, cy], lo))
        b = ball_measure(dens, Ball([cx, cy], hi))
        assert 0.0 <= a <= b + 1e-12 <= 1.0 + 2e-12
    assert ball_measure(GAUSS, Ball([cx, cy], 50.0)) == pytest.approx(1.0)
    assert ball_measure(SQUARE, Ball([cx, cy], 50.0)) == pytest.approx(1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0, 0.49))
def test_uniform_ball_inside_box_is_exact(cx, cy, r):
    assert ball_measure(SQUARE, Ball([cx, cy], r)) == pytest.approx(0.25 * math.pi * r * r, rel=1e-12, abs=1e-15)


def test_uniform_ball_measure_1d():
    seg = UniformBox([-1.0], [1.0])
    assert ball_measure(seg, Ball([0.9], 0.5)) == pytest.approx(0.3)


def test_predicate_measure_trivial():
    rng = stream(5, "dens")
    assert predicate_measure_mc(SQUARE, lambda p: True, 1000, rng) == (1.0, 0.0)
    assert predicate_measure_mc(SQUARE, lambda p: False, 1000, rng) == (0.0, 0.0)


def test_predicate_measure_matches_ball_measure():
    rng = stream(6, "dens")
    est, se = predicate_measure_mc(SQUARE, lambda p: p @ p < 0.25, 50_000, rng)
    assert abs(est - ball_measure(SQUARE, Ball([0, 0], 0.5))) <= 3 * se


def test_predicate_vs_ball_coverage():
    ok = 0
    runs = 100
    for i in range(runs):
        rng = stream(7, "cover", i)
        c = rng.uniform(-1, 1, 2)
        r = rng.uniform(0.1, 1.0)
        est, se = predicate_measure_mc(GAUSS, lambda x: np.sum((x - c) ** 2, axis=1) < r * r, 20_000, rng,
                                       vectorized=True)
        ok += abs(est - ball_measure(GAUSS, Ball(c, r))) <= 4 * se
    assert ok >= 0.99 * runs


def test_sample_hit_frequency_matches_ball_measure():
    ball = Ball([0.3, -0.4], 0.6)
    n = 100_000
    for dens in (SQUARE, GAUSS):
        pts = dens.sample(stream(8, "dens"), n)
        freq = np.mean(np.sum((pts - ball.center) ** 2, axis=1) < ball.radius**2)
        p = ball_measure(dens, ball)
        assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_gaussian_polygon_measure_against_quadrature():
    tri = np.array([[0.0, 0.0], [1.2, 0.1], [0.3, 0.9]])
    f = lambda y, x: math.exp(-(x * x + y * y) / 2) / (2 * math.pi)
    # split the triangle at x = 0.3 into two vertical-slab regions
    def line(p, q):
        return lambda x: p[1] + (q[1] - p[1]) * (x - p[0]) / (q[0] - p[0])
    a, b, c = tri
    left, _ = integrate.dblquad(f, 0.0, 0.3, line(a, b), line(a, c))
    right, _ = integrate.dblquad(f, 0.3, 1.2, line(a, b), line(c, b))
    assert GAUSS.polygon_measure(tri) == pytest.approx(left + right, rel=1e-8)


def test_uniform_polygon_measure_partially_outside():
    sq = np.array([[0.5, 0.5], [1.5, 0.5], [1.5, 1.5], [0.5, 1.5]])
    assert SQUARE.polygon_measure(sq) == pytest.approx(0.25 * 0.25)


def test_grid_density_normalized_and_exact():
    g = GridDensity([0.0, 0.0], 0.5, np.array([[1.0, 3.0], [2.0, 2.0]]))
    assert g.values.sum() * 0.25 == pytest.approx(1.0)
    # cell [0, 0.5) x [0.5, 1) holds value 3 / 8 * 4 = 1.5
    assert density_eval(g, [0.1, 0.7]) == pytest.approx(1.5)
    whole = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert g.polygon_measure(whole) == pytest.approx(1.0)
    assert ball_measure(g, Ball([0.5, 0.5], 10.0)) == pytest.approx(1.0)
    # quarter disk of radius 0.5 in the cell of value 3/8*4 at the corner (0, 1)
    assert ball_measure(g, Ball([0.0, 1.0], 0.5)) == pytest.approx(1.5 * math.pi * 0.25 / 4)


def test_grid_density_mc_agreement():
    g = GridDensity([-1.0, -1.0], 0.25, stream(9, "grid").uniform(0, 1, (8, 8)))
    ball = Ball([0.1, 0.2], 0.45)
    est, se = predicate_measure_mc(g, lambda x: np.sum((x - ball.center) ** 2, axis=1) < ball.radius**2,
                                   200_000, stream(9, "gridmc"), vectorized=True)
    assert abs(est - ball_measure(g, ball)) <= 4 * se


def test_grid_csv_roundtrip(tmp_path):
    g = GridDensity([-1.0, 0.0], 0.5, np.arange(1, 7, dtype=float).reshape(2, 3))
    path = tmp_path / "grid.csv"
    write_grid_csv(g, path)
    back = read_grid_csv(path)
    # loading renormalizes, which may move the last bit
    assert np.allclose(back.values, g.values, rtol=1e-14, atol=0)
    assert np.array_equal(back.origin, g.origin)


def test_grid_csv_without_shape(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text("2,1.0,0,0\n1,1\n1,1\n")
    g = read_grid_csv(path)
    assert g.values.shape == (2, 2)
    bad = tmp_path / "bad.csv"
    bad.write_text("2,1.0,0,0\n1,1\n1\n")
    with pytest.raises(ValueError):
        read_grid_csv(bad)


def test_density_from_spec():
    assert isinstance(density_from_spec({"kind": "uniform_box"}, 2), UniformBox)
    g = density_from_spec({"kind": "gaussian", "sigma": 2.0}, 1)
    assert density_eval(g, [0.0]) == pytest.approx(1 / (2 * math.sqrt(2 * math.pi)))
    mix = density_from_spec({"kind": "mixture", "weights": [0.3, 0.7],
                             "components": [{"kind": "uniform_box"}, {"kind": "gaussian"}]}, 2)
    assert density_eval(mix, [0, 0]) == pytest.approx(0.3 * 0.25 + 0.7 / (2 * math.pi))
    with pytest.raises(ValueError):
        density_from_spec({"kind": "uniform_box", "colour": 1})
    with pytest.raises(ValueError):
        density_from_spec({"kind": "triangle"})
    with pytest.raises(ValueError):
        density_from_spec({"kind": "gaussian", "mean": [0, 0, 0]}, 2)
