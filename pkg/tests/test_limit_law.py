from __future__ import annotations

import csv
import math

import numpy as np
import pytest
from scipy import integrate

from voronoi_limits.limit_law import (
    EXACT_1D,
    EXACT_2BALL,
    branch_balls,
    dk_values,
    limiting_moment,
    mc_tag,
    moment_quadrature,
    resolve_method,
    sample_dk,
    sample_dk_batch,
    sample_limit_law,
    write_dk_csv,
)
from voronoi_limits.rng import stream


def union_len(intervals):
    ivs = sorted(intervals)
    total, cur_lo, cur_hi = 0.0, *ivs[0]
    for lo, hi in ivs[1:]:
        if lo > cur_hi:
            total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    return total + cur_hi - cur_lo


def d1_oracle(u, w):
    """D_1 in d=1 from explicit interval endpoints."""
    if w == 0:
        ivs = [(u - abs(1 - u), u + abs(1 - u)), (-1.0, 1.0)]
    else:
        ivs = [(1 - abs(1 - u), 1 + abs(1 - u)), (-abs(u), abs(u))]
    return union_len(ivs) / 2


def lens(r1, r2, c):
    """Overlap area of two disks from the chord construction."""
    if c >= r1 + r2:
        return 0.0
    if c <= abs(r1 - r2):
        return math.pi * min(r1, r2) ** 2
    a = (c * c + r1 * r1 - r2 * r2) / (2 * c)
    h = math.sqrt(max(r1 * r1 - a * a, 0.0))
    b = c - a
    return r1 * r1 * math.atan2(h, a) - a * h + r2 * r2 * math.atan2(h, b) - b * h


def d2_oracle(ux, uy, w):
    u = np.array([ux, uy])
    e = np.array([1.0, 0.0])
    if w == 0:
        r1, r2, c = np.linalg.norm(e - u), 1.0, np.linalg.norm(u)
    else:
        r1, r2, c = np.linalg.norm(e - u), np.linalg.norm(u), 1.0
    return (math.pi * (r1 * r1 + r2 * r2) - lens(r1, r2, c)) / math.pi


def test_d1_oracle_against_package():
    for u in np.linspace(-0.99, 0.99, 41):
        for w in (0, 1):
            got = dk_values(np.array([w]), np.array([[[u]]]), EXACT_1D)[0]
            assert got == pytest.approx(d1_oracle(u, w), abs=1e-14)


def test_d2_oracle_against_package():
    rng = stream(1, "d2o")
    u = rng.uniform(-0.7, 0.7, (200, 2))
    for w in (0, 1):
        got = dk_values(np.full(200, w), u[:, None, :], EXACT_2BALL)
        want = [d2_oracle(a, b, w) for a, b in u]
        assert np.allclose(got, want, rtol=1e-12)


def test_quadrature_moment_d1():
    oracle = sum(integrate.quad(lambda u: 0.5 * 0.5 * (2 / d1_oracle(u, 0) ** 2 + 2 / d1_oracle(u, 1) ** 2),
                                a, b, epsabs=1e-12)[0] for a, b in ((-1, 0), (0, 1)))
    assert oracle == pytest.approx(1.5, abs=1e-10)
    assert moment_quadrature(1) == pytest.approx(oracle, abs=1e-10)


def test_quadrature_moment_d2():
    g = lambda t, r: r / math.pi * sum(0.5 * 2 / d2_oracle(r * math.cos(t), r * math.sin(t), w) ** 2
                                       for w in (0, 1))
    oracle = 2 * integrate.dblquad(g, 0, 1, 0, math.pi, epsabs=1e-8)[0]
    assert moment_quadrature(2, 1e-8, 1e-8) == pytest.approx(oracle, abs=1e-6)
    # second moment of the typical Poisson-Voronoi cell area in the plane
    assert oracle == pytest.approx(1.2802, abs=2e-4)


def test_limiting_moment_d1_matches_quadrature():
    est = limiting_moment(1, 1, 1_000_000, stream(2, "lm"))
    assert est.volume_method == EXACT_1D
    assert abs(est.estimate - moment_quadrature(1)) <= 3 * est.stderr


def test_limiting_moment_d2_exact_vs_mc():
    ex = limiting_moment(1, 2, 200_000, stream(3, "lm"))
    mc = limiting_moment(1, 2, 2000, stream(3, "lm-mc"), "mc", n_inner=100_000)
    assert ex.volume_method == EXACT_2BALL and mc.volume_method == mc_tag(100_000)
    assert abs(ex.estimate - mc.estimate) <= 4 * math.hypot(ex.stderr, mc.stderr)


def test_forced_branches():
    for d in (1, 2, 3):
        s = sample_dk(1, d, stream(4, "forced"), w=1, u=np.zeros(d), n_inner=10_000)
        assert s.value == pytest.approx(1.0, abs=1e-12 if d <= 2 else 0.05)
    rng = stream(5, "forced")
    for _ in range(50):
        s = sample_dk(2, 2, rng, w=0, n_inner=5_000)
        assert s.value >= 1.0


@pytest.mark.parametrize("k,d", [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2), (3, 2)])
def test_bounds_and_branch_containment(k, d):
    w, vals, method = sample_dk_batch(k, d, 20_000, stream(6, "bounds", k, d), n_inner=500)
    assert np.all(vals >= 2.0**-d) and np.all(vals <= 3.0**d)
    assert np.all(vals[w == 0] >= 1.0)
    assert np.all(vals[w == 1] >= 2.0**-d)


def test_w_frequency_k3():
    n = 100_000
    w, _, _ = sample_dk_batch(3, 1, n, stream(7, "wfreq"))
    assert abs(w.mean() - 0.75) <= 3 * math.sqrt(0.75 * 0.25 / n)


def test_mc_volume_matches_interval_volume_d1():
    rng = stream(8, "mc1")
    w = (rng.random(200) < 0.5).astype(int)
    u = rng.uniform(-1, 1, (200, 2, 1))
    exact = dk_values(w, u, EXACT_1D)
    n_inner = 20_000
    mc = dk_values(w, u, mc_tag(n_inner), rng)
    # hit-or-miss stderr is bounded by box_length * 0.5 / sqrt(n_inner) / 2 in D units
    centers, radii = branch_balls(w, u)
    box = (np.max(centers[..., 0] + radii, axis=1) - np.min(centers[..., 0] - radii, axis=1)) / 2
    assert np.all(np.abs(mc - exact) <= 4 * box * 0.5 / math.sqrt(n_inner))


@pytest.mark.parametrize("k,d", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_moment_bound(k, d):
    n_inner = 400 if (k, d) == (2, 2) else 100_000
    est = limiting_moment(k, d, 20_000, stream(9, "mb", k, d), n_inner=n_inner)
    assert est.estimate <= 2.0 ** (d * (k + 1)) * math.factorial(k + 1) + 3 * est.stderr
    assert est.estimate > 0


def test_second_moment_d1_closed_form():
    # in d=1 the containing cell is a size-biased Gamma(2) spacing: E[3!/D_2^3] = 3
    est = limiting_moment(2, 1, 400_000, stream(10, "k2"))
    assert abs(est.estimate - 3.0) <= 4 * est.stderr


def test_sample_limit_law_sorted_and_reproducible():
    a = sample_limit_law(2, stream(11, "law"), 5000)
    b = sample_limit_law(2, stream(11, "law"), 5000)
    assert np.all(np.diff(a.samples) >= 0)
    assert a.samples.min() >= 0.25
    assert np.array_equal(a.samples, b.samples)


def test_resolve_method():
    assert resolve_method(1, 1) == EXACT_1D
    assert resolve_method(1, 2) == EXACT_2BALL
    assert resolve_method(2, 2, n_inner=123) == "mc(123)"
    with pytest.raises(ValueError):
        resolve_method(2, 2, EXACT_2BALL)
    with pytest.raises(ValueError):
        resolve_method(1, 2, "simpson")
    with pytest.raises(ValueError):
        limiting_moment(1, 1, 10, stream(1, "x"))


def test_write_dk_csv(tmp_path):
    w, vals, method = sample_dk_batch(1, 2, 10, stream(12, "csv"))
    path = tmp_path / "dk.csv"
    write_dk_csv(path, 1, 2, w, vals, method)
    rows = list(csv.DictReader(path.open()))
    assert list(rows[0]) == ["k", "d", "w", "value", "method"]
    assert [float(r["value"]) for r in rows] == vals.tolist()


def test_exact_two_disk_union_never_below_larger_disk():
    # near-nested disks: the union formula cancels almost completely
    u = np.array([[[0.999999, 0.0]], [[1e-7, 0.0]], [[-0.9999999, 1e-4]]])
    for w in (0, 1):
        vals = dk_values(np.full(3, w), u, EXACT_2BALL)
        centers, radii = branch_balls(np.full(3, w), u)
        assert np.all(vals * math.pi >= math.pi * radii.max(axis=1) ** 2)
    w, vals, _ = sample_dk_batch(1, 2, 100_000, stream(2026, "dk", 1, 2))
    assert np.all(vals[w == 0] >= 1.0)
