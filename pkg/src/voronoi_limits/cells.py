"""Single-cell Voronoi queries.

Three notions of "the cell at x" are supported:

* fixed nucleus: the cell of ``x`` in the diagram of ``{x, X_1, ..., X_n}``;
* containing: the cell of the diagram of ``{X_1, ..., X_n}`` that contains
  ``x``, whose nucleus is the sample point nearest to ``x``;
* Poisson typical: the cell of ``x`` when the other generators form a
  homogeneous Poisson process of a given intensity.

Cells are exact convex polygons in ``d = 2`` and exact intervals in
``d = 1``. For ``d >= 3`` measures are Monte Carlo estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .density import Density, density_eval, predicate_measure_mc
from .geometry import (
    Ball,
    Box,
    ConvexPolygon,
    halfplane_intersection_2d,
    polygon_metrics,
    unit_ball_volume,
)
from .point_process import PointCloud, extend_poisson, sample_poisson


class CellMode(str, Enum):
    FIXED_NUCLEUS = "fixed_nucleus"
    CONTAINING = "containing"
    POISSON_TYPICAL = "poisson_typical"


@dataclass(frozen=True, eq=False)
class CellQuery:
    mode: CellMode
    probe: np.ndarray
    density: Density
    cloud: PointCloud | None = None
    intensity: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", CellMode(self.mode))
        object.__setattr__(self, "probe", np.atleast_1d(np.asarray(self.probe, dtype=float)))


@dataclass(frozen=True)
class CellOptions:
    mu_method: str = "exact"
    mc_samples: int = 20_000
    max_doublings: int = 8
    window_count: float = 64.0
    max_window_growth: int = 8

    def __post_init__(self):
        if self.mu_method not in ("exact", "mc"):
            raise ValueError(f"mu_method must be 'exact' or 'mc', got {self.mu_method!r}")


@dataclass
class CellReport:
    nucleus: np.ndarray
    nucleus_index: int
    mu_measure: float
    mu_stderr: float
    mu_method: str
    lebesgue_measure: float
    lebesgue_stderr: float
    lebesgue_method: str
    diameter: float
    diameter_method: str
    diameter_bound: float
    edge_count: int | None
    truncated: bool
    polygon: ConvexPolygon | None = None
    interval: tuple[float, float] | None = None

    @property
    def bounded(self) -> bool:
        return not self.truncated and math.isfinite(self.diameter_bound)


# ---------------------------------------------------------------------------
# elementary queries


def nearest_two(x, cloud: PointCloud):
    """Positions and distances of the two cloud points nearest to ``x``.

    Ties go to the lower position.
    """
    if len(cloud) < 2:
        raise ValueError("nearest_two needs at least two points")
    dist = np.linalg.norm(cloud.points - np.asarray(x, dtype=float), axis=1)
    i1, i2 = np.argsort(dist, kind="stable")[:2]
    return int(i1), float(dist[i1]), int(i2), float(dist[i2])


def cell_membership(q, nucleus, cloud: PointCloud, exclude: int | None = None) -> bool:
    """Whether ``q`` is at least as close to ``nucleus`` as to every other generator."""
    q = np.asarray(q, dtype=float)
    pts = cloud.points
    if exclude is not None:
        pts = np.delete(pts, exclude, axis=0)
    if len(pts) == 0:
        return True
    own = float(np.sum((q - np.asarray(nucleus, dtype=float)) ** 2))
    return bool(own <= float(np.min(np.sum((pts - q) ** 2, axis=1))))


def _member_batch(q: np.ndarray, nucleus: np.ndarray, gens: np.ndarray, chunk: int = 4096) -> np.ndarray:
    own = np.sum((q - nucleus) ** 2, axis=1)
    if len(gens) == 0:
        return np.ones(len(q), dtype=bool)
    out = np.empty(len(q), dtype=bool)
    for s in range(0, len(q), chunk):
        qq = q[s:s + chunk]
        d2 = (np.sum(qq**2, axis=1)[:, None] - 2.0 * qq @ gens.T + np.sum(gens**2, axis=1)[None, :])
        # exact recheck near the boundary; the expanded form loses a few ulps
        near = np.min(d2, axis=1)
        close = np.abs(near - own[s:s + chunk]) <= 1e-9 * (near + own[s:s + chunk] + 1e-300)
        res = own[s:s + chunk] <= near
        for i in np.flatnonzero(close):
            res[i] = own[s + i] <= float(np.min(np.sum((gens - qq[i]) ** 2, axis=1)))
        out[s:s + chunk] = res
    return out


def locality_radius(t: float, mode: str) -> float:
    """Largest cell diameter for which generators outside ``B_{x,t}`` are irrelevant."""
    if mode == "A-cell":
        return t / 2
    if mode == "L-cell":
        return t / 4
    raise ValueError(f"mode must be 'A-cell' or 'L-cell', got {mode!r}")


def prune_outside(x, t: float, cloud: PointCloud, mode: str = "L-cell") -> PointCloud:
    """Sub-cloud inside the open ball ``B_{x,t}``, ids preserved.

    If the resulting cell has diameter at most ``locality_radius(t, mode)``
    it coincides with the cell of the full cloud.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    locality_radius(t, mode)
    if len(cloud) == 0:
        return cloud
    mask = np.sum((cloud.points - np.asarray(x, dtype=float)) ** 2, axis=1) < t * t
    return cloud.subset(mask)


# ---------------------------------------------------------------------------
# cell evaluation


def _initial_half_width(x: np.ndarray, cloud: PointCloud) -> float:
    dist = np.sort(np.linalg.norm(cloud.points - x, axis=1))
    positive = dist[dist > 0]
    if len(positive) == 0:
        return 1.0
    d2 = dist[1] if len(dist) >= 2 and dist[1] > 0 else positive[0]
    return 4.0 * float(d2)


def _whole_space(nucleus, nucleus_index, d) -> CellReport:
    return CellReport(
        nucleus=nucleus, nucleus_index=nucleus_index,
        mu_measure=1.0, mu_stderr=0.0, mu_method="exact",
        lebesgue_measure=math.inf, lebesgue_stderr=0.0, lebesgue_method="exact",
        diameter=math.inf, diameter_method="exact", diameter_bound=math.inf,
        edge_count=0 if d == 2 else None, truncated=False,
    )


def _mu_mc(density, nucleus, gens, radius, opts, rng):
    if rng is None:
        raise ValueError("Monte Carlo measures need an rng")
    if math.isfinite(radius):
        keep = np.sum((gens - nucleus) ** 2, axis=1) <= (2.0 * radius) ** 2
        gens = gens[keep]
        r2 = radius * radius

        def member(q):
            inside = np.sum((q - nucleus) ** 2, axis=1) <= r2
            res = np.zeros(len(q), dtype=bool)
            if np.any(inside):
                res[inside] = _member_batch(q[inside], nucleus, gens)
            return res
    else:
        def member(q):
            return _member_batch(q, nucleus, gens)
    return predicate_measure_mc(density, member, opts.mc_samples, rng, vectorized=True)


def _evaluate_1d(nucleus, nucleus_index, gens, density, opts, rng):
    g = gens.points[:, 0]
    c = float(nucleus[0])
    left, right = g[g < c], g[g > c]
    lo = 0.5 * (c + float(left.max())) if left.size else -math.inf
    hi = 0.5 * (c + float(right.min())) if right.size else math.inf
    length = hi - lo
    if opts.mu_method == "exact":
        mu, mu_se, mu_method = density.interval_measure(lo, hi), 0.0, "exact"
    else:
        radius = max(c - lo, hi - c)
        mu, mu_se = _mu_mc(density, nucleus, gens.points, radius, opts, rng)
        mu_method = "mc"
    return CellReport(
        nucleus=nucleus, nucleus_index=nucleus_index,
        mu_measure=mu, mu_stderr=mu_se, mu_method=mu_method,
        lebesgue_measure=length, lebesgue_stderr=0.0, lebesgue_method="exact",
        diameter=length, diameter_method="exact", diameter_bound=length,
        edge_count=None, truncated=False, interval=(lo, hi),
    )


def _evaluate_2d(nucleus, nucleus_index, gens, density, half_width, opts, rng):
    h = half_width
    for _ in range(opts.max_doublings + 1):
        poly = halfplane_intersection_2d(nucleus, gens.points, Box.around(nucleus, h), gens.ids)
        area, diameter, n_bis, touches = polygon_metrics(poly)
        if not touches:
            break
        h *= 2.0
    if opts.mu_method == "exact":
        mu, mu_se, mu_method = density.polygon_measure(poly.vertices), 0.0, density.polygon_method
    else:
        radius = float(np.max(np.linalg.norm(poly.vertices - nucleus, axis=1))) if not touches else math.inf
        mu, mu_se = _mu_mc(density, nucleus, gens.points, radius, opts, rng)
        mu_method = "mc"
    return CellReport(
        nucleus=nucleus, nucleus_index=nucleus_index,
        mu_measure=mu, mu_stderr=mu_se, mu_method=mu_method,
        lebesgue_measure=area, lebesgue_stderr=0.0, lebesgue_method="exact",
        diameter=diameter, diameter_method="exact", diameter_bound=diameter,
        edge_count=n_bis, truncated=touches, polygon=poly,
    )


def _bounding_box_lp(nucleus, gens, box: Box):
    """Tight axis-aligned bounds of ``cell ∩ box`` from 2d linear programs."""
    a_ub = gens - nucleus
    b_ub = 0.5 * (np.sum(gens**2, axis=1) - float(nucleus @ nucleus))
    bounds = list(zip(box.lo, box.hi))
    d = len(nucleus)
    lo, hi = np.empty(d), np.empty(d)
    for i in range(d):
        for sign in (1.0, -1.0):
            cost = np.zeros(d)
            cost[i] = sign
            res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
            if res.status != 0:
                raise RuntimeError(f"cell bounding LP failed: {res.message}")
            if sign > 0:
                lo[i] = res.x[i]
            else:
                hi[i] = res.x[i]
    return lo, hi


def _evaluate_nd(nucleus, nucleus_index, gens, density, half_width, opts, rng):
    if rng is None:
        raise ValueError("cells in d >= 3 are estimated by Monte Carlo and need an rng")
    d = len(nucleus)
    h = half_width
    touches = True
    for _ in range(opts.max_doublings + 1):
        box = Box.around(nucleus, h)
        reach = 2.0 * h * math.sqrt(d)
        near = gens.points[np.sum((gens.points - nucleus) ** 2, axis=1) <= reach * reach]
        lo, hi = _bounding_box_lp(nucleus, near, box)
        slack = 1e-9 * h
        touches = bool(np.any(lo <= box.lo + slack) or np.any(hi >= box.hi - slack))
        if not touches:
            break
        h *= 2.0
    lo = np.minimum(lo, nucleus)
    hi = np.maximum(hi, nucleus)
    extent = np.maximum(hi - lo, 1e-300)
    bb_vol = float(np.prod(extent))
    q = lo + extent * rng.random((opts.mc_samples, d))
    hits = _member_batch(q, nucleus, near)
    p = float(np.mean(hits))
    leb = bb_vol * p
    leb_se = bb_vol * math.sqrt(p * (1 - p) / opts.mc_samples)
    radius = float(np.linalg.norm(np.maximum(np.abs(hi - nucleus), np.abs(lo - nucleus))))
    mu, mu_se = _mu_mc(density, nucleus, near, radius, opts, rng)
    pts = q[hits]
    diameter = 0.0
    if len(pts) >= 2:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            pass
        diff = pts[:, None, :] - pts[None, :, :]
        diameter = float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))
    return CellReport(
        nucleus=nucleus, nucleus_index=nucleus_index,
        mu_measure=mu, mu_stderr=mu_se, mu_method="mc",
        lebesgue_measure=leb, lebesgue_stderr=leb_se, lebesgue_method="mc",
        diameter=diameter, diameter_method="mc-lower-bound",
        diameter_bound=float(np.linalg.norm(extent)),
        edge_count=None, truncated=touches,
    )


def _evaluate(nucleus, nucleus_index, gens: PointCloud, density, half_width, opts, rng):
    d = len(nucleus)
    if len(gens) == 0:
        return _whole_space(nucleus, nucleus_index, d)
    if d == 1:
        return _evaluate_1d(nucleus, nucleus_index, gens, density, opts, rng)
    if d == 2:
        return _evaluate_2d(nucleus, nucleus_index, gens, density, half_width, opts, rng)
    return _evaluate_nd(nucleus, nucleus_index, gens, density, half_width, opts, rng)


def _without(cloud: PointCloud, point: np.ndarray) -> PointCloud:
    same = np.all(cloud.points == point, axis=1)
    return cloud.subset(~same) if np.any(same) else cloud


def _poisson_typical(query: CellQuery, rng, opts) -> CellReport:
    if rng is None:
        raise ValueError("Poisson typical cells need an rng")
    lam = query.intensity
    if lam is None or not lam > 0:
        raise ValueError("Poisson typical cells need a positive intensity")
    x = query.probe
    d = len(x)
    radius = (opts.window_count / (lam * unit_ball_volume(d))) ** (1.0 / d)
    window = Ball(x, radius)
    cloud = sample_poisson(lam, window, rng)
    report = None
    for _ in range(opts.max_window_growth + 1):
        gens = _without(cloud, x)
        half = _initial_half_width(x, gens) if len(gens) else radius
        report = _evaluate(x, -1, gens, query.density, half, opts, rng)
        # generators beyond the window cannot reach a cell this small
        if not report.truncated and report.diameter_bound <= radius / 2:
            return report
        outer = Ball(x, 2.0 * radius)
        cloud = extend_poisson(cloud, lam, window, outer, rng)
        window, radius = outer, 2.0 * radius
    return replace(report, truncated=True)


def resolve_cell(query: CellQuery, rng: np.random.Generator | None = None,
                 opts: CellOptions | None = None) -> CellReport:
    """Build the requested cell and report its measures, diameter and edge count."""
    opts = opts or CellOptions()
    x = query.probe
    f_x = density_eval(query.density, x)
    if not math.isfinite(f_x):
        raise ValueError(f"density is not finite at the probe {x}")
    if query.mode is CellMode.POISSON_TYPICAL:
        return _poisson_typical(query, rng, opts)

    cloud = query.cloud
    if cloud is None:
        raise ValueError(f"{query.mode.value} cells need a cloud")
    if len(cloud) and cloud.dim != len(x):
        raise ValueError("probe and cloud dimensions differ")
    if query.mode is CellMode.CONTAINING:
        if len(cloud) == 0:
            raise ValueError("the containing cell needs a nonempty cloud")
        dist = np.sum((cloud.points - x) ** 2, axis=1)
        i1 = int(np.argmin(dist))
        nucleus = cloud.points[i1].copy()
        nucleus_index = int(cloud.ids[i1])
    else:
        nucleus = x.copy()
        nucleus_index = -1
    gens = _without(cloud, nucleus)
    half = _initial_half_width(x, cloud) if len(cloud) else 1.0
    return _evaluate(nucleus, nucleus_index, gens, query.density, half, opts, rng)
