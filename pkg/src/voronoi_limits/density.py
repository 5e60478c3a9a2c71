"""Probability densities ``f`` and their measures ``mu_f``.

Four variants share one interface: :class:`UniformBox`,
:class:`IsotropicGaussian`, :class:`Mixture` and :class:`GridDensity`.
Each can evaluate ``f`` pointwise, sample from ``mu_f``, and measure balls,
intervals (``d = 1``) and convex polygons (``d = 2``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special, stats

from .geometry import (
    Ball,
    Box,
    clip_polygon_to_box,
    disk_polygon_area,
    polygon_area,
)

_BALL_MC_SAMPLES = 1 << 20
_BALL_MC_SEED = 0x5EED


def _as_points(x, d: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    pts = arr.reshape(-1, arr.shape[-1]) if arr.ndim else arr.reshape(1, 1)
    if pts.shape[1] != d:
        raise ValueError(f"dimension mismatch: density has d={d}, got points of d={pts.shape[1]}")
    return pts


def _triangle_rule(order: int = 8):
    """Collapsed Gauss-Legendre rule on the reference triangle (0,0),(1,0),(0,1)."""
    g, w = np.polynomial.legendre.leggauss(order)
    g = 0.5 * (g + 1.0)
    w = 0.5 * w
    u, v = np.meshgrid(g, g, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    # Duffy map (u, v) -> (u, v(1-u)); Jacobian 1-u
    s = u.ravel()
    t = (v * (1.0 - u)).ravel()
    weights = (wu * wv * (1.0 - u)).ravel()
    return s, t, weights


_TRI_S, _TRI_T, _TRI_W = _triangle_rule()


class Density:
    """Base class. Subclasses set ``dim`` and implement the hooks."""

    dim: int

    def pdf(self, x) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def ball_measure(self, ball: Ball) -> float:
        raise NotImplementedError

    def interval_measure(self, lo: float, hi: float) -> float:
        raise NotImplementedError

    def polygon_measure(self, vertices) -> float:
        """Measure of a convex CCW polygon by fan-triangle quadrature."""
        return self._polygon_quadrature(vertices)

    polygon_method = "quadrature"

    def _polygon_quadrature(self, vertices) -> float:
        v = np.asarray(vertices, dtype=float)
        if len(v) < 3:
            return 0.0
        a = v[0]
        e1 = v[1:-1] - a
        e2 = v[2:] - a
        jac = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        pts = (a[None, None, :] + _TRI_S[None, :, None] * e1[:, None, :]
               + _TRI_T[None, :, None] * e2[:, None, :])
        vals = self.pdf(pts.reshape(-1, 2)).reshape(len(e1), -1)
        return float(np.sum(jac * (vals @ _TRI_W)))

    def _check_ball(self, ball: Ball):
        if ball.dim != self.dim:
            raise ValueError(f"dimension mismatch: density has d={self.dim}, ball has d={ball.dim}")

    def _ball_mc(self, ball: Ball) -> float:
        # deterministic fallback: fixed-seed sampling from mu_f
        rng = np.random.Generator(np.random.Philox(_BALL_MC_SEED))
        hits = 0
        done = 0
        while done < _BALL_MC_SAMPLES:
            m = min(1 << 16, _BALL_MC_SAMPLES - done)
            x = self.sample(rng, m)
            hits += int(np.count_nonzero(np.sum((x - ball.center) ** 2, axis=1) < ball.radius**2))
            done += m
        return hits / _BALL_MC_SAMPLES


@dataclass(frozen=True, eq=False)
class UniformBox(Density):
    lo: np.ndarray
    hi: np.ndarray
    box: Box = field(init=False, repr=False)
    value: float = field(init=False, repr=False)

    def __post_init__(self):
        box = Box(self.lo, self.hi)
        object.__setattr__(self, "lo", box.lo)
        object.__setattr__(self, "hi", box.hi)
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "value", 1.0 / box.volume)

    @property
    def dim(self) -> int:
        return self.box.dim

    polygon_method = "exact"

    def pdf(self, x):
        pts = _as_points(x, self.dim)
        inside = np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        return np.where(inside, self.value, 0.0)

    def sample(self, rng, size):
        return rng.uniform(self.lo, self.hi, size=(int(size), self.dim))

    def interval_measure(self, lo, hi):
        if self.dim != 1:
            raise ValueError("interval_measure needs d=1")
        a, b = max(lo, self.lo[0]), min(hi, self.hi[0])
        return self.value * max(b - a, 0.0)

    def polygon_measure(self, vertices):
        if self.dim != 2:
            raise ValueError("polygon_measure needs d=2")
        v = np.asarray(vertices, dtype=float)
        if np.all(v >= self.lo) and np.all(v <= self.hi):
            return self.value * polygon_area(v)
        return self.value * polygon_area(clip_polygon_to_box(v, self.box))

    def ball_measure(self, ball):
        self._check_ball(ball)
        if ball.radius == 0:
            return 0.0
        if self.dim == 1:
            c, r = ball.center[0], ball.radius
            return self.interval_measure(c - r, c + r)
        if self.dim == 2:
            area = disk_polygon_area(ball.center, ball.radius, self.box.corners_2d())
            return min(self.value * area, 1.0)
        return self._ball_mc(ball)


@dataclass(frozen=True, eq=False)
class IsotropicGaussian(Density):
    mean: np.ndarray
    sigma: float

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.mean, dtype=float))
        if m.ndim != 1:
            raise ValueError("mean must be a 1-D point")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def pdf(self, x):
        pts = _as_points(x, self.dim)
        q = np.sum((pts - self.mean) ** 2, axis=1) / self.sigma**2
        return np.exp(-0.5 * q) / (2 * math.pi * self.sigma**2) ** (self.dim / 2)

    def sample(self, rng, size):
        return self.mean + self.sigma * rng.standard_normal((int(size), self.dim))

    def interval_measure(self, lo, hi):
        if self.dim != 1:
            raise ValueError("interval_measure needs d=1")
        m, s = self.mean[0], self.sigma
        a, b = (lo - m) / s, (hi - m) / s
        # difference in the lighter tail keeps relative precision
        if a > 0:
            return float(special.ndtr(-a) - special.ndtr(-b))
        return float(special.ndtr(b) - special.ndtr(a))

    def ball_measure(self, ball):
        self._check_ball(ball)
        if ball.radius == 0:
            return 0.0
        x = (ball.radius / self.sigma) ** 2
        nc = float(np.sum((ball.center - self.mean) ** 2)) / self.sigma**2
        if nc == 0.0:
            return float(stats.chi2.cdf(x, self.dim))
        return float(stats.ncx2.cdf(x, self.dim, nc))


@dataclass(frozen=True, eq=False)
class Mixture(Density):
    weights: tuple
    components: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        comps = tuple(self.components)
        if len(w) != len(comps) or len(comps) == 0:
            raise ValueError("need one weight per component")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("mixture weights must be non-negative and sum to 1")
        if len({c.dim for c in comps}) != 1:
            raise ValueError("mixture components must share a dimension")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def polygon_method(self):
        methods = {c.polygon_method for c in self.components}
        return "exact" if methods == {"exact"} else "quadrature"

    def pdf(self, x):
        return sum(w * c.pdf(x) for w, c in zip(self.weights, self.components))

    def sample(self, rng, size):
        size = int(size)
        which = rng.choice(len(self.components), size=size, p=self.weights)
        out = np.empty((size, self.dim))
        for i, comp in enumerate(self.components):
            idx = np.flatnonzero(which == i)
            if len(idx):
                out[idx] = comp.sample(rng, len(idx))
        return out

    def interval_measure(self, lo, hi):
        return sum(w * c.interval_measure(lo, hi) for w, c in zip(self.weights, self.components))

    def polygon_measure(self, vertices):
        return sum(w * c.polygon_measure(vertices) for w, c in zip(self.weights, self.components))

    def ball_measure(self, ball):
        self._check_ball(ball)
        return sum(w * c.ball_measure(ball) for w, c in zip(self.weights, self.components))


@dataclass(frozen=True, eq=False)
class GridDensity(Density):
    """Piecewise-constant density on a regular grid of cubes.

    Cell ``(i_1, ..., i_d)`` covers ``origin + cell_size * [i, i + 1)`` per
    axis. ``values`` are rescaled at construction to integrate to one.
    """

    origin: np.ndarray
    cell_size: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        if vals.ndim != origin.shape[0]:
            raise ValueError("values must have one axis per dimension")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite and non-negative")
        mass = vals.sum() * self.cell_size ** vals.ndim
        if mass <= 0:
            raise ValueError("grid values must not all be zero")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "cell_size", float(self.cell_size))
        object.__setattr__(self, "values", vals / mass)

    @property
    def dim(self) -> int:
        return self.origin.shape[0]

    @property
    def polygon_method(self):
        return "exact" if self.dim <= 2 else "mc"

    def _cell_index(self, pts):
        return np.floor((pts - self.origin) / self.cell_size).astype(np.int64)

    def pdf(self, x):
        pts = _as_points(x, self.dim)
        idx = self._cell_index(pts)
        shape = np.array(self.values.shape)
        ok = np.all((idx >= 0) & (idx < shape), axis=1)
        out = np.zeros(len(pts))
        if np.any(ok):
            out[ok] = self.values[tuple(idx[ok].T)]
        return out

    def sample(self, rng, size):
        size = int(size)
        p = self.values.ravel() * self.cell_size**self.dim
        flat = rng.choice(p.size, size=size, p=p / p.sum())
        idx = np.stack(np.unravel_index(flat, self.values.shape), axis=1)
        return self.origin + self.cell_size * (idx + rng.random((size, self.dim)))

    def _cells_overlapping(self, lo, hi):
        """Index ranges of grid cells meeting the box ``[lo, hi]``."""
        a = np.maximum(np.floor((lo - self.origin) / self.cell_size).astype(int), 0)
        b = np.minimum(np.floor((hi - self.origin) / self.cell_size).astype(int),
                       np.array(self.values.shape) - 1)
        return a, b

    def interval_measure(self, lo, hi):
        if self.dim != 1:
            raise ValueError("interval_measure needs d=1")
        if hi <= lo:
            return 0.0
        a, b = self._cells_overlapping(np.array([lo]), np.array([hi]))
        total = 0.0
        for i in range(a[0], b[0] + 1):
            c0 = self.origin[0] + i * self.cell_size
            overlap = min(hi, c0 + self.cell_size) - max(lo, c0)
            if overlap > 0:
                total += self.values[i] * overlap
        return total

    def _cell_box(self, i, j):
        lo = self.origin + self.cell_size * np.array([i, j], dtype=float)
        return Box(lo, lo + self.cell_size)

    def polygon_measure(self, vertices):
        if self.dim != 2:
            raise ValueError("polygon_measure needs d=2")
        v = np.asarray(vertices, dtype=float)
        if len(v) < 3:
            return 0.0
        a, b = self._cells_overlapping(v.min(axis=0), v.max(axis=0))
        total = 0.0
        for i in range(a[0], b[0] + 1):
            for j in range(a[1], b[1] + 1):
                val = self.values[i, j]
                if val > 0:
                    total += val * polygon_area(clip_polygon_to_box(v, self._cell_box(i, j)))
        return total

    def ball_measure(self, ball):
        self._check_ball(ball)
        if ball.radius == 0:
            return 0.0
        c, r = ball.center, ball.radius
        if self.dim == 1:
            return self.interval_measure(c[0] - r, c[0] + r)
        if self.dim == 2:
            a, b = self._cells_overlapping(c - r, c + r)
            total = 0.0
            for i in range(a[0], b[0] + 1):
                for j in range(a[1], b[1] + 1):
                    val = self.values[i, j]
                    if val > 0:
                        total += val * disk_polygon_area(c, r, self._cell_box(i, j).corners_2d())
            return min(total, 1.0)
        return self._ball_mc(ball)


# ---------------------------------------------------------------------------
# functional surface


def density_eval(density: Density, x) -> float:
    """Pointwise value ``f(x)`` at a single point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (density.dim,):
        raise ValueError(f"dimension mismatch: density has d={density.dim}, point has shape {x.shape}")
    return float(density.pdf(x[None, :])[0])


def density_sample(density: Density, rng: np.random.Generator) -> np.ndarray:
    return density.sample(rng, 1)[0]


def ball_measure(density: Density, ball: Ball) -> float:
    return density.ball_measure(ball)


def predicate_measure_mc(density: Density, member, n_samples: int, rng: np.random.Generator,
                         vectorized: bool = False, chunk: int = 1 << 16):
    """Estimate ``mu_f({member})`` as the hit rate of fresh draws from ``mu_f``.

    ``member`` takes one point, or an ``(m, d)`` batch when ``vectorized``.
    Returns ``(estimate, stderr)``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    hits = 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        x = density.sample(rng, m)
        if vectorized:
            hits += int(np.count_nonzero(member(x)))
        else:
            hits += sum(1 for p in x if member(p))
        done += m
    p = hits / n_samples
    return p, math.sqrt(p * (1 - p) / n_samples)


# ---------------------------------------------------------------------------
# construction from config / files


def read_grid_csv(path) -> GridDensity:
    """Load a grid density.

    Header: ``d, cell_size, origin_1..origin_d[, shape_1..shape_d]``.
    Body: values in row-major order, any number per line. Without an
    explicit shape, ``d = 1`` takes all values and ``d = 2`` takes one grid
    row per line.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [[c.strip() for c in row if c.strip()] for row in csv.reader(fh)]
    rows = [r for r in rows if r]
    if not rows:
        raise ValueError(f"{path}: empty grid file")
    try:
        header = [float(c) for c in rows[0]]
        body = [[float(c) for c in r] for r in rows[1:]]
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    d = int(header[0])
    if d < 1 or header[0] != d or len(header) not in (2 + d, 2 + 2 * d):
        raise ValueError(f"{path}:1: header must be d, cell_size, {d} origin coords[, {d} shape entries]")
    cell_size = header[1]
    origin = header[2:2 + d]
    flat = [v for r in body for v in r]
    if len(header) == 2 + 2 * d:
        shape = tuple(int(s) for s in header[2 + d:])
    elif d == 1:
        shape = (len(flat),)
    elif d == 2:
        widths = {len(r) for r in body}
        if len(widths) != 1:
            raise ValueError(f"{path}: ragged grid rows")
        shape = (len(body), widths.pop())
    else:
        raise ValueError(f"{path}:1: d={d} grids need an explicit shape in the header")
    if int(np.prod(shape)) != len(flat):
        raise ValueError(f"{path}: expected {int(np.prod(shape))} values, found {len(flat)}")
    return GridDensity(origin, cell_size, np.array(flat).reshape(shape))


def write_grid_csv(density: GridDensity, path) -> None:
    header = [density.dim, density.cell_size, *density.origin.tolist(), *density.values.shape]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in density.values.reshape(density.values.shape[0], -1):
            w.writerow([repr(float(v)) for v in row])


def density_from_spec(spec: dict, d: int | None = None) -> Density:
    """Build a density from a JSON-style dict, e.g. ``{"kind": "gaussian", "sigma": 1}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "uniform_box":
        lo = spec.pop("lo", None)
        hi = spec.pop("hi", None)
        if lo is None or hi is None:
            dim = d or 2
            lo, hi = [-1.0] * dim, [1.0] * dim
        out = UniformBox(lo, hi)
    elif kind == "gaussian":
        mean = spec.pop("mean", None)
        if mean is None:
            mean = [0.0] * (d or 2)
        out = IsotropicGaussian(mean, spec.pop("sigma", 1.0))
    elif kind == "mixture":
        comps = [density_from_spec(c, d) for c in spec.pop("components")]
        out = Mixture(spec.pop("weights"), comps)
    elif kind == "grid":
        if "csv" in spec:
            out = read_grid_csv(spec.pop("csv"))
        else:
            out = GridDensity(spec.pop("origin"), spec.pop("cell_size"), np.asarray(spec.pop("values")))
    else:
        raise ValueError(f"unknown density kind {kind!r}")
    if spec:
        raise ValueError(f"unknown density keys for {kind}: {sorted(spec)}")
    if d is not None and out.dim != d:
        raise ValueError(f"density has d={out.dim} but the run uses d={d}")
    return out

