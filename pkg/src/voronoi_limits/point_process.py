"""Finite point clouds: i.i.d. samples and homogeneous Poisson processes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import Density
from .geometry import Ball, Box, sample_uniform_ball


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Ordered points with stable identities.

    ``ids[i]`` is the identity of ``points[i]``; sub-clouds keep the ids of
    their parent so cells computed on either refer to the same generators.
    """

    points: np.ndarray
    ids: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be an (n, d) array")
        ids = np.arange(len(pts)) if self.ids is None else np.asarray(self.ids, dtype=np.int64)
        if ids.shape != (len(pts),):
            raise ValueError("need one id per point")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "ids", ids)

    @classmethod
    def empty(cls, d: int) -> "PointCloud":
        return cls(np.empty((0, d)))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    def subset(self, mask) -> "PointCloud":
        return PointCloud(self.points[mask], self.ids[mask])


Window = Ball | Box


def window_volume(window: Window) -> float:
    return window.volume


def window_contains(window: Window, pts: np.ndarray) -> np.ndarray:
    """Membership of each row of ``pts``; balls are open, boxes closed."""
    pts = np.atleast_2d(pts)
    if isinstance(window, Ball):
        return np.sum((pts - window.center) ** 2, axis=1) < window.radius**2
    return np.all((pts >= window.lo) & (pts <= window.hi), axis=1)


def window_nested(inner: Window, outer: Window) -> bool:
    """True when ``inner`` is a subset of ``outer``."""
    if isinstance(inner, Ball):
        if isinstance(outer, Ball):
            return float(np.linalg.norm(inner.center - outer.center)) + inner.radius <= outer.radius
        return bool(np.all(inner.center - inner.radius >= outer.lo)
                    and np.all(inner.center + inner.radius <= outer.hi))
    corners = np.array(np.meshgrid(*zip(inner.lo, inner.hi), indexing="ij")).reshape(inner.dim, -1).T
    if isinstance(outer, Ball):
        return bool(np.all(np.sum((corners - outer.center) ** 2, axis=1) <= outer.radius**2))
    return bool(np.all(inner.lo >= outer.lo) and np.all(inner.hi <= outer.hi))


def _uniform_in_window(window: Window, m: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(window, Ball):
        return window.center + window.radius * sample_uniform_ball(window.dim, rng, m)
    return rng.uniform(window.lo, window.hi, size=(m, window.dim))


def sample_iid(density: Density, n: int, rng: np.random.Generator) -> PointCloud:
    """``n`` independent draws from ``mu_f`` in draw order."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return PointCloud.empty(density.dim)
    return PointCloud(density.sample(rng, n))


def sample_poisson(intensity: float, window: Window, rng: np.random.Generator) -> PointCloud:
    """Homogeneous Poisson process of the given intensity restricted to ``window``."""
    if not intensity > 0:
        raise ValueError(f"intensity must be positive, got {intensity}")
    count = int(rng.poisson(intensity * window_volume(window)))
    return PointCloud(_uniform_in_window(window, count, rng))


def extend_poisson(existing: PointCloud, intensity: float, inner: Window, outer: Window,
                   rng: np.random.Generator) -> PointCloud:
    """Add an independent Poisson sample on ``outer`` minus ``inner``.

    The annulus is sampled by drawing a Poisson process on ``outer`` and
    discarding the points that fall in ``inner``; new points get fresh ids.
    """
    if not window_nested(inner, outer):
        raise ValueError("inner window must be contained in the outer window")
    if not intensity > 0:
        raise ValueError(f"intensity must be positive, got {intensity}")
    fresh = sample_poisson(intensity, outer, rng).points
    fresh = fresh[~window_contains(inner, fresh)]
    start = int(existing.ids.max()) + 1 if len(existing) else 0
    return PointCloud(np.vstack([existing.points, fresh]),
                      np.concatenate([existing.ids, start + np.arange(len(fresh))]))


def count_in_ball(cloud: PointCloud, ball: Ball) -> int:
    """Number of points strictly inside ``ball`` (open ball)."""
    if len(cloud) == 0:
        return 0
    if cloud.dim != ball.dim:
        raise ValueError("dimension mismatch between cloud and ball")
    return int(np.count_nonzero(np.sum((cloud.points - ball.center) ** 2, axis=1) < ball.radius**2))


def chernoff_bound(n: int, p: float, t: float) -> float:
    """``exp(t - np - t log(t / np))``.

    Bounds ``P(Bin(n, p) >= t)`` for ``t >= np`` and ``P(Bin(n, p) <= t)``
    for ``0 < t <= np``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if not t > 0:
        raise ValueError("t must be positive")
    mean = n * p
    return math.exp(t - mean - t * math.log(t / mean))
