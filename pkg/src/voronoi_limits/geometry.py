"""Geometric primitives: balls, boxes, 2D convex polygons, union volumes.

Points are plain 1-D ``numpy`` float arrays; collections of points are
``(n, d)`` arrays. Polygons are stored counter-clockwise with one tag per
edge, where edge ``i`` runs from vertex ``i`` to vertex ``i + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CLIP = -1
"""Edge tag for an edge supported by the clip rectangle."""

DEDUP_RTOL = 1e-9
CONE_HALF_ANGLE = math.pi / 24


@dataclass(frozen=True)
class Ball:
    """Open ball ``B_{center, radius}``; radius 0 is the empty ball."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise ValueError("ball center must be a finite 1-D point")
        if not self.radius >= 0:
            raise ValueError(f"ball radius must be >= 0, got {self.radius}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.dim) * self.radius**self.dim

    def contains(self, p) -> bool:
        return float(np.sum((np.asarray(p, dtype=float) - self.center) ** 2)) < self.radius**2


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi]`` with positive extent in every axis."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box corners must be 1-D and of equal length")
        if not np.all(hi > lo):
            raise ValueError("box must have positive extent in every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def around(cls, center, half_width: float) -> "Box":
        c = np.asarray(center, dtype=float)
        return cls(c - half_width, c + half_width)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))

    def corners_2d(self) -> np.ndarray:
        (x0, y0), (x1, y1) = self.lo, self.hi
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: np.ndarray
    edge_tags: tuple = field(default=())

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        tags = tuple(int(t) for t in self.edge_tags) if self.edge_tags else (CLIP,) * len(v)
        if len(tags) != len(v):
            raise ValueError("need exactly one tag per edge")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "edge_tags", tags)

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True)
class ConeSpec:
    """Cone of half-angle pi/24 around ``axis`` with apex ``apex``, scaled by ``alpha``."""

    apex: np.ndarray
    axis: np.ndarray
    alpha: float

    def __post_init__(self):
        apex = np.atleast_1d(np.asarray(self.apex, dtype=float))
        axis = np.atleast_1d(np.asarray(self.axis, dtype=float))
        if apex.shape != axis.shape:
            raise ValueError("apex and axis must share a dimension")
        if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise ValueError("cone axis must be a unit vector")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        object.__setattr__(self, "apex", apex)
        object.__setattr__(self, "axis", axis)

    @property
    def r1(self) -> float:
        return self.alpha / 64

    @property
    def r2(self) -> float:
        return (1 + 31 * math.cos(math.pi / 6)) / (64 * math.cos(math.pi / 12)) * self.alpha

    @property
    def r3(self) -> float:
        return 30 / 64 * self.alpha

    def contains(self, w) -> bool:
        rel = np.asarray(w, dtype=float) - self.apex
        norm = float(np.linalg.norm(rel))
        if norm == 0.0:
            return False
        return float(self.axis @ rel) / norm >= math.cos(CONE_HALF_ANGLE)


def unit_ball_volume(d: int) -> float:
    """Lebesgue measure of the unit ball in ``R^d``."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def sample_uniform_ball(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform draw(s) from the unit ball: Gaussian direction, radius ``V**(1/d)``."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    m = 1 if size is None else int(size)
    g = rng.standard_normal((m, d))
    norms = np.linalg.norm(g, axis=1)
    # a zero Gaussian vector has probability zero; redraw it rather than divide by 0
    while np.any(norms == 0):
        bad = norms == 0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1)
    radius = rng.random(m) ** (1.0 / d)
    out = g * (radius / norms)[:, None]
    return out[0] if size is None else out


# ---------------------------------------------------------------------------
# union volumes


def lens_area(r1, r2, dist):
    """Area of the intersection of two disks; vectorized over its arguments."""
    r1, r2, dist = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (r1, r2, dist)))
    out = np.zeros(r1.shape)
    small = np.minimum(r1, r2)
    nested = dist <= np.abs(r1 - r2)
    out[nested] = np.pi * small[nested] ** 2
    part = ~nested & (dist < r1 + r2)
    if np.any(part):
        a, b, s = r1[part], r2[part], dist[part]
        ca = np.clip((s * s + a * a - b * b) / (2 * s * a), -1.0, 1.0)
        cb = np.clip((s * s + b * b - a * a) / (2 * s * b), -1.0, 1.0)
        k = (-s + a + b) * (s + a - b) * (s - a + b) * (s + a + b)
        lens = a * a * np.arccos(ca) + b * b * np.arccos(cb) - 0.5 * np.sqrt(np.maximum(k, 0.0))
        # the terms nearly cancel for a tiny disk on the other's rim
        out[part] = np.clip(lens, 0.0, np.pi * small[part] ** 2)
    return out if out.ndim else float(out)


def two_ball_union_volume_exact(b1: Ball, b2: Ball) -> float:
    """Exact measure of ``b1 ∪ b2`` in one or two dimensions."""
    if b1.dim != b2.dim:
        raise ValueError("balls must share a dimension")
    d = b1.dim
    if d not in (1, 2):
        raise ValueError(f"exact two-ball union only for d in {{1, 2}}, got d={d}")
    r1, r2 = b1.radius, b2.radius
    if d == 1:
        return interval_union_length([(b1.center[0] - r1, b1.center[0] + r1),
                                      (b2.center[0] - r2, b2.center[0] + r2)])
    dist = float(np.linalg.norm(b1.center - b2.center))
    union = math.pi * (r1 * r1 + r2 * r2) - float(lens_area(r1, r2, dist))
    return max(union, math.pi * max(r1, r2) ** 2)


def interval_union_length(intervals) -> float:
    """Total length of a union of intervals ``(lo, hi)``."""
    total = 0.0
    cur_lo = cur_hi = None
    for lo, hi in sorted(intervals):
        if hi <= lo:
            continue
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def union_volume_mc(balls, n_samples: int, rng: np.random.Generator, chunk: int = 1 << 18):
    """Hit-or-miss estimate of the measure of a union of balls.

    Samples uniformly in the smallest axis-aligned box enclosing the union.
    Returns ``(estimate, stderr)``; an empty list gives ``(0.0, 0.0)``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    live = [b for b in balls if b.radius > 0]
    if not live:
        return 0.0, 0.0
    d = live[0].dim
    if any(b.dim != d for b in live):
        raise ValueError("all balls must share a dimension")
    centers = np.array([b.center for b in live])
    r2 = np.array([b.radius for b in live]) ** 2
    radii = np.sqrt(r2)[:, None]
    lo = np.min(centers - radii, axis=0)
    hi = np.max(centers + radii, axis=0)
    box_vol = float(np.prod(hi - lo))
    hits = 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        q = rng.uniform(lo, hi, size=(m, d))
        sq = np.sum((q[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        hits += int(np.count_nonzero(np.any(sq < r2, axis=1)))
        done += m
    p = hits / n_samples
    return box_vol * p, box_vol * math.sqrt(p * (1 - p) / n_samples)


# ---------------------------------------------------------------------------
# 2D convex polygons


def polygon_area(vertices) -> float:
    """Shoelace area; positive for counter-clockwise vertex order."""
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _clip(verts, tags, ax, ay, b, tol, new_tag):
    """Clip a CCW polygon to ``{p : (a, p) <= b}`` with ``|a| = 1``.

    Vertices within ``tol`` of the line count as inside. An old edge lying
    on the line inherits ``new_tag`` if it was a clip edge.
    """
    s = [ax * x + ay * y - b for x, y in verts]
    if max(s) <= tol:
        if new_tag != CLIP:
            m = len(verts)
            for i in range(m):
                if tags[i] == CLIP and abs(s[i]) <= tol and abs(s[(i + 1) % m]) <= tol:
                    tags = list(tags)
                    tags[i] = new_tag
        return verts, tags
    out_v, out_t = [], []
    m = len(verts)
    for i in range(m):
        j = (i + 1) % m
        si, sj = s[i], s[j]
        if si <= tol:
            out_v.append(verts[i])
            out_t.append(tags[i])
            if sj > tol:
                f = si / (si - sj)
                (xi, yi), (xj, yj) = verts[i], verts[j]
                out_v.append((xi + f * (xj - xi), yi + f * (yj - yi)))
                out_t.append(new_tag)
        elif sj <= tol:
            f = si / (si - sj)
            (xi, yi), (xj, yj) = verts[i], verts[j]
            out_v.append((xi + f * (xj - xi), yi + f * (yj - yi)))
            out_t.append(tags[i])
    return _tidy(out_v, out_t, tol)


def _tidy(verts, tags, tol):
    """Drop near-duplicate vertices and collinear vertices (bisector tags win)."""
    verts, tags = list(verts), list(tags)
    tol2 = tol * tol
    changed = True
    while changed and len(verts) >= 3:
        changed = False
        m = len(verts)
        for i in range(m):
            j = (i + 1) % m
            (xi, yi), (xj, yj) = verts[i], verts[j]
            if (xi - xj) ** 2 + (yi - yj) ** 2 <= tol2:
                # edge i has zero length; vertex j survives with its outgoing tag
                del verts[i]
                del tags[i]
                changed = True
                break
        if changed:
            continue
        m = len(verts)
        for i in range(m):
            h, j = (i - 1) % m, (i + 1) % m
            (xh, yh), (xi, yi), (xj, yj) = verts[h], verts[i], verts[j]
            ex, ey = xj - xh, yj - yh
            elen = math.hypot(ex, ey)
            if elen == 0.0:
                continue
            if abs(ex * (yi - yh) - ey * (xi - xh)) / elen <= tol:
                merged = tags[h] if tags[h] != CLIP else tags[i]
                tags[h] = merged
                del verts[i]
                del tags[i]
                changed = True
                break
    return verts, tags


def halfplane_intersection_2d(nucleus, others, clip_box: Box, ids=None) -> ConvexPolygon:
    """Voronoi cell of ``nucleus`` against ``others``, intersected with ``clip_box``.

    Bisector half-planes are applied in order of increasing distance from
    the nucleus; once the next generator is farther than twice the current
    circumradius, no remaining bisector can cut the polygon and the loop
    stops. Edge tags are ``ids[j]`` for the bisector with ``others[j]``, or
    :data:`CLIP`.
    """
    c = np.asarray(nucleus, dtype=float)
    if clip_box.dim != 2 or c.shape != (2,):
        raise ValueError("halfplane_intersection_2d works in two dimensions")
    if not clip_box.contains(c):
        raise ValueError("nucleus must lie inside the clip box")
    pts = np.asarray(others, dtype=float).reshape(-1, 2)
    ids = np.arange(len(pts)) if ids is None else np.asarray(ids)
    tol = DEDUP_RTOL * clip_box.diagonal
    rel = pts - c
    dist2 = np.einsum("ij,ij->i", rel, rel)
    if np.any(dist2 == 0.0):
        raise ValueError("a generator coincides with the nucleus")

    cx, cy = float(c[0]), float(c[1])
    verts = [(float(x) - cx, float(y) - cy) for x, y in clip_box.corners_2d()]
    tags = [CLIP] * 4
    rmax2 = max(x * x + y * y for x, y in verts)
    candidates = np.flatnonzero(dist2 <= 4.0 * rmax2 * (1 + 1e-9))
    order = candidates[np.argsort(dist2[candidates], kind="stable")]
    rel_l = rel[order].tolist()
    d2_l = dist2[order].tolist()
    ids_l = ids[order].tolist()
    for (ox, oy), d2, tag in zip(rel_l, d2_l, ids_l):
        if d2 > 4.0 * rmax2 * (1 + 1e-12):
            break
        norm = math.sqrt(d2)
        verts, tags = _clip(verts, tags, ox / norm, oy / norm, 0.5 * norm, tol, tag)
        if len(verts) < 3:
            raise RuntimeError("cell degenerated during clipping; nucleus must be interior")
        rmax2 = max(x * x + y * y for x, y in verts)

    out = np.array(verts) + c
    return ConvexPolygon(out, tuple(tags))


def clip_polygon_to_box(vertices, box: Box) -> np.ndarray:
    """Intersection of a convex CCW polygon with a rectangle (may be empty)."""
    verts = [tuple(map(float, v)) for v in np.asarray(vertices, dtype=float)]
    tags = [CLIP] * len(verts)
    tol = DEDUP_RTOL * box.diagonal
    (x0, y0), (x1, y1) = box.lo, box.hi
    for ax, ay, b in ((1.0, 0.0, x1), (-1.0, 0.0, -x0), (0.0, 1.0, y1), (0.0, -1.0, -y0)):
        verts, tags = _clip(verts, tags, ax, ay, b, tol, CLIP)
        if len(verts) < 3:
            return np.empty((0, 2))
    return np.array(verts)


def polygon_metrics(poly: ConvexPolygon):
    """Return ``(area, diameter, bisector_edge_count, touches_clip)``."""
    v = poly.vertices
    if len(v) < 3:
        raise ValueError("degenerate polygon: fewer than 3 vertices")
    diff = v[:, None, :] - v[None, :, :]
    diameter = float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))
    n_bis = sum(1 for t in poly.edge_tags if t != CLIP)
    return polygon_area(v), diameter, n_bis, n_bis < len(poly.edge_tags)


def _segment_disk_area(ax, ay, bx, by, r):
    """Signed area of the disk (radius r, at origin) ∩ triangle (0, a, b)."""
    dx, dy = bx - ax, by - ay
    qa = dx * dx + dy * dy
    if qa == 0.0:
        return 0.0
    qb = 2.0 * (ax * dx + ay * dy)
    qc = ax * ax + ay * ay - r * r
    pts = [(ax, ay)]
    disc = qb * qb - 4.0 * qa * qc
    if disc > 0.0:
        sq = math.sqrt(disc)
        for t in sorted(((-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa))):
            if 0.0 < t < 1.0:
                pts.append((ax + t * dx, ay + t * dy))
    pts.append((bx, by))
    area = 0.0
    for (px, py), (qx, qy) in zip(pts, pts[1:]):
        mx, my = 0.5 * (px + qx), 0.5 * (py + qy)
        cross = px * qy - py * qx
        if mx * mx + my * my < r * r:
            area += 0.5 * cross
        else:
            area += 0.5 * r * r * math.atan2(cross, px * qx + py * qy)
    return area


def disk_polygon_area(center, radius: float, vertices) -> float:
    """Exact area of a disk intersected with a simple CCW polygon."""
    if radius <= 0:
        return 0.0
    c = np.asarray(center, dtype=float)
    v = (np.asarray(vertices, dtype=float) - c).tolist()
    total = 0.0
    for (ax, ay), (bx, by) in zip(v, v[1:] + v[:1]):
        total += _segment_disk_area(ax, ay, bx, by, radius)
    return max(total, 0.0)


# ---------------------------------------------------------------------------
# cone lemma


def cone_lemma_predicate(spec: ConeSpec, p, y, z):
    """Check the three-point cone configuration.

    Returns ``(hypotheses_hold, conclusion_holds)``: the hypotheses are that
    ``p, y, z`` all lie in the cone, ``0 < |y - apex| < R1``,
    ``R2 <= |p - apex| < R3`` and ``|z - apex| >= alpha / 2``; the
    conclusion is ``|z - p| < |z - y|``.
    """
    p, y, z = (np.asarray(w, dtype=float) for w in (p, y, z))
    dy = float(np.linalg.norm(y - spec.apex))
    dp = float(np.linalg.norm(p - spec.apex))
    dz = float(np.linalg.norm(z - spec.apex))
    hyp = (
        spec.contains(p) and spec.contains(y) and spec.contains(z)
        and 0.0 < dy < spec.r1
        and spec.r2 <= dp < spec.r3
        and dz >= spec.alpha / 2
    )
    concl = float(np.linalg.norm(z - p)) < float(np.linalg.norm(z - y))
    return hyp, concl
