"""The limit variable ``D_k`` and the limiting moments ``E[(k+1)!/D_k^(k+1)]``.

With ``W ~ Bernoulli(k/(k+1))``, ``U_1..U_k`` uniform on the unit ball and
``e = (1, 0, ..., 0)``, ``D_k`` is the measure of a union of ``k + 1`` balls
divided by the unit-ball volume:

* ``W = 0``: balls ``B(U_i, |e - U_i|)`` for every ``i``, plus ``B(0, 1)``;
* ``W = 1``: ``B(e, |e - U_1|)``, ``B(U_i, |U_1 - U_i|)`` for ``i >= 2``,
  plus ``B(0, |U_1|)``.

Union volumes are exact where cheap (intervals in ``d = 1``; two disks when
``k = 1, d = 2``) and Monte Carlo otherwise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import lens_area, sample_uniform_ball, unit_ball_volume
from .stats import EmpiricalDistribution

EXACT_1D = "interval-1d"
EXACT_2BALL = "exact-2ball"
DEFAULT_N_INNER = 100_000


@dataclass(frozen=True)
class DkSample:
    k: int
    d: int
    w: int
    u: np.ndarray
    value: float
    volume_method: str


@dataclass(frozen=True)
class MomentEstimate:
    k: int
    estimate: float
    stderr: float
    n_outer: int
    volume_method: str


def mc_tag(n_inner: int) -> str:
    return f"mc({n_inner})"


def resolve_method(k: int, d: int, volume_method: str | None = "auto", n_inner: int = DEFAULT_N_INNER) -> str:
    """Canonical method tag for ``(k, d)``; ``"auto"`` picks the exact path when one exists."""
    if volume_method in (None, "auto"):
        if d == 1:
            return EXACT_1D
        if k == 1 and d == 2:
            return EXACT_2BALL
        return mc_tag(n_inner)
    if volume_method == "mc":
        return mc_tag(n_inner)
    if volume_method == EXACT_1D and d != 1:
        raise ValueError("interval-1d volumes need d=1")
    if volume_method == EXACT_2BALL and not (k == 1 and d == 2):
        raise ValueError("exact-2ball volumes need k=1, d=2")
    if volume_method not in (EXACT_1D, EXACT_2BALL) and not volume_method.startswith("mc("):
        raise ValueError(f"unknown volume method {volume_method!r}")
    return volume_method


def _n_inner_of(method: str) -> int:
    return int(method[3:-1])


def branch_balls(w: np.ndarray, u: np.ndarray):
    """Centers ``(B, k+1, d)`` and radii ``(B, k+1)`` of the ``D_k`` ball lists.

    ``w`` has shape ``(B,)`` and ``u`` shape ``(B, k, d)``.
    """
    w = np.asarray(w).astype(bool)
    u = np.asarray(u, dtype=float)
    b, k, d = u.shape
    e = np.zeros(d)
    e[0] = 1.0
    centers = np.zeros((b, k + 1, d))
    radii = np.empty((b, k + 1))

    # W = 0: B(U_i, |e - U_i|) ..., B(0, 1)
    centers[:, :k] = u
    radii[:, :k] = np.linalg.norm(e - u, axis=2)
    radii[:, k] = 1.0

    if np.any(w):
        u1 = u[w, 0]
        centers[w, 0] = e
        radii[w, 0] = np.linalg.norm(e - u1, axis=1)
        if k > 1:
            radii[w, 1:k] = np.linalg.norm(u1[:, None, :] - u[w, 1:], axis=2)
        centers[w, k] = 0.0
        radii[w, k] = np.linalg.norm(u1, axis=1)
    return centers, radii


def _union_length_1d(centers, radii):
    lo = centers[..., 0] - radii
    hi = centers[..., 0] + radii
    order = np.argsort(lo, axis=1)
    lo = np.take_along_axis(lo, order, axis=1)
    hi = np.take_along_axis(hi, order, axis=1)
    total = np.zeros(len(lo))
    cur_lo, cur_hi = lo[:, 0].copy(), hi[:, 0].copy()
    for j in range(1, lo.shape[1]):
        gap = lo[:, j] > cur_hi
        total += np.where(gap, cur_hi - cur_lo, 0.0)
        cur_lo = np.where(gap, lo[:, j], cur_lo)
        cur_hi = np.where(gap, hi[:, j], np.maximum(cur_hi, hi[:, j]))
    return total + (cur_hi - cur_lo)


def _union_area_two_disks(centers, radii):
    r1, r2 = radii[:, 0], radii[:, 1]
    dist = np.linalg.norm(centers[:, 0] - centers[:, 1], axis=1)
    union = np.pi * (r1**2 + r2**2) - lens_area(r1, r2, dist)
    # cancellation can dip a few ulps below the larger disk, which the union contains
    return np.maximum(union, np.pi * np.maximum(r1, r2) ** 2)


def _union_volume_anchored(centers, radii, n_inner, rng, chunk_points=1 << 20):
    """Largest ball exactly, plus hit-or-miss for the rest of the union.

    Points are drawn in the bounding box of the union; only hits outside the
    largest ball are counted. The estimate is therefore never below the
    largest single-ball volume.
    """
    b, m, d = centers.shape
    omega = unit_ball_volume(d)
    big = np.argmax(radii, axis=1)
    rows = np.arange(b)
    big_c = centers[rows, big]
    big_r = radii[rows, big]
    out = omega * big_r**d
    lo = np.min(centers - radii[..., None], axis=1)
    hi = np.max(centers + radii[..., None], axis=1)
    box_vol = np.prod(hi - lo, axis=1)
    per = max(1, chunk_points // n_inner)
    r2 = radii**2
    for s in range(0, b, per):
        sl = slice(s, min(s + per, b))
        nb = sl.stop - sl.start
        q = lo[sl, None, :] + (hi[sl] - lo[sl])[:, None, :] * rng.random((nb, n_inner, d))
        in_big = np.sum((q - big_c[sl, None, :]) ** 2, axis=2) < big_r[sl, None] ** 2
        in_any = np.zeros((nb, n_inner), dtype=bool)
        for j in range(m):
            in_any |= np.sum((q - centers[sl, None, j, :]) ** 2, axis=2) < r2[sl, None, j]
        frac = np.count_nonzero(in_any & ~in_big, axis=1) / n_inner
        out[sl] += box_vol[sl] * frac
    return out


def dk_values(w, u, method: str, rng: np.random.Generator | None = None) -> np.ndarray:
    """``D_k`` for given Bernoulli outcomes and uniform points."""
    centers, radii = branch_balls(w, u)
    d = centers.shape[2]
    if method == EXACT_1D:
        vol = _union_length_1d(centers, radii)
    elif method == EXACT_2BALL:
        vol = _union_area_two_disks(centers, radii)
    else:
        if rng is None:
            raise ValueError("Monte Carlo volumes need an rng")
        vol = _union_volume_anchored(centers, radii, _n_inner_of(method), rng)
    return vol / unit_ball_volume(d)


def sample_dk_batch(k: int, d: int, size: int, rng: np.random.Generator,
                    volume_method: str | None = "auto", n_inner: int = DEFAULT_N_INNER):
    """``size`` independent draws; returns ``(w, values, method)``."""
    if k < 1 or d < 1:
        raise ValueError("k and d must be >= 1")
    method = resolve_method(k, d, volume_method, n_inner)
    w = (rng.random(size) < k / (k + 1)).astype(np.int8)
    u = sample_uniform_ball(d, rng, size * k).reshape(size, k, d)
    return w, dk_values(w, u, method, rng), method


def sample_dk(k: int, d: int, rng: np.random.Generator, volume_method: str | None = "auto",
              n_inner: int = DEFAULT_N_INNER, w: int | None = None, u=None) -> DkSample:
    """One draw of ``D_k``. ``w`` and ``u`` may be forced for inspection."""
    method = resolve_method(k, d, volume_method, n_inner)
    if w is None:
        w = int(rng.random() < k / (k + 1))
    if u is None:
        u = sample_uniform_ball(d, rng, k)
    u = np.asarray(u, dtype=float).reshape(k, d)
    value = float(dk_values(np.array([w]), u[None], method, rng)[0])
    return DkSample(k=k, d=d, w=int(w), u=u, value=value, volume_method=method)


def limiting_moment(k: int, d: int, n_outer: int, rng: np.random.Generator,
                    volume_method: str | None = "auto", n_inner: int = DEFAULT_N_INNER,
                    batch: int = 1 << 16) -> MomentEstimate:
    """Monte Carlo mean of ``(k+1)!/D_k^(k+1)`` over ``n_outer`` draws.

    With a Monte Carlo volume the estimator is biased by the nonlinearity;
    keep ``n_inner`` large.
    """
    if n_outer < 100:
        raise ValueError("n_outer must be >= 100")
    fact = math.factorial(k + 1)
    total = 0.0
    total_sq = 0.0
    method = resolve_method(k, d, volume_method, n_inner)
    if method.startswith("mc("):
        batch = min(batch, max(1, (1 << 22) // _n_inner_of(method)))
    done = 0
    while done < n_outer:
        m = min(batch, n_outer - done)
        _, vals, _ = sample_dk_batch(k, d, m, rng, method)
        g = fact / vals ** (k + 1)
        total += float(np.sum(g))
        total_sq += float(np.sum(g * g))
        done += m
    mean = total / n_outer
    var = max(total_sq / n_outer - mean * mean, 0.0) * n_outer / (n_outer - 1)
    return MomentEstimate(k=k, estimate=mean, stderr=math.sqrt(var / n_outer),
                          n_outer=n_outer, volume_method=method)


def sample_limit_law(d: int, rng: np.random.Generator, n_samples: int,
                     volume_method: str | None = "auto", k: int = 1,
                     n_inner: int = DEFAULT_N_INNER) -> EmpiricalDistribution:
    """Sorted draws of ``D_k`` for diagnostics."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    _, vals, _ = sample_dk_batch(k, d, n_samples, rng, volume_method, n_inner)
    return EmpiricalDistribution(vals)


def write_dk_csv(path, k: int, d: int, w, values, method: str) -> None:
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["k", "d", "w", "value", "method"])
        for wi, v in zip(np.asarray(w).tolist(), np.asarray(values).tolist()):
            out.writerow([k, d, wi, repr(v), method])


def moment_quadrature(d: int, epsabs: float = 1e-10, epsrel: float = 1e-10) -> float:
    """Deterministic ``E[2/D_1^2]`` by adaptive quadrature over ``U_1``.

    Supported for ``d = 1`` (interval lengths) and ``d = 2`` (two-disk lens
    areas, integrated in polar coordinates over the upper half disk).
    """
    from scipy import integrate

    def g(points: np.ndarray) -> float:
        # Average of 2/D^2 over the two branches, weighted by P(W).
        u = points[None, None, :]
        vals = [dk_values(np.array([w]), u, EXACT_1D if d == 1 else EXACT_2BALL)[0] for w in (0, 1)]
        return 0.5 * 2.0 / vals[0] ** 2 + 0.5 * 2.0 / vals[1] ** 2

    if d == 1:
        pieces = [integrate.quad(lambda s: 0.5 * g(np.array([s])), a, b, epsabs=epsabs, epsrel=epsrel)[0]
                  for a, b in ((-1.0, 0.0), (0.0, 1.0))]
        return float(sum(pieces))
    if d == 2:
        def integrand(theta, r):
            return g(np.array([r * math.cos(theta), r * math.sin(theta)])) * r * 2.0 / math.pi
        val, _ = integrate.dblquad(integrand, 0.0, 1.0, 0.0, math.pi, epsabs=epsabs, epsrel=epsrel)
        return float(val)
    raise ValueError("quadrature target needs d=1 or d=2")
