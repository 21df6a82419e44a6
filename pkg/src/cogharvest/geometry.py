"""Homogeneous Poisson point processes on a disk window and shot-noise sums.

The plane is truncated to a finite disk window centered at the origin; all
"typical node" statistics are evaluated at the center, where the truncation
introduces no edge effect at the evaluation point. The neglected interference
tail beyond a window of radius ``W`` has mean ``2*pi*density*W**(2-alpha) /
(alpha-2)`` (about 1.3e-4 at density 0.1, alpha 4, W 50), far below any outage
tolerance used here.

Distances are measured in units of the transmitter-receiver link distance,
powers in units of the primary transmit power.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream, as_generator

__all__ = [
    "Point2D",
    "Window",
    "PointSample",
    "SingularityError",
    "sample_hppp",
    "nearest_distance",
    "in_disk_union",
    "shot_noise",
    "scale_points",
    "superpose",
]


class SingularityError(ValueError):
    """A point coincides with the evaluation location (zero distance).

    The event has probability zero in the continuum; callers resample the
    offending realization instead of clamping, which would bias the heavy
    tail of the interference distribution.
    """


@dataclass(frozen=True)
class Point2D:
    """Planar coordinate."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("coordinates must be finite")


def _xy(p: "Point2D | tuple[float, float]") -> tuple[float, float]:
    if isinstance(p, Point2D):
        return p.x, p.y
    x, y = float(p[0]), float(p[1])
    return x, y


def _disk_overlap_area(dist: float, big: float, small: float) -> float:
    """Area of the intersection of two disks with center distance ``dist``."""
    if small <= 0.0 or big <= 0.0:
        return 0.0
    if dist >= big + small:
        return 0.0
    if dist <= abs(big - small):
        r = min(big, small)
        return math.pi * r * r
    d2, b2, s2 = dist * dist, big * big, small * small
    term1 = b2 * math.acos((d2 + b2 - s2) / (2.0 * dist * big))
    term2 = s2 * math.acos((d2 + s2 - b2) / (2.0 * dist * small))
    term3 = 0.5 * math.sqrt(
        (-dist + big + small) * (dist + big - small) * (dist - big + small) * (dist + big + small)
    )
    return term1 + term2 - term3


@dataclass(frozen=True)
class Window:
    """Disk sampling window centered at the origin.

    ``excluded_disk``, when present, removes a disk from the admissible
    region. This realizes exact conditioning on a point-process void (no
    points inside the disk): by independence of a Poisson process over
    disjoint sets, sampling directly on the set difference with the reduced
    Poisson mean is the conditioned process, with no realization-level
    rejection.
    """

    radius: float
    excluded_disk: tuple[Point2D, float] | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ValueError("window radius must be positive and finite")
        if self.excluded_disk is not None:
            center, r = self.excluded_disk
            if not isinstance(center, Point2D):
                object.__setattr__(self, "excluded_disk", (Point2D(*_xy(center)), float(r)))
                center, r = self.excluded_disk
            if r < 0.0 or not math.isfinite(r):
                raise ValueError("excluded disk radius must be nonnegative and finite")

    def area(self) -> float:
        return math.pi * self.radius * self.radius

    def admissible_area(self) -> float:
        """Window area minus the part of the excluded disk inside the window."""
        if self.excluded_disk is None:
            return self.area()
        center, r = self.excluded_disk
        overlap = _disk_overlap_area(math.hypot(center.x, center.y), self.radius, r)
        return self.area() - overlap

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        inside = x * x + y * y <= self.radius * self.radius
        if self.excluded_disk is not None:
            center, r = self.excluded_disk
            dx, dy = x - center.x, y - center.y
            inside &= dx * dx + dy * dy > r * r
        return inside

    def scaled(self, a: float) -> "Window":
        if self.excluded_disk is None:
            return Window(self.radius * a)
        center, r = self.excluded_disk
        return Window(self.radius * a, (Point2D(center.x * a, center.y * a), r * a))


@dataclass(frozen=True)
class PointSample:
    """One realization of a planar point process inside a window.

    ``points`` is an ``(n, 2)`` float64 array, immutable by convention:
    samples are safe to share across concurrent workers.
    """

    points: np.ndarray
    density: float
    window: Window

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if not np.all(np.isfinite(pts)):
            raise ValueError("sample points must be finite")
        # tolerance covers coordinate round-off from scaling
        tol = 1e-9 * max(1.0, self.window.radius)
        r = np.hypot(pts[:, 0], pts[:, 1])
        if np.any(r > self.window.radius + tol):
            raise ValueError("sample point outside window")
        if self.window.excluded_disk is not None:
            center, excl_r = self.window.excluded_disk
            d = np.hypot(pts[:, 0] - center.x, pts[:, 1] - center.y)
            if np.any(d < excl_r - tol):
                raise ValueError("sample point inside excluded disk")

    def __len__(self) -> int:
        return self.points.shape[0]


def _uniform_disk(g: np.random.Generator, n: int, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Uniform points in a disk; radii use 1-U so a point never lands exactly
    on the center (keeps shot noise at the origin singularity-free)."""
    r = radius * np.sqrt(1.0 - g.random(n))
    phi = (2.0 * math.pi) * g.random(n)
    return r * np.cos(phi), r * np.sin(phi)


def _uniform_window_xy(
    g: np.random.Generator, n: int, window: Window
) -> tuple[np.ndarray, np.ndarray]:
    x, y = _uniform_disk(g, n, window.radius)
    if window.excluded_disk is not None:
        center, r = window.excluded_disk
        r2 = r * r
        bad = (x - center.x) ** 2 + (y - center.y) ** 2 <= r2
        # per-point redraw: exactly uniform on the set difference
        while np.any(bad):
            k = int(bad.sum())
            nx, ny = _uniform_disk(g, k, window.radius)
            x[bad], y[bad] = nx, ny
            bad2 = (nx - center.x) ** 2 + (ny - center.y) ** 2 <= r2
            idx = np.flatnonzero(bad)
            bad[:] = False
            bad[idx[bad2]] = True
    return x, y


def _uniform_in_window(g: np.random.Generator, n: int, window: Window) -> np.ndarray:
    x, y = _uniform_window_xy(g, n, window)
    return np.column_stack((x, y))


def sample_hppp(
    density: float, window: Window, rng: "RngStream | np.random.Generator"
) -> PointSample:
    """Draw one homogeneous Poisson point process realization.

    The count is Poisson with mean ``density * admissible area``; points are
    i.i.d. uniform over the window minus any excluded disk.
    """
    if not (math.isfinite(density) and density > 0.0):
        raise ValueError("density must be positive and finite")
    g = as_generator(rng)
    n = int(g.poisson(density * window.admissible_area()))
    pts = _uniform_in_window(g, n, window)
    return PointSample(pts, density, window)


def nearest_distance(p: "Point2D | tuple[float, float]", s: PointSample) -> float:
    """Distance from ``p`` to the nearest sample point; ``inf`` for an empty
    sample (the distinguished "no neighbor" result)."""
    if len(s) == 0:
        return math.inf
    x, y = _xy(p)
    d = np.hypot(s.points[:, 0] - x, s.points[:, 1] - y)
    return float(d.min())


def in_disk_union(
    p: "Point2D | tuple[float, float]", centers: PointSample, radius: float
) -> bool:
    """True iff ``p`` lies within ``radius`` of some center (e.g. inside the
    union of guard zones)."""
    return nearest_distance(p, centers) <= radius


def shot_noise(
    at: "Point2D | tuple[float, float]",
    s: PointSample,
    alpha: float,
    power: float,
    exclude: "Point2D | tuple[float, float] | None" = None,
) -> float:
    """Power-law shot noise ``power * sum(dist**-alpha)`` at a location.

    ``exclude`` drops points exactly matching the given coordinate (e.g. a
    serving transmitter that is part of the sample). A sample point at zero
    distance from ``at`` raises :class:`SingularityError`.
    """
    if alpha <= 2.0:
        raise ValueError("path-loss exponent must exceed 2 for a finite sum")
    if power <= 0.0:
        raise ValueError("power must be positive")
    if len(s) == 0:
        return 0.0
    x, y = _xy(at)
    px, py = s.points[:, 0], s.points[:, 1]
    if exclude is not None:
        ex, ey = _xy(exclude)
        keep = ~((px == ex) & (py == ey))
        px, py = px[keep], py[keep]
    d2 = (px - x) ** 2 + (py - y) ** 2
    if np.any(d2 == 0.0):
        raise SingularityError("interferer at zero distance; resample the realization")
    return float(power * np.sum(d2 ** (-alpha / 2.0)))


def scale_points(s: PointSample, a: float) -> PointSample:
    """Scale every coordinate by ``a``.

    A homogeneous Poisson process scaled by ``a`` is again homogeneous with
    density divided by ``a**2``; the window scales along with the points.
    """
    if not (math.isfinite(a) and a > 0.0):
        raise ValueError("scale factor must be positive and finite")
    return PointSample(s.points * a, s.density / (a * a), s.window.scaled(a))


def superpose(s1: PointSample, s2: PointSample) -> PointSample:
    """Union of two realizations on the same window; densities add.

    The superposition of independent homogeneous Poisson processes is again
    Poisson with the summed density.
    """
    if s1.window != s2.window:
        raise ValueError("superpose requires identical windows")
    pts = np.concatenate((s1.points, s2.points), axis=0)
    return PointSample(pts, s1.density + s2.density, s1.window)
