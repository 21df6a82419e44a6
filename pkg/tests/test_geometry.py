"""Point-process sampling, window conditioning, and shot-noise primitives."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from cogharvest.geometry import (
    Point2D,
    PointSample,
    SingularityError,
    Window,
    _disk_overlap_area,
    in_disk_union,
    nearest_distance,
    sample_hppp,
    scale_points,
    shot_noise,
    superpose,
)
from cogharvest.rng import RngStream


def _stream(*idx):
    return RngStream(7).substream(*idx)


def test_sample_counts_match_poisson_mean():
    w = Window(10.0)
    density = 0.05
    counts = []
    radii_min = math.inf
    for i in range(400):
        s = sample_hppp(density, w, _stream(0, i))
        counts.append(len(s))
        assert np.all(np.hypot(s.points[:, 0], s.points[:, 1]) <= w.radius)
        if len(s):
            radii_min = min(radii_min, float(np.hypot(s.points[:, 0], s.points[:, 1]).min()))
    mean = density * w.area()
    assert abs(np.mean(counts) - mean) <= 5.0 * math.sqrt(mean / 400)
    assert radii_min > 0.0  # radial draw uses 1-U, never exactly the center


def test_excluded_disk_stays_empty_and_mean_drops():
    w = Window(10.0, (Point2D(3.0, 0.0), 2.0))
    density = 0.08
    counts = []
    for i in range(300):
        s = sample_hppp(density, w, _stream(1, i))
        d = np.hypot(s.points[:, 0] - 3.0, s.points[:, 1])
        assert np.all(d > 2.0)
        counts.append(len(s))
    mean = density * w.admissible_area()
    assert w.admissible_area() < w.area()
    assert abs(np.mean(counts) - mean) <= 5.0 * math.sqrt(mean / 300)


@pytest.mark.parametrize(
    "dist,big,small",
    [(2.5, 3.0, 1.0), (1.0, 2.0, 1.5), (3.9, 2.0, 2.0), (0.4, 5.0, 1.0)],
)
def test_disk_overlap_area_matches_quadrature(dist, big, small):
    def chord(x):
        a = big * big - x * x
        b = small * small - (x - dist) ** 2
        if a <= 0.0 or b <= 0.0:
            return 0.0
        return 2.0 * min(math.sqrt(a), math.sqrt(b))

    lo = max(-big, dist - small)
    hi = min(big, dist + small)
    ref, err = quad(chord, lo, hi, limit=200)
    got = _disk_overlap_area(dist, big, small)
    assert got == pytest.approx(ref, rel=1e-9, abs=10.0 * err)


def test_disk_overlap_area_degenerate_cases():
    assert _disk_overlap_area(5.0, 2.0, 3.0) == 0.0  # tangent: dist == sum
    assert _disk_overlap_area(7.0, 2.0, 3.0) == 0.0
    assert _disk_overlap_area(0.5, 3.0, 1.0) == pytest.approx(math.pi)  # contained
    assert _disk_overlap_area(1.0, 0.0, 1.0) == 0.0


def test_scaling_rescales_density_and_shot_noise():
    s = sample_hppp(0.2, Window(8.0), _stream(2))
    assert len(s) > 0
    a = 1.7
    t = scale_points(s, a)
    assert t.density == s.density / (a * a)
    assert t.window.radius == s.window.radius * a
    assert np.array_equal(t.points, s.points * a)
    i_s = shot_noise((0.0, 0.0), s, 4.0, 1.0)
    i_t = shot_noise((0.0, 0.0), t, 4.0, 1.0)
    assert i_t == pytest.approx(a ** -4.0 * i_s, rel=1e-12)


@settings(deadline=None, max_examples=40)
@given(a=st.floats(0.1, 10.0))
def test_scale_roundtrip(a):
    s = sample_hppp(0.3, Window(5.0), _stream(3))
    back = scale_points(scale_points(s, a), 1.0 / a)
    assert back.density == pytest.approx(s.density, rel=1e-12)
    assert np.allclose(back.points, s.points, rtol=1e-12, atol=1e-12)


def test_superpose_adds_points_and_densities():
    w = Window(6.0)
    s1 = sample_hppp(0.1, w, _stream(4, 0))
    s2 = sample_hppp(0.25, w, _stream(4, 1))
    u = superpose(s1, s2)
    assert u.density == s1.density + s2.density
    assert len(u) == len(s1) + len(s2)
    with pytest.raises(ValueError, match="identical windows"):
        superpose(s1, sample_hppp(0.1, Window(7.0), _stream(4, 2)))


def test_nearest_distance_of_empty_sample_is_inf():
    empty = PointSample(np.empty((0, 2)), 0.1, Window(5.0))
    assert nearest_distance((0.0, 0.0), empty) == math.inf
    assert not in_disk_union((0.0, 0.0), empty, 1e9)


def test_in_disk_union_boundary_is_inclusive():
    centers = PointSample(np.array([[3.0, 0.0]]), 0.1, Window(5.0))
    assert in_disk_union((0.0, 0.0), centers, 3.0)
    assert not in_disk_union((0.0, 0.0), centers, 2.999999)


def test_shot_noise_values_exclusion_and_errors():
    w = Window(5.0)
    s = PointSample(np.array([[1.0, 0.0], [0.0, 2.0]]), 0.1, w)
    total = shot_noise((0.0, 0.0), s, 4.0, 0.5)
    assert total == pytest.approx(0.5 * (1.0 + 2.0 ** -4.0), rel=1e-15)
    without = shot_noise((0.0, 0.0), s, 4.0, 0.5, exclude=(1.0, 0.0))
    assert without == pytest.approx(0.5 * 2.0 ** -4.0, rel=1e-15)
    assert shot_noise((0.0, 0.0), PointSample(np.empty((0, 2)), 0.1, w), 4.0, 1.0) == 0.0
    with pytest.raises(SingularityError):
        shot_noise((1.0, 0.0), s, 4.0, 1.0)
    with pytest.raises(ValueError, match="exceed 2"):
        shot_noise((0.0, 0.0), s, 2.0, 1.0)
    with pytest.raises(ValueError, match="power"):
        shot_noise((0.0, 0.0), s, 4.0, 0.0)


def test_point_sample_validation():
    w = Window(2.0)
    with pytest.raises(ValueError, match="outside window"):
        PointSample(np.array([[3.0, 0.0]]), 0.1, w)
    we = Window(5.0, (Point2D(0.0, 0.0), 1.0))
    with pytest.raises(ValueError, match="excluded disk"):
        PointSample(np.array([[0.1, 0.0]]), 0.1, we)
    with pytest.raises(ValueError, match="finite"):
        PointSample(np.array([[math.nan, 0.0]]), 0.1, w)
    flat = PointSample(np.array([1.0, 0.0, 0.0, 1.0]), 0.1, w)
    assert flat.points.shape == (2, 2)


def test_window_validation_and_scaling():
    with pytest.raises(ValueError, match="radius"):
        Window(0.0)
    with pytest.raises(ValueError, match="nonnegative"):
        Window(5.0, (Point2D(0.0, 0.0), -1.0))
    w = Window(4.0, (Point2D(1.0, -2.0), 0.5)).scaled(3.0)
    assert w.radius == 12.0
    center, r = w.excluded_disk
    assert (center.x, center.y, r) == (3.0, -6.0, 1.5)


def test_sample_hppp_rejects_bad_density():
    with pytest.raises(ValueError, match="density"):
        sample_hppp(0.0, Window(5.0), _stream(5))
    with pytest.raises(ValueError, match="density"):
        sample_hppp(math.inf, Window(5.0), _stream(5))
