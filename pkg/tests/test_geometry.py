import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from georesilience.geometry import (Point, RadiusMismatch, Segment, VulnerableZone,
                                    point_segment_distance, segment_distance_matrix,
                                    segment_segment_distance, segments_intersect,
                                    zone_contains, zones_intersect)

coord = st.floats(-100, 100, allow_nan=False, allow_infinity=False)
point = st.tuples(coord, coord).map(lambda p: Point(*p))


@st.composite
def segment(draw):
    a = draw(point)
    b = draw(point.filter(lambda b: math.dist(a, b) > 1e-3))
    return Segment(a, b)


def seg(ax, ay, bx, by):
    return Segment(Point(ax, ay), Point(bx, by))


@pytest.mark.parametrize("p,s,expected", [
    ((0, 0), seg(1, 0, 3, 0), 1.0),
    ((2, 2), seg(0, 0, 4, 0), 2.0),
    ((5, 0), seg(0, 0, 4, 0), 1.0),
])
def test_point_segment_distance_examples(p, s, expected):
    assert point_segment_distance(p, s) == pytest.approx(expected)


@pytest.mark.parametrize("s1,s2,expected", [
    (seg(0, 0, 4, 0), seg(0, 3, 4, 3), 3.0),
    (seg(0, 0, 4, 0), seg(2, -1, 2, 1), 0.0),
    (seg(0, 0, 1, 0), seg(3, 4, 3, 5), math.sqrt(20)),
])
def test_segment_segment_distance_examples(s1, s2, expected):
    assert segment_segment_distance(s1, s2) == pytest.approx(expected)


def test_degenerate_segment_rejected():
    with pytest.raises(ValueError):
        seg(1, 1, 1, 1)
    with pytest.raises(ValueError):
        seg(0, 0, math.nan, 1)


def test_zone_contains_closed_boundary():
    z = VulnerableZone.of_link(seg(0, 0, 4, 0), 1.0)
    assert zone_contains(z, (2, 1))
    assert not zone_contains(z, (2, 1.01))


def test_zones_intersect_examples():
    a, b = seg(0, 0, 4, 0), seg(0, 3, 4, 3)
    assert not zones_intersect(VulnerableZone.of_link(a, 1), VulnerableZone.of_link(b, 1))
    assert zones_intersect(VulnerableZone.of_link(a, 1.5), VulnerableZone.of_link(b, 1.5))
    with pytest.raises(RadiusMismatch):
        zones_intersect(VulnerableZone.of_link(a, 1), VulnerableZone.of_link(b, 2))


def test_zone_validation():
    with pytest.raises(ValueError):
        VulnerableZone((), 1.0)
    with pytest.raises(ValueError):
        VulnerableZone.of_link(seg(0, 0, 1, 0), 0.0)
    with pytest.raises(ValueError):
        VulnerableZone((seg(0, 0, 1, 0), seg(5, 5, 6, 6)), 1.0)


def _brute_distance(s1, s2, n=400):
    # dense sampling of both segments; an upper bound converging to the truth
    t = np.linspace(0, 1, n)
    p = np.column_stack([s1.a.x + t * (s1.b.x - s1.a.x), s1.a.y + t * (s1.b.y - s1.a.y)])
    q = np.column_stack([s2.a.x + t * (s2.b.x - s2.a.x), s2.a.y + t * (s2.b.y - s2.a.y)])
    return float(np.min(np.hypot(p[:, None, 0] - q[None, :, 0], p[:, None, 1] - q[None, :, 1])))


@settings(max_examples=200, deadline=None)
@given(segment(), segment())
def test_segment_distance_matches_sampling(s1, s2):
    d = segment_segment_distance(s1, s2)
    approx = _brute_distance(s1, s2)
    step = max(s1.length, s2.length) / 399
    assert d <= approx + 1e-9
    assert approx - d <= step + 1e-9


@given(segment(), segment())
def test_segment_distance_symmetric(s1, s2):
    assert segment_segment_distance(s1, s2) == pytest.approx(segment_segment_distance(s2, s1))
    assert segment_segment_distance(s1, s1) == 0.0


@given(point, segment())
def test_point_distance_symmetric_in_endpoints(p, s):
    assert point_segment_distance(p, s) == pytest.approx(
        point_segment_distance(p, Segment(s.b, s.a)), abs=1e-9)


@given(segment(), segment())
def test_intersection_iff_zero_distance(s1, s2):
    if segments_intersect(s1, s2):
        assert segment_segment_distance(s1, s2) == 0.0
    else:
        assert segment_segment_distance(s1, s2) > 0.0


@given(segment(), segment(), st.floats(0.1, 50), st.floats(0.0, 50))
def test_zone_intersection_symmetric_and_monotone(s1, s2, r, dr):
    z1, z2 = VulnerableZone.of_link(s1, r), VulnerableZone.of_link(s2, r)
    assert zones_intersect(z1, z2) == zones_intersect(z2, z1)
    if zones_intersect(z1, z2):
        assert zones_intersect(VulnerableZone.of_link(s1, r + dr),
                               VulnerableZone.of_link(s2, r + dr))


def test_zones_intersect_matches_sampling_oracle():
    # oracle: some grid point lies in both zones; only decided cases where the
    # margin |d - 2r| exceeds the grid step are compared
    rng = np.random.default_rng(5)
    step = 0.25
    checked = 0
    for _ in range(150):
        a = rng.uniform(0, 20, 4)
        b = rng.uniform(0, 20, 4)
        if math.hypot(a[2] - a[0], a[3] - a[1]) < 1 or math.hypot(b[2] - b[0], b[3] - b[1]) < 1:
            continue
        s1, s2 = seg(*a), seg(*b)
        r = rng.uniform(0.5, 4)
        d = segment_segment_distance(s1, s2)
        if abs(d - 2 * r) < 2 * step:
            continue
        xs = np.arange(-10, 30, step)
        X, Y = np.meshgrid(xs, xs)
        from georesilience.geometry import points_segments_distance
        arr1 = np.array([[*s1.a, *s1.b]])
        arr2 = np.array([[*s2.a, *s2.b]])
        in1 = points_segments_distance(X[..., None], Y[..., None], arr1)[..., 0] <= r
        in2 = points_segments_distance(X[..., None], Y[..., None], arr2)[..., 0] <= r
        oracle = bool(np.any(in1 & in2))
        z1, z2 = VulnerableZone.of_link(s1, r), VulnerableZone.of_link(s2, r)
        assert zones_intersect(z1, z2) == oracle
        checked += 1
    assert checked > 50


@settings(max_examples=100)
@given(st.lists(point, min_size=3, max_size=6, unique=True), point, st.floats(0.5, 30))
def test_path_zone_is_union_of_link_zones(pts, p, r):
    if any(math.dist(a, b) < 1e-3 for a, b in zip(pts, pts[1:])):
        return
    path = VulnerableZone.of_path(pts, r)
    links = [VulnerableZone.of_link(s, r) for s in path.spine]
    assert zone_contains(path, p) == any(zone_contains(z, p) for z in links)


@settings(max_examples=50)
@given(st.lists(segment(), min_size=1, max_size=6), st.lists(segment(), min_size=1, max_size=6))
def test_vectorised_matrix_matches_scalar(A, B):
    arrA = np.array([[*s.a, *s.b] for s in A])
    arrB = np.array([[*s.a, *s.b] for s in B])
    D = segment_distance_matrix(arrA, arrB)
    for i, s1 in enumerate(A):
        for j, s2 in enumerate(B):
            assert D[i, j] == pytest.approx(segment_segment_distance(s1, s2), abs=1e-7)
