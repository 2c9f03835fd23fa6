"""Planar primitives for vulnerable zones of links and paths.

A vulnerable zone is the set of epicenters at which a disk failure of a
given radius damages a link (a "hippodrome" around the segment) or a path
(the union of its link zones).  Zones are closed: a point at distance
exactly ``radius`` is inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

# Absolute tolerance for every boundary decision in the package.
EPS = 1e-9


class RadiusMismatch(ValueError):
    pass


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        for p in (self.a, self.b):
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                raise ValueError(f"non-finite segment endpoint {p}")
        if self.a[0] == self.b[0] and self.a[1] == self.b[1]:
            raise ValueError(f"degenerate segment at {self.a}")

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])


def point_segment_distance(p: Sequence[float], s: Segment) -> float:
    ax, ay = s.a
    bx, by = s.b
    dx, dy = bx - ax, by - ay
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / (dx * dx + dy * dy)
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p, q, r) -> bool:
    # q collinear with p-r; is it within the bounding box?
    return (min(p[0], r[0]) - EPS <= q[0] <= max(p[0], r[0]) + EPS
            and min(p[1], r[1]) - EPS <= q[1] <= max(p[1], r[1]) + EPS)


def segments_intersect(s1: Segment, s2: Segment) -> bool:
    """True if the closed segments share at least one point."""
    p1, q1, p2, q2 = s1.a, s1.b, s2.a, s2.b
    o1 = _orient(p1, q1, p2)
    o2 = _orient(p1, q1, q2)
    o3 = _orient(p2, q2, p1)
    o4 = _orient(p2, q2, q1)
    if ((o1 > 0 and o2 < 0) or (o1 < 0 and o2 > 0)) and \
            ((o3 > 0 and o4 < 0) or (o3 < 0 and o4 > 0)):
        return True
    if o1 == 0 and _on_segment(p1, p2, q1):
        return True
    if o2 == 0 and _on_segment(p1, q2, q1):
        return True
    if o3 == 0 and _on_segment(p2, p1, q2):
        return True
    if o4 == 0 and _on_segment(p2, q1, q2):
        return True
    return False


def segment_segment_distance(s1: Segment, s2: Segment) -> float:
    if segments_intersect(s1, s2):
        return 0.0
    return min(
        point_segment_distance(s1.a, s2),
        point_segment_distance(s1.b, s2),
        point_segment_distance(s2.a, s1),
        point_segment_distance(s2.b, s1),
    )


@dataclass(frozen=True)
class VulnerableZone:
    """Epicenters within ``radius`` of any segment of ``spine``."""

    spine: tuple
    radius: float

    def __post_init__(self):
        if not self.spine:
            raise ValueError("zone spine must be non-empty")
        if not self.radius > 0:
            raise ValueError(f"zone radius must be positive, got {self.radius}")
        for prev, cur in zip(self.spine, self.spine[1:]):
            if not ({prev.a, prev.b} & {cur.a, cur.b}):
                raise ValueError("consecutive spine segments must share an endpoint")

    @classmethod
    def of_link(cls, seg: Segment, radius: float) -> "VulnerableZone":
        return cls((seg,), radius)

    @classmethod
    def of_path(cls, points: Sequence[Point], radius: float) -> "VulnerableZone":
        segs = tuple(Segment(Point(*a), Point(*b)) for a, b in zip(points, points[1:]))
        return cls(segs, radius)


def zone_contains(z: VulnerableZone, p: Sequence[float]) -> bool:
    return min(point_segment_distance(p, s) for s in z.spine) <= z.radius + EPS


def zones_intersect(z1: VulnerableZone, z2: VulnerableZone) -> bool:
    if z1.radius != z2.radius:
        raise RadiusMismatch(f"zones have radii {z1.radius} and {z2.radius}")
    reach = z1.radius + z2.radius + EPS
    return any(segment_segment_distance(u, v) <= reach
               for u in z1.spine for v in z2.spine)


# ---------------------------------------------------------------------------
# Vectorised forms.  Segments are rows (ax, ay, bx, by) of an (n, 4) array.

def points_segments_distance(px, py, segs: np.ndarray) -> np.ndarray:
    """Distance from point(s) to each segment; broadcasts px/py against rows."""
    ax, ay, bx, by = segs[..., 0], segs[..., 1], segs[..., 2], segs[..., 3]
    dx, dy = bx - ax, by - ay
    t = ((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy)
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def segment_distance_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """(len(A), len(B)) matrix of closed-segment distances."""
    A = np.asarray(A, dtype=float)[:, None, :]
    B = np.asarray(B, dtype=float)[None, :, :]
    a1, a2 = A[..., 0:2], A[..., 2:4]
    b1, b2 = B[..., 0:2], B[..., 2:4]

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - \
               (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    o1 = orient(a1, a2, b1)
    o2 = orient(a1, a2, b2)
    o3 = orient(b1, b2, a1)
    o4 = orient(b1, b2, a2)
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)

    d = np.minimum.reduce([
        points_segments_distance(A[..., 0], A[..., 1], B),
        points_segments_distance(A[..., 2], A[..., 3], B),
        points_segments_distance(B[..., 0], B[..., 1], A),
        points_segments_distance(B[..., 2], B[..., 3], A),
    ])
    # collinear touching cases already give d == 0 through the endpoint terms
    return np.where(proper, 0.0, d)
