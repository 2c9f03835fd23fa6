"""Geographically correlated disk failures."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import EPS, Point, points_segments_distance
from .topology import DeploymentArea, NetworkGraph, link_key


@dataclass(frozen=True)
class RegionalFailure:
    center: Point
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"failure radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", Point(float(self.center[0]), float(self.center[1])))


@dataclass(frozen=True)
class RadiusDistribution:
    """Truncated power law: density proportional to r**-alpha on [r_min, r_max]."""

    r_min: float
    r_max: float
    alpha: float = 2.0

    def __post_init__(self):
        if not (0 < self.r_min <= self.r_max):
            raise ValueError(f"need 0 < r_min <= r_max, got [{self.r_min}, {self.r_max}]")
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")

    def ppf(self, u):
        """Inverse CDF, vectorised over ``u`` in [0, 1]."""
        a, b, k = self.r_min, self.r_max, self.alpha
        u = np.asarray(u, dtype=float)
        if a == b:
            return np.full_like(u, a)
        if k == 0:
            return a + u * (b - a)
        if k == 1:
            return a * (b / a) ** u
        e = 1.0 - k
        return (a ** e + u * (b ** e - a ** e)) ** (1.0 / e)

    def sample(self, rng: np.random.Generator, size=None):
        return self.ppf(rng.random(size)) if size is not None else float(self.ppf(rng.random()))


def sample_failure(dist: RadiusDistribution, area: DeploymentArea,
                   rng: np.random.Generator) -> RegionalFailure:
    cx = rng.uniform(0.0, area.width)
    cy = rng.uniform(0.0, area.height)
    return RegionalFailure(Point(cx, cy), dist.sample(rng))


@dataclass(frozen=True)
class SurvivingGraph:
    """What is left of ``base`` after a failure.  ``graph`` may be disconnected."""

    base: NetworkGraph
    graph: NetworkGraph
    destroyed_nodes: frozenset
    destroyed_links: frozenset
    _component: dict = field(default=None, repr=False, compare=False)

    def node_alive(self, u) -> bool:
        return u not in self.destroyed_nodes

    def link_alive(self, u, v) -> bool:
        return link_key(u, v) not in self.destroyed_links

    def hop_alive(self, u, v) -> bool:
        """Port liveness: the link and the far-end node both survive."""
        return v not in self.destroyed_nodes and link_key(u, v) not in self.destroyed_links

    def component_of(self, u):
        if self._component is None:
            labels = {}
            for i, comp in enumerate(self.graph.components()):
                for x in comp:
                    labels[x] = i
            object.__setattr__(self, "_component", labels)
        return self._component.get(u)

    def connected(self, s, t) -> bool:
        cs = self.component_of(s)
        return cs is not None and cs == self.component_of(t)


def surviving_graph(g: NetworkGraph, dead_nodes=(), dead_links=()) -> SurvivingGraph:
    """Remnant after removing arbitrary elements (links of dead nodes go too)."""
    dead_nodes = frozenset(dead_nodes)
    dead_links = {link_key(*e) for e in dead_links}
    dead_links |= {e for e in g.links if e[0] in dead_nodes or e[1] in dead_nodes}
    nodes = {u: p for u, p in g.nodes.items() if u not in dead_nodes}
    links = {e: w for e, w in g.links.items() if e not in dead_links}
    rem = NetworkGraph(nodes, links, g.area, require_connected=False, check_planar=False)
    return SurvivingGraph(g, rem, dead_nodes, frozenset(dead_links))


def apply_failure(g: NetworkGraph, f: RegionalFailure) -> SurvivingGraph:
    cx, cy = f.center
    reach = f.radius + EPS
    ids = list(g.nodes)
    pts = g.node_array()
    dn = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) <= reach
    dead_nodes = {ids[i] for i in np.flatnonzero(dn)}
    dead_links = set()
    if g.link_list:
        dl = points_segments_distance(cx, cy, g.segment_array()) <= reach
        dead_links = {g.link_list[i] for i in np.flatnonzero(dl)}
    return surviving_graph(g, dead_nodes, dead_links)


def recoverable_pairs(sg: SurvivingGraph, demands) -> set:
    return {(s, t) for s, t in demands
            if s != t and sg.node_alive(s) and sg.node_alive(t) and sg.connected(s, t)}


def format_failure(f: RegionalFailure) -> str:
    return f"failure {f.center.x!r} {f.center.y!r} {f.radius!r}"


def parse_failure(line: str) -> RegionalFailure:
    parts = line.split()
    if len(parts) != 4 or parts[0] != "failure":
        raise ValueError(f"not a failure record: {line!r}")
    return RegionalFailure(Point(float(parts[1]), float(parts[2])), float(parts[3]))


def read_failure_log(stream) -> list:
    out = []
    for line in stream:
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse_failure(line))
    return out
