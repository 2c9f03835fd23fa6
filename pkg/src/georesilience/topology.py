"""Embedded network graphs: model, text I/O, random planar generation, routing."""

from __future__ import annotations

import heapq
import io
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Optional

import numpy as np

from .geometry import EPS, Point, Segment, points_segments_distance, segment_distance_matrix


class TopologyError(Exception):
    pass


class ParseError(TopologyError):
    def __init__(self, lineno, msg):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class InvariantViolation(TopologyError):
    pass


class InfeasibleRequest(TopologyError):
    pass


class GenerationFailure(TopologyError):
    pass


class UnknownNode(KeyError):
    pass


def link_key(u, v) -> tuple:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class DeploymentArea:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"area must have positive extent, got {self.width}x{self.height}")

    def contains(self, p) -> bool:
        return -EPS <= p[0] <= self.width + EPS and -EPS <= p[1] <= self.height + EPS


class NetworkGraph:
    """Undirected, weighted, straight-line embedded graph.

    Construction validates all invariants.  ``require_connected`` and
    ``check_planar`` may be switched off for failure remnants, which are
    subgraphs of an already-validated graph.
    """

    def __init__(self, nodes: Mapping[int, Point], links: Mapping[tuple, float],
                 area: DeploymentArea, *, require_connected=True, check_planar=True):
        self.area = area
        self.nodes = MappingProxyType({int(u): Point(float(p[0]), float(p[1]))
                                       for u, p in sorted(nodes.items())})
        norm = {}
        for (u, v), w in links.items():
            if u == v:
                raise InvariantViolation(f"self-loop at node {u}")
            key = link_key(u, v)
            if key in norm:
                raise InvariantViolation(f"parallel link {key}")
            for x in key:
                if x not in self.nodes:
                    raise InvariantViolation(f"link {key} references unknown node {x}")
            if not (w > 0 and math.isfinite(w)):
                raise InvariantViolation(f"link {key} has non-positive weight {w}")
            norm[key] = float(w)
        self.links = MappingProxyType(dict(sorted(norm.items())))

        for u, p in self.nodes.items():
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise InvariantViolation(f"node {u} has non-finite coordinates")
            if not area.contains(p):
                raise InvariantViolation(f"node {u} at {tuple(p)} lies outside the deployment area")

        adj = {u: [] for u in self.nodes}
        for u, v in self.links:
            adj[u].append(v)
            adj[v].append(u)
        self.adj = MappingProxyType({u: tuple(sorted(vs)) for u, vs in adj.items()})

        self.link_list = tuple(self.links)
        self.link_index = MappingProxyType({e: i for i, e in enumerate(self.link_list)})

        if check_planar:
            self._check_planar()
        if require_connected and not self.is_connected():
            raise InvariantViolation("graph is not connected")

    # -- accessors -----------------------------------------------------------

    def __contains__(self, u):
        return u in self.nodes

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, NetworkGraph):
            return NotImplemented
        return (self.area == other.area and dict(self.nodes) == dict(other.nodes)
                and dict(self.links) == dict(other.links))

    def __repr__(self):
        return f"NetworkGraph(|V|={len(self.nodes)}, |E|={len(self.links)})"

    def has_link(self, u, v) -> bool:
        return link_key(u, v) in self.links

    def weight(self, u, v) -> float:
        return self.links[link_key(u, v)]

    def segment(self, u, v) -> Segment:
        return Segment(self.nodes[u], self.nodes[v])

    def euclidean(self, u, v) -> float:
        a, b = self.nodes[u], self.nodes[v]
        return math.hypot(b.x - a.x, b.y - a.y)

    def segment_array(self, links: Optional[Iterable[tuple]] = None) -> np.ndarray:
        links = self.link_list if links is None else list(links)
        if not links:
            return np.zeros((0, 4))
        return np.array([(*self.nodes[u], *self.nodes[v]) for u, v in links], dtype=float)

    def node_array(self) -> np.ndarray:
        return np.array([self.nodes[u] for u in self.nodes], dtype=float)

    def path_weight(self, path, weights: Optional[Mapping] = None) -> float:
        w = self.links if weights is None else weights
        return sum(w[link_key(a, b)] for a, b in zip(path, path[1:]))

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def components(self) -> list:
        """Connected components as a list of frozensets (sorted by min id)."""
        seen, comps = set(), []
        for root in self.nodes:
            if root in seen:
                continue
            comp, stack = {root}, [root]
            seen.add(root)
            while stack:
                u = stack.pop()
                for v in self.adj[u]:
                    if v not in seen:
                        seen.add(v)
                        comp.add(v)
                        stack.append(v)
            comps.append(frozenset(comp))
        return comps

    def _check_planar(self):
        if len(self.link_list) < 2:
            return
        D = segment_distance_matrix(self.segment_array(), self.segment_array())
        for i, (u1, v1) in enumerate(self.link_list):
            for j in range(i + 1, len(self.link_list)):
                u2, v2 = self.link_list[j]
                shared = {u1, v1} & {u2, v2}
                if not shared:
                    if D[i, j] <= EPS:
                        raise InvariantViolation(f"links {(u1, v1)} and {(u2, v2)} cross")
                    continue
                # sharing one endpoint: the two segments must not overlap collinearly
                c = shared.pop()
                p = self.nodes[c]
                a = self.nodes[v1 if u1 == c else u1]
                b = self.nodes[v2 if u2 == c else u2]
                ax, ay, bx, by = a.x - p.x, a.y - p.y, b.x - p.x, b.y - p.y
                cross = ax * by - ay * bx
                if abs(cross) <= EPS * max(1.0, math.hypot(ax, ay) * math.hypot(bx, by)) \
                        and ax * bx + ay * by > 0:
                    raise InvariantViolation(f"links {(u1, v1)} and {(u2, v2)} overlap")
        ids = list(self.nodes)
        pts = self.node_array()
        segs = self.segment_array()
        for i, (u, v) in enumerate(self.link_list):
            d = points_segments_distance(pts[:, 0], pts[:, 1], segs[i])
            for j in np.flatnonzero(d <= EPS):
                if ids[j] not in (u, v):
                    raise InvariantViolation(f"link {(u, v)} passes through node {ids[j]}")


# ---------------------------------------------------------------------------
# text format

def load_topology(source) -> NetworkGraph:
    """Parse the line-oriented topology format from a string or text stream."""
    if isinstance(source, str):
        source = io.StringIO(source)
    area = None
    nodes, links, explicit = {}, {}, {}
    for lineno, raw in enumerate(source, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "area":
                if area is not None:
                    raise ParseError(lineno, "duplicate area line")
                if len(parts) != 3:
                    raise ParseError(lineno, "expected 'area <width> <height>'")
                area = DeploymentArea(float(parts[1]), float(parts[2]))
            elif kind == "node":
                if len(parts) != 4:
                    raise ParseError(lineno, "expected 'node <id> <x> <y>'")
                u = int(parts[1])
                if u < 0:
                    raise ParseError(lineno, f"node id must be non-negative, got {u}")
                if u in nodes:
                    raise ParseError(lineno, f"duplicate node {u}")
                nodes[u] = Point(float(parts[2]), float(parts[3]))
            elif kind == "link":
                if len(parts) not in (3, 4):
                    raise ParseError(lineno, "expected 'link <u> <v> [weight]'")
                u, v = int(parts[1]), int(parts[2])
                if u == v:
                    raise ParseError(lineno, f"self-loop at node {u}")
                key = link_key(u, v)
                if key in links:
                    raise ParseError(lineno, f"duplicate link {u} {v}")
                for x in key:
                    if x not in nodes:
                        raise ParseError(lineno, f"link references undeclared node {x}")
                links[key] = None
                if len(parts) == 4:
                    explicit[key] = float(parts[3])
            else:
                raise ParseError(lineno, f"unknown record type {kind!r}")
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(lineno, str(exc)) from None
    if area is None:
        raise ParseError(0, "missing 'area' line")
    for u, v in links:
        a, b = nodes[u], nodes[v]
        links[(u, v)] = explicit.get((u, v), math.hypot(b.x - a.x, b.y - a.y))
    return NetworkGraph(nodes, links, area)


def emit_topology(g: NetworkGraph, stream=None) -> str:
    lines = [f"area {g.area.width!r} {g.area.height!r}"]
    for u, p in g.nodes.items():
        lines.append(f"node {u} {p.x!r} {p.y!r}")
    for (u, v), w in g.links.items():
        if w == g.euclidean(u, v):
            lines.append(f"link {u} {v}")
        else:
            lines.append(f"link {u} {v} {w!r}")
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text


def read_topology(path) -> NetworkGraph:
    with open(path) as fh:
        return load_topology(fh)


def write_topology(g: NetworkGraph, path):
    with open(path, "w") as fh:
        emit_topology(g, fh)


# ---------------------------------------------------------------------------
# random generation

def _is_connected(n, edges) -> bool:
    adj = {u: [] for u in range(n)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen, stack = {0}, [0]
    while stack:
        for v in adj[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == n


def _is_biconnected(n, edges) -> bool:
    if n < 3:
        return False
    if not _is_connected(n, edges):
        return False
    import networkx as nx
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(edges)
    return nx.is_biconnected(G)


def generate_random_planar(n: int, m: int, area: DeploymentArea, seed: int,
                           *, biconnected=False, max_retries=200) -> NetworkGraph:
    """Random connected planar graph with ``n`` nodes and ``m`` links.

    Points are uniform in ``area``; the Delaunay triangulation is thinned by
    random link removal that keeps the graph connected (biconnected when
    requested).
    """
    if n < 2:
        raise InfeasibleRequest(f"need at least 2 nodes, got {n}")
    upper = 1 if n == 2 else 3 * n - 6
    if m < n - 1 or m > upper:
        raise InfeasibleRequest(f"m={m} outside [{n - 1}, {upper}] for n={n}")
    if biconnected and (n < 3 or m < n):
        raise InfeasibleRequest(f"no biconnected graph with n={n}, m={m}")

    from scipy.spatial import Delaunay

    rng = np.random.default_rng(seed)
    ok = _is_biconnected if biconnected else (lambda nn, es: _is_connected(nn, es))
    for _ in range(max_retries):
        pts = np.column_stack([rng.uniform(0, area.width, n), rng.uniform(0, area.height, n)])
        if n == 2:
            edges = {(0, 1)}
        else:
            try:
                tri = Delaunay(pts)
            except Exception:
                continue
            if len(tri.coplanar):
                continue
            edges = set()
            for a, b, c in tri.simplices:
                for u, v in ((a, b), (b, c), (a, c)):
                    edges.add(link_key(int(u), int(v)))
        if len(edges) < m:
            continue
        order = sorted(edges)
        rng.shuffle(order)
        current = set(edges)
        for e in order:
            if len(current) == m:
                break
            current.discard(e)
            if not ok(n, current):
                current.add(e)
        if len(current) != m or not ok(n, current):
            continue
        nodes = {i: Point(float(x), float(y)) for i, (x, y) in enumerate(pts)}
        links = {e: math.hypot(*(pts[e[0]] - pts[e[1]])) for e in current}
        try:
            return NetworkGraph(nodes, links, area)
        except InvariantViolation:
            continue
    raise GenerationFailure(f"could not build a planar graph with n={n}, m={m} "
                            f"after {max_retries} attempts")


# ---------------------------------------------------------------------------
# routing

def dijkstra(adj: Mapping, s, weight: Callable, target=None) -> dict:
    """Lexicographic-tie Dijkstra.

    ``weight(u, v)`` returns a link cost or ``math.inf`` to exclude the link.
    Returns {node: (dist, path_tuple)} for all settled nodes (stops early once
    ``target`` is settled).  Among equal-weight paths the lexicographically
    smallest node sequence wins.
    """
    done = {}
    best = {s: (0.0, (s,))}
    heap = [(0.0, (s,))]
    while heap:
        d, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done[u] = (d, path)
        if u == target:
            break
        for v in adj[u]:
            if v in done:
                continue
            w = weight(u, v)
            if w == math.inf:
                continue
            cand = (d + w, path + (v,))
            cur = best.get(v)
            if cur is None or cand < cur:
                best[v] = cand
                heapq.heappush(heap, cand)
    return done


def shortest_path(g: NetworkGraph, s, t, weights: Optional[Mapping] = None):
    """Minimum-weight s-t path as a list of node ids, or None if unreachable.

    ``weights`` maps link keys to costs; links absent from it (or mapped to
    ``math.inf``) are unusable.  Without it, the graph's own weights apply.
    """
    for x in (s, t):
        if x not in g.nodes:
            raise UnknownNode(x)
    w = g.links if weights is None else weights
    res = dijkstra(g.adj, s, lambda a, b: w.get(link_key(a, b), math.inf), target=t)
    if t not in res:
        return None
    return list(res[t][1])


def dijkstra_indexed(adj_idx: Mapping, s, t, wl) -> Optional[tuple]:
    """Same tie-breaking as :func:`dijkstra`, over ``adj_idx[u] = ((v, link_idx), ...)``
    with a flat weight list; returns the s-t path tuple or None."""
    done = set()
    best = {s: (0.0, (s,))}
    heap = [(0.0, (s,))]
    while heap:
        d, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        if u == t:
            return path
        done.add(u)
        for v, j in adj_idx[u]:
            if v in done:
                continue
            w = wl[j]
            if w == math.inf:
                continue
            cand = (d + w, path + (v,))
            cur = best.get(v)
            if cur is None or cand < cur:
                best[v] = cand
                heapq.heappush(heap, cand)
    return None
