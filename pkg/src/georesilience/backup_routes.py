"""Geography-aware backup route generation.

For a demand (s, t) the primary is the shortest path in the base graph.  In
backup topology ``i`` every usable link whose vulnerable zone at radius
``r_i`` meets the primary's zone at ``r_i`` is priced out with a penalty
weight before the backup path is computed, so backups drift away from the
area that can take down the primary.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import EPS, VulnerableZone, segment_distance_matrix, zones_intersect
from .mrc import BackupTopologySet, LinkState
from .topology import NetworkGraph, UnknownNode, dijkstra, dijkstra_indexed, link_key


class InvalidRange(ValueError):
    pass


@dataclass(frozen=True)
class RadiusSchedule:
    r_a: float
    r_b: float
    k: int
    values: tuple


def radius_schedule(r_a: float, r_b: float, k: int) -> RadiusSchedule:
    if not (0 < r_a <= r_b):
        raise InvalidRange(f"need 0 < r_a <= r_b, got [{r_a}, {r_b}]")
    if k < 1:
        raise InvalidRange(f"k must be >= 1, got {k}")
    if k == 1:
        values = (float(r_a),)
    else:
        step = (r_b - r_a) / (k - 1)
        values = tuple(r_a + (i - 1) * step for i in range(1, k + 1))
    return RadiusSchedule(float(r_a), float(r_b), k, values)


@dataclass(frozen=True)
class RoutePlan:
    source: int
    dest: int
    primary: tuple
    backups: tuple  # index i-1 holds the path in topology i, or None

    def path(self, i) -> Optional[tuple]:
        """Path in topology ``i``; 0 is the primary."""
        return self.primary if i == 0 else self.backups[i - 1]


def penalty_weight(g: NetworkGraph, k: int) -> float:
    """Exceeds the weight of any simple path made of unpenalized links."""
    return len(g.links) * max(g.links.values()) * k + 1.0


def penalized_restricted_weight(g: NetworkGraph, k: int) -> float:
    # restricted links must stay dearer than any mix of penalized/normal links,
    # otherwise penalties would push backups through isolated nodes
    return len(g.links) * penalty_weight(g, k) + 1.0


def topology_weights(bts: BackupTopologySet, i: int, penalized=None) -> dict:
    """Link weights of topology ``i``.

    ``penalized=None`` gives plain MRC weights.  Otherwise the given links
    get the penalty weight, taking the maximum with any restricted weight,
    and restricted links move to a scale above every penalized path.
    """
    g = bts.base
    topo = bts[i]
    if penalized is None:
        return topo.weights(g, bts.restricted_weight)
    pen = penalty_weight(g, bts.k)
    res = penalized_restricted_weight(g, bts.k)
    pen_set = set(penalized)
    out = {}
    for e, w in g.links.items():
        st = topo.state(*e)
        if st is LinkState.ISOLATED:
            continue
        if st is LinkState.RESTRICTED:
            out[e] = max(res, pen) if e in pen_set else res
        else:
            out[e] = pen if e in pen_set else w
    return out


def _route(g: NetworkGraph, weights: dict, s, t):
    res = dijkstra(g.adj, s, lambda a, b: weights.get(link_key(a, b), math.inf), target=t)
    return res[t][1] if t in res else None


def generate_backup_routes(g: NetworkGraph, bts: BackupTopologySet, s, t,
                           schedule: Optional[RadiusSchedule], penalize=True) -> RoutePlan:
    """Route plan for one demand.  ``penalize=False`` gives plain MRC routes."""
    for x in (s, t):
        if x not in g.nodes:
            raise UnknownNode(x)
    if s == t:
        raise ValueError("source and destination must differ")
    res = dijkstra(g.adj, s, lambda a, b: g.links[link_key(a, b)], target=t)
    primary = res[t][1]
    backups = []
    for i in range(1, bts.k + 1):
        pen = None
        if penalize:
            r = schedule.values[i - 1]
            pz = VulnerableZone.of_path([g.nodes[u] for u in primary], r)
            pen = [e for e in g.links
                   if bts[i].state(*e) is not LinkState.ISOLATED
                   and zones_intersect(VulnerableZone.of_link(g.segment(*e), r), pz)]
        backups.append(_route(g, topology_weights(bts, i, pen), s, t))
    return RoutePlan(s, t, primary, tuple(backups))


def all_pairs(g: NetworkGraph):
    nodes = list(g.nodes)
    return [(s, t) for i, s in enumerate(nodes) for t in nodes[i + 1:]]


def plan_all_pairs(g: NetworkGraph, bts: BackupTopologySet, schedule: Optional[RadiusSchedule],
                   penalize=True, demands=None) -> dict:
    """RoutePlan for every demand, keyed by (s, t).

    Same result as calling :func:`generate_backup_routes` per pair, with the
    zone tests done on a precomputed link-to-link distance matrix.
    """
    demands = all_pairs(g) if demands is None else list(demands)
    links = g.link_list
    idx = g.link_index
    adj_idx = {u: tuple((v, idx[link_key(u, v)]) for v in vs) for u, vs in g.adj.items()}
    pen_w = penalty_weight(g, bts.k)
    res_pen = penalized_restricted_weight(g, bts.k)

    plain, normal_mask, restricted_w = [], [], []
    for i in range(1, bts.k + 1):
        w_plain, is_normal, w_res = [], [], []
        for e in links:
            st = bts[i].state(*e)
            if st is LinkState.ISOLATED:
                w_plain.append(math.inf)
                w_res.append(math.inf)
            elif st is LinkState.RESTRICTED:
                w_plain.append(bts.restricted_weight)
                w_res.append(res_pen)
            else:
                w_plain.append(g.links[e])
                w_res.append(None)
            is_normal.append(st is LinkState.NORMAL)
        plain.append(w_plain)
        normal_mask.append(np.array(is_normal))
        restricted_w.append(w_res)

    if penalize:
        D = segment_distance_matrix(g.segment_array(), g.segment_array())
        reach = [2 * r + EPS for r in schedule.values]

    trees = {}
    plans = {}
    for s, t in demands:
        if s not in trees:
            trees[s] = dijkstra(g.adj, s, lambda a, b: g.links[link_key(a, b)])
        primary = trees[s][t][1]
        backups = []
        if penalize:
            pidx = [idx[link_key(a, b)] for a, b in zip(primary, primary[1:])]
            dmin = D[:, pidx].min(axis=1)
        for i in range(bts.k):
            if penalize:
                hit = (dmin <= reach[i]) & normal_mask[i]
                wl = [pen_w if h else (wr if wr is not None else wp)
                      for h, wp, wr in zip(hit.tolist(), plain[i], restricted_w[i])]
            else:
                wl = plain[i]
            backups.append(dijkstra_indexed(adj_idx, s, t, wl))
        plans[(s, t)] = RoutePlan(s, t, primary, tuple(backups))
    return plans


# ---------------------------------------------------------------------------
# text format

def emit_plans(plans, stream=None) -> str:
    lines = []
    for (s, t), plan in sorted(plans.items()):
        lines.append(f"route {s} {t} 0 " + " ".join(map(str, plan.primary)))
        for i, p in enumerate(plan.backups, 1):
            if p is not None:
                lines.append(f"route {s} {t} {i} " + " ".join(map(str, p)))
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text


def load_plans(source, k: int) -> dict:
    if isinstance(source, str):
        source = io.StringIO(source)
    raw = {}
    for line in source:
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "route":
            raise ValueError(f"not a route record: {line!r}")
        s, t, i = int(parts[1]), int(parts[2]), int(parts[3])
        raw.setdefault((s, t), {})[i] = tuple(int(x) for x in parts[4:])
    return {(s, t): RoutePlan(s, t, d[0], tuple(d.get(i) for i in range(1, k + 1)))
            for (s, t), d in sorted(raw.items())}
