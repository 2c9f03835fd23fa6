"""Multiple routing configurations: backup topologies with isolated nodes.

In backup topology ``G_i`` every link is Normal, Restricted or Isolated.
An isolated node has only Restricted/Isolated links; Restricted links join
an isolated node to the backbone (non-isolated nodes over Normal links) and
are priced so they never carry transit traffic; Isolated links are removed.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .topology import NetworkGraph, link_key


class MRCError(Exception):
    pass


class InfeasibleK(MRCError):
    pass


class NotBiconnected(MRCError):
    pass


class LinkState(enum.Enum):
    NORMAL = "normal"
    RESTRICTED = "restricted"
    ISOLATED = "isolated"


@dataclass(frozen=True)
class BackupTopology:
    index: int
    link_state: dict
    isolated_nodes: frozenset

    def state(self, u, v) -> LinkState:
        return self.link_state.get(link_key(u, v), LinkState.NORMAL)

    def weights(self, g: NetworkGraph, restricted_weight: float) -> dict:
        """Routing weights; Isolated links are left out."""
        out = {}
        for e, w in g.links.items():
            st = self.link_state.get(e, LinkState.NORMAL)
            if st is LinkState.NORMAL:
                out[e] = w
            elif st is LinkState.RESTRICTED:
                out[e] = restricted_weight
        return out


@dataclass(frozen=True)
class BackupTopologySet:
    topologies: tuple
    base: NetworkGraph

    @property
    def k(self) -> int:
        return len(self.topologies)

    def __getitem__(self, i) -> BackupTopology:
        """1-based access, matching topology indices."""
        return self.topologies[i - 1]

    @property
    def restricted_weight(self) -> float:
        return sum(self.base.links.values()) + 1.0

    def weights(self, i) -> dict:
        return self[i].weights(self.base, self.restricted_weight)


class Violation(NamedTuple):
    constraint: str
    element: object
    topology: Optional[int]


def verify_mrc_constraints(bts: BackupTopologySet) -> list:
    """Every violated (constraint, element, topology) triple; empty iff valid.

    Constraints: "1" every node and link isolated in some topology; "2" a link
    is only ever Isolated next to an isolated endpoint; "3" the backbone of
    each topology is connected and every isolated node keeps a Restricted
    link into it.  "state" flags link states inconsistent with the node
    isolation (Normal link at an isolated node, Restricted link not joining
    exactly one isolated node).
    """
    g = bts.base
    report = []
    node_iso = {u: False for u in g.nodes}
    link_iso = {e: False for e in g.links}
    for topo in bts.topologies:
        i = topo.index
        iso = topo.isolated_nodes
        for u in iso:
            if u in node_iso:
                node_iso[u] = True
        for e in g.links:
            st = topo.state(*e)
            n_iso = (e[0] in iso) + (e[1] in iso)
            if st is LinkState.ISOLATED:
                link_iso[e] = True
                if n_iso == 0:
                    report.append(Violation("2", e, i))
            elif st is LinkState.RESTRICTED:
                if n_iso != 1:
                    report.append(Violation("state", e, i))
            elif n_iso:
                report.append(Violation("state", e, i))

        backbone = [u for u in g.nodes if u not in iso]
        if not backbone:
            report.append(Violation("3", None, i))
            continue
        seen, stack = {backbone[0]}, [backbone[0]]
        while stack:
            u = stack.pop()
            for v in g.adj[u]:
                if v not in seen and v not in iso and topo.state(u, v) is LinkState.NORMAL:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != len(backbone):
            report.append(Violation("3", None, i))
        for u in sorted(iso):
            if not any(topo.state(u, v) is LinkState.RESTRICTED and v not in iso
                       for v in g.adj[u]):
                report.append(Violation("3", u, i))

    report.extend(Violation("1", u, None) for u, ok in node_iso.items() if not ok)
    report.extend(Violation("1", e, None) for e, ok in link_iso.items() if not ok)
    return report


def _biconnected(g: NetworkGraph) -> bool:
    import networkx as nx
    G = nx.Graph()
    G.add_nodes_from(g.nodes)
    G.add_edges_from(g.links)
    return len(g.nodes) >= 3 and nx.is_biconnected(G)


def _backbone_connected(g, iso) -> bool:
    # backbone links are exactly the links between non-isolated nodes
    backbone = [u for u in g.nodes if u not in iso]
    if not backbone:
        return False
    seen, stack = {backbone[0]}, [backbone[0]]
    while stack:
        u = stack.pop()
        for v in g.adj[u]:
            if v not in seen and v not in iso:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(backbone)


def _can_isolate(g, iso, v) -> bool:
    new_iso = iso | {v}
    if not _backbone_connected(g, new_iso):
        return False
    # v and its isolated neighbours each need a link into the backbone
    return all(any(x not in new_iso for x in g.adj[u])
               for u in [v, *(u for u in g.adj[v] if u in iso)])


def _choose_anchors(g, color):
    """One restricted link per node, into another colour, no link chosen by
    both of its endpoints (such a link would be isolated nowhere).

    Nodes must get pairwise distinct cross-colour links, which is possible
    iff every component of the cross-colour graph holds a cycle: drop one
    cycle link (x, y), anchor x on y and every other node on its parent in
    a BFS tree rooted at x.
    """
    cross = {u: [v for v in g.adj[u] if color[v] != color[u]] for u in g.nodes}
    anchor = {}
    seen = set()
    for root in g.nodes:
        if root in seen:
            continue
        comp, order = {root}, [root]
        for u in order:
            for v in cross[u]:
                if v not in comp:
                    comp.add(v)
                    order.append(v)
        seen |= comp
        if sum(len(cross[u]) for u in comp) // 2 < len(comp):
            return None
        # a link outside one spanning tree lies on a cycle
        parent = {root: None}
        extra = None
        for u in order:
            for v in cross[u]:
                if v not in parent:
                    parent[v] = u
                elif extra is None and parent[u] != v and parent[v] != u:
                    extra = (u, v)
        x, y = extra
        anchor[x] = y
        parent = {x: None}
        queue = [x]
        for u in queue:
            for v in cross[u]:
                if v not in parent and {u, v} != {x, y}:
                    parent[v] = u
                    anchor[v] = u
                    queue.append(v)
    return anchor


def _search(g, k, order, budget):
    """Depth-first node-to-topology assignment; (isos, anchor), False when
    the space is exhausted, None when the budget runs out."""
    # stack frames: (node position, isolated sets, round-robin start, next attempt)
    stack = [(0, tuple(frozenset() for _ in range(k)), 0, 0)]
    steps = 0
    while stack:
        pos, isos, ptr, attempt = stack.pop()
        if pos == len(order):
            color = {u: i for i, iso in enumerate(isos) for u in iso}
            anchor = _choose_anchors(g, color)
            if anchor is not None:
                return isos, anchor
            continue
        if attempt >= k:
            continue
        steps += 1
        if steps > budget:
            return None
        stack.append((pos, isos, ptr, attempt + 1))
        i = (ptr + attempt) % k
        if _can_isolate(g, isos[i], order[pos]):
            nisos = isos[:i] + (isos[i] | {order[pos]},) + isos[i + 1:]
            stack.append((pos + 1, nisos, (i + 1) % k, 0))
    return False


def generate_backup_topologies(g: NetworkGraph, k: int, max_steps=200_000,
                               restart_steps=2_000) -> BackupTopologySet:
    """Assign every node to exactly one topology, then pick restricted links.

    Nodes are taken in increasing id order and tried on topologies
    round-robin from the one after the previous success; a node fits when
    the backbone stays connected and every isolated node keeps a backbone
    neighbour.  Dead ends are revisited depth-first.  Each isolated node
    then keeps one Restricted link, chosen so that no link is the
    Restricted link of both its endpoints; all other links at isolated
    nodes are Isolated.

    A pass that spends ``restart_steps`` without success is restarted with
    the nodes in a seeded random order; :class:`InfeasibleK` is raised once
    ``max_steps`` are spent in total, or when the first pass exhausts the
    search space.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not _biconnected(g):
        raise NotBiconnected("backup topologies need a biconnected graph")
    if k == 1:
        raise InfeasibleK("k=1 would leave an empty backbone")
    order = list(g.nodes)
    rng = np.random.default_rng(k)
    spent = 0
    while True:
        budget = min(restart_steps, max_steps - spent)
        found = _search(g, k, order, budget)
        if found is False:
            raise InfeasibleK(f"no assignment isolating each node once exists for k={k}")
        if found is not None:
            break
        spent += budget
        if spent >= max_steps:
            raise InfeasibleK(f"no valid assignment found for k={k} within {max_steps} steps")
        order = [order[i] for i in rng.permutation(len(order))]

    isos, anchor = found
    topos = []
    for i, iso in enumerate(isos):
        st = {}
        for u in iso:
            for v in g.adj[u]:
                st[link_key(u, v)] = (LinkState.RESTRICTED if anchor[u] == v
                                      else LinkState.ISOLATED)
        topos.append(BackupTopology(i + 1, dict(sorted(st.items())), frozenset(iso)))
    bts = BackupTopologySet(tuple(topos), g)
    bad = verify_mrc_constraints(bts)
    if bad:
        raise InfeasibleK(f"construction left violations: {bad[:5]}")
    return bts


def select_backup_topology(bts: BackupTopologySet, failed_next_hop, detecting_node,
                           destination=None) -> int:
    """Topology to tag with when ``detecting_node`` loses ``failed_next_hop``.

    The packet cannot tell a dead link from a dead neighbour, so the choice
    is the smallest topology isolating the neighbour: there the neighbour
    carries no transit and the failed link is never on a route.  When the
    neighbour is the destination itself, the smallest topology isolating the
    link is used instead.
    """
    u = detecting_node
    a, b = failed_next_hop
    if u not in (a, b):
        raise ValueError(f"link {failed_next_hop} is not incident to node {u}")
    v = b if a == u else a
    e = link_key(a, b)
    if destination is None or destination != v:
        for topo in bts.topologies:
            if v in topo.isolated_nodes:
                return topo.index
    for topo in bts.topologies:
        if topo.state(*e) is LinkState.ISOLATED:
            return topo.index
    raise MRCError(f"link {e} is isolated in no backup topology")


# ---------------------------------------------------------------------------
# text format

def emit_backups(bts: BackupTopologySet, stream=None) -> str:
    lines = []
    for topo in bts.topologies:
        lines.append(f"topology {topo.index}")
        for u in sorted(topo.isolated_nodes):
            lines.append(f"isolated-node {u}")
        for (u, v), st in sorted(topo.link_state.items()):
            if st is LinkState.RESTRICTED:
                lines.append(f"restricted {u} {v}")
        for (u, v), st in sorted(topo.link_state.items()):
            if st is LinkState.ISOLATED:
                lines.append(f"isolated {u} {v}")
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text


def load_backups(source, g: NetworkGraph) -> BackupTopologySet:
    if isinstance(source, str):
        source = io.StringIO(source)
    topos, cur = [], None
    for lineno, raw in enumerate(source, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "topology":
            cur = (int(parts[1]), set(), {})
            if cur[0] != len(topos) + 1:
                raise ValueError(f"line {lineno}: topologies must be numbered 1..k in order")
            topos.append(cur)
            continue
        if cur is None:
            raise ValueError(f"line {lineno}: record before any 'topology' line")
        if kind == "isolated-node":
            cur[1].add(int(parts[1]))
        elif kind in ("restricted", "isolated"):
            e = link_key(int(parts[1]), int(parts[2]))
            if e not in g.links:
                raise ValueError(f"line {lineno}: unknown link {e}")
            cur[2][e] = LinkState(kind)
        else:
            raise ValueError(f"line {lineno}: unknown record type {kind!r}")
    return BackupTopologySet(
        tuple(BackupTopology(i, dict(sorted(st.items())), frozenset(iso)) for i, iso, st in topos),
        g)
