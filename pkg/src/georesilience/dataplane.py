"""Abstract per-switch pipeline: clean/dirty packets and fast failover.

Every switch holds table T_0 (primary next hop per destination) and tables
T_1..T_k, one per backup topology.  A backup table has flow entries for
the (s, t) pairs whose backup path y^i_st crosses the switch, and
destination defaults from plain shortest paths in G_i for packets tagged
off that path.  The group table pairs each primary next hop with the tag
used when its port is down.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .failure import SurvivingGraph
from .mrc import BackupTopologySet, select_backup_topology
from .topology import NetworkGraph, dijkstra, link_key


class InconsistentPlan(ValueError):
    pass


class Outcome(enum.Enum):
    DELIVERED_PRIMARY = "primary"
    DELIVERED_LOCAL = "local"
    DELIVERED_SPLICED = "spliced"
    ESCALATED = "escalated"
    NON_RECOVERABLE = "nonrecoverable"


@dataclass(frozen=True)
class FlowOutcome:
    source: int
    dest: int
    kind: Outcome
    path: tuple
    tag: Optional[int] = None  # topology carried at delivery or escalation
    at: Optional[int] = None   # escalating node

    @property
    def delivered(self) -> bool:
        return self.kind in (Outcome.DELIVERED_PRIMARY, Outcome.DELIVERED_LOCAL,
                             Outcome.DELIVERED_SPLICED)

    @property
    def rerouted(self) -> bool:
        return self.kind in (Outcome.DELIVERED_LOCAL, Outcome.DELIVERED_SPLICED)


@dataclass
class SwitchState:
    node: int
    tables: list                                    # tables[i]: destination -> next hop
    flows: list                                     # flows[i]: (s, t) -> next hop, i >= 1
    group: dict = field(default_factory=dict)       # destination -> (primary hop, tag)

    def next_hop(self, i, s, t):
        if i == 0:
            return self.tables[0].get(t)
        nh = self.flows[i].get((s, t))
        return nh if nh is not None else self.tables[i].get(t)


@dataclass
class Packet:
    source: int
    dest: int
    tag: Optional[int] = None
    trace: list = field(default_factory=list)


def _check_path(g, path, what):
    for a, b in zip(path, path[1:]):
        if not g.has_link(a, b):
            raise InconsistentPlan(f"{what}: hop {a}->{b} is not a link")


def install_routes(plans: dict, bts: BackupTopologySet) -> dict:
    """Switch state for every node from an all-pairs RoutePlan table."""
    g = bts.base
    k = bts.k
    sw = {u: SwitchState(u, [{} for _ in range(k + 1)], [{} for _ in range(k + 1)])
          for u in g.nodes}
    dests = set()
    for (s, t), plan in plans.items():
        _check_path(g, plan.primary, f"primary {s}->{t}")
        dests.add(t)
        for a, b in zip(plan.primary, plan.primary[1:]):
            prev = sw[a].tables[0].setdefault(t, b)
            if prev != b:
                raise InconsistentPlan(f"primaries toward {t} disagree at {a}: {prev} vs {b}")
        for i, path in enumerate(plan.backups, 1):
            if path is None:
                continue
            _check_path(g, path, f"backup {i} {s}->{t}")
            for a, b in zip(path, path[1:]):
                sw[a].flows[i][(s, t)] = b

    for i in range(1, k + 1):
        w = bts.weights(i)
        for t in sorted(dests):
            tree = dijkstra(g.adj, t, lambda a, b: w.get(link_key(a, b), math.inf))
            for u, (_, p) in tree.items():
                if u != t:
                    sw[u].tables[i][t] = p[-2]

    for u, st in sw.items():
        for t, nh in st.tables[0].items():
            st.group[t] = (nh, select_backup_topology(bts, (u, nh), u, t))
    return sw


def simulate_flow(switches: dict, sg: SurvivingGraph, s, t, actions=None) -> FlowOutcome:
    """Walk one packet from s to t through the surviving network.

    ``actions`` maps node -> topology index; on reaching such a node the
    packet is retagged (controller-installed splice rules).
    """
    if not (sg.node_alive(s) and sg.node_alive(t) and sg.connected(s, t)):
        return FlowOutcome(s, t, Outcome.NON_RECOVERABLE, (s,))
    pkt = Packet(s, t, None, [s])
    limit = 2 * len(sg.base.nodes)
    spliced = False
    u = s
    while u != t:
        if len(pkt.trace) > limit:
            return FlowOutcome(s, t, Outcome.ESCALATED, tuple(pkt.trace), pkt.tag, u)
        sw = switches[u]
        if actions and u in actions:
            pkt.tag = actions[u]
            spliced = True
        if pkt.tag is None:
            nh, backup = sw.group.get(t, (None, None))
            if nh is None:
                return FlowOutcome(s, t, Outcome.ESCALATED, tuple(pkt.trace), None, u)
            if sg.hop_alive(u, nh):
                pkt.trace.append(nh)
                u = nh
                continue
            pkt.tag = backup
        nh = sw.next_hop(pkt.tag, s, t)
        if nh is None or not sg.hop_alive(u, nh):
            return FlowOutcome(s, t, Outcome.ESCALATED, tuple(pkt.trace), pkt.tag, u)
        pkt.trace.append(nh)
        u = nh
    if spliced:
        kind = Outcome.DELIVERED_SPLICED
    elif pkt.tag is None:
        kind = Outcome.DELIVERED_PRIMARY
    else:
        kind = Outcome.DELIVERED_LOCAL
    return FlowOutcome(s, t, kind, tuple(pkt.trace), pkt.tag)


def primary_intact(path, sg: SurvivingGraph) -> bool:
    return all(sg.hop_alive(a, b) for a, b in zip(path, path[1:])) and sg.node_alive(path[0])


def format_flow(o: FlowOutcome) -> str:
    label = o.kind.value
    if o.kind is Outcome.DELIVERED_LOCAL:
        label = f"local:{o.tag}"
    elif o.kind is Outcome.ESCALATED:
        label = f"escalated:{o.at}:{o.tag}"
    return f"flow {o.source} {o.dest} {label} " + " ".join(map(str, o.path))


# ---------------------------------------------------------------------------
# Path Splicing baseline: perturbed slices, random slice switch on failure

@dataclass(frozen=True)
class SliceTables:
    k: int
    next_hop: tuple  # next_hop[c][u][t]


def build_slice_tables(g: NetworkGraph, slice_weights) -> SliceTables:
    tables = []
    for w in slice_weights:
        nh = {u: {} for u in g.nodes}
        for t in g.nodes:
            tree = dijkstra(g.adj, t, lambda a, b: w[link_key(a, b)])
            for u, (_, p) in tree.items():
                if u != t:
                    nh[u][t] = p[-2]
        tables.append(nh)
    return SliceTables(len(tables), tuple(tables))


def simulate_splicing_flow(st: SliceTables, sg: SurvivingGraph, s, t,
                           rng: np.random.Generator) -> FlowOutcome:
    """Slice 0 first; each dead port moves the packet to a random other slice,
    at most ``k`` times.  There is no controller: running out is a loss."""
    if not (sg.node_alive(s) and sg.node_alive(t) and sg.connected(s, t)):
        return FlowOutcome(s, t, Outcome.NON_RECOVERABLE, (s,))
    limit = 2 * len(sg.base.nodes)
    trace = [s]
    cur, switches = 0, 0
    u = s
    while u != t:
        if len(trace) > limit:
            return FlowOutcome(s, t, Outcome.ESCALATED, tuple(trace), cur, u)
        nh = st.next_hop[cur][u][t]
        if sg.hop_alive(u, nh):
            trace.append(nh)
            u = nh
            continue
        if switches >= st.k or st.k == 1:
            return FlowOutcome(s, t, Outcome.ESCALATED, tuple(trace), cur, u)
        switches += 1
        others = [c for c in range(st.k) if c != cur]
        cur = others[int(rng.integers(len(others)))]
    kind = Outcome.DELIVERED_PRIMARY if switches == 0 else Outcome.DELIVERED_LOCAL
    return FlowOutcome(s, t, kind, tuple(trace), cur if switches else None)
