"""Controller-side restoration by splicing surviving backup segments.

An escalated demand (s, t) is rebuilt from the pieces of its k backup paths
that survived the failure.  The pieces form a directed multigraph whose
edges carry the topology label they came from; a path through it is
installed as a handful of retagging rules, one wherever the label changes.
Edge weights follow the rerouted load R'_u so that successive requests
spread over lightly used nodes.
"""

from __future__ import annotations

import heapq
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

from .failure import SurvivingGraph


class SpliceError(Exception):
    pass


class Disconnected(SpliceError):
    pass


class NoSplicePath(SpliceError):
    pass


class TooLarge(SpliceError):
    pass


@dataclass
class LoadLedger:
    """P_u: primary paths through u.  R_u: rerouted paths through u."""

    P: Counter = field(default_factory=Counter)
    R: Counter = field(default_factory=Counter)

    @classmethod
    def from_plans(cls, plans) -> "LoadLedger":
        P = Counter()
        for plan in plans.values():
            P.update(set(plan.primary))
        return cls(P, Counter())

    def add_path(self, path):
        self.R.update(set(path))

    def copy(self) -> "LoadLedger":
        return LoadLedger(Counter(self.P), Counter(self.R))


def maximal_load(ledger: LoadLedger, sg: SurvivingGraph) -> int:
    alive = [u for u in sg.base.nodes if sg.node_alive(u)]
    return max((ledger.P[u] + ledger.R[u] for u in alive), default=0)


def splice_weight(ledger: LoadLedger, u, v) -> float:
    return (ledger.R[u] + ledger.R[v]) / 2


class SpliceAction(NamedTuple):
    node: int
    source: int
    dest: int
    topology: int


@dataclass(frozen=True)
class TempSpliceGraph:
    """Directed multigraph: out[u] lists (v, label) in label order."""

    source: int
    dest: int
    out: dict

    @property
    def nodes(self) -> set:
        ns = set(self.out)
        for edges in self.out.values():
            ns.update(v for v, _ in edges)
        return ns

    def labels(self, u, v) -> list:
        return [lab for w, lab in self.out.get(u, ()) if w == v]


def build_temp_graph(sg: SurvivingGraph, plan) -> TempSpliceGraph:
    """Surviving links of every backup path, oriented as the path runs."""
    out = {}
    for i, path in enumerate(plan.backups, 1):
        if path is None:
            continue
        for a, b in zip(path, path[1:]):
            if sg.node_alive(a) and sg.hop_alive(a, b):
                edges = out.setdefault(a, [])
                if (b, i) not in edges:
                    edges.append((b, i))
    for edges in out.values():
        edges.sort(key=lambda e: (e[1], e[0]))
    return TempSpliceGraph(plan.source, plan.dest, out)


def _best_path(tg: TempSpliceGraph, weight):
    """Lightest s-t node path; ties on hop count, then node sequence."""
    s, t = tg.source, tg.dest
    heap = [(0.0, 0, (s,))]
    done = set()
    while heap:
        d, h, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == t:
            return path
        for v in sorted({v for v, _ in tg.out.get(u, ())}):
            if v not in done:
                heapq.heappush(heap, (d + weight(u, v), h + 1, path + (v,)))
    return None


def assign_labels(tg: TempSpliceGraph, path) -> list:
    """Topology label per hop with the fewest switches (longest run first,
    smallest label on ties)."""
    avail = [set(tg.labels(a, b)) for a, b in zip(path, path[1:])]
    labels = []
    j = 0
    while j < len(avail):
        best, reach = None, -1
        for lab in sorted(avail[j]):
            r = j
            while r < len(avail) and lab in avail[r]:
                r += 1
            if r > reach:
                best, reach = lab, r
        labels.extend([best] * (reach - j))
        j = reach
    return labels


def actions_for(tg: TempSpliceGraph, path) -> list:
    labels = assign_labels(tg, path)
    acts = []
    for j, lab in enumerate(labels):
        if j == 0 or lab != labels[j - 1]:
            acts.append(SpliceAction(path[j], tg.source, tg.dest, lab))
    return acts


@dataclass(frozen=True)
class SpliceResult:
    actions: list
    path: tuple

    def action_map(self) -> dict:
        return {a.node: a.topology for a in self.actions}


def _splice(sg, plans, s, t, weight):
    if not (sg.node_alive(s) and sg.node_alive(t) and sg.connected(s, t)):
        raise Disconnected(f"{s} and {t} are physically separated")
    tg = build_temp_graph(sg, plans[(s, t)])
    path = _best_path(tg, weight)
    if path is None:
        raise NoSplicePath(f"no spliced path for {s}->{t}")
    return SpliceResult(actions_for(tg, path), path)


def splice(sg: SurvivingGraph, plans, ledger: LoadLedger, s, t) -> SpliceResult:
    """Load-aware splice; on success every node of the path gains one R'."""
    res = _splice(sg, plans, s, t, lambda u, v: splice_weight(ledger, u, v))
    ledger.add_path(res.path)
    return res


def shortest_splice(sg: SurvivingGraph, plans, ledger: LoadLedger, s, t) -> SpliceResult:
    """Fewest-hop splice; the ledger is updated but never consulted."""
    res = _splice(sg, plans, s, t, lambda u, v: 1.0)
    ledger.add_path(res.path)
    return res


def format_splice(s, t, status, n_actions, ml) -> str:
    return f"splice {s} {t} {status} {n_actions} {ml}"


# ---------------------------------------------------------------------------
# exhaustive min-max assignment (stands in for the ILP)

def simple_paths(tg: TempSpliceGraph) -> list:
    s, t = tg.source, tg.dest
    out = []

    def walk(path, seen):
        u = path[-1]
        if u == t:
            out.append(tuple(path))
            return
        for v in sorted({v for v, _ in tg.out.get(u, ())}):
            if v not in seen:
                seen.add(v)
                path.append(v)
                walk(path, seen)
                path.pop()
                seen.discard(v)

    walk([s], {s})
    return out


@dataclass(frozen=True)
class OracleResult:
    ml: int
    assignment: dict  # (s, t) -> path


def minmax_oracle(sg: SurvivingGraph, plans, requests, base: LoadLedger,
                  limit=10 ** 6) -> OracleResult:
    """Joint choice of splice paths minimising the maximal load.

    ``base`` holds P and the local reroutes; requests without any splice
    path are left out, as the greedy leaves them out too.
    """
    cands = []
    for s, t in requests:
        if not (sg.node_alive(s) and sg.node_alive(t) and sg.connected(s, t)):
            continue
        ps = simple_paths(build_temp_graph(sg, plans[(s, t)]))
        if ps:
            cands.append(((s, t), ps))
    if math.prod(len(ps) for _, ps in cands) > limit:
        raise TooLarge("too many joint splice choices for exhaustive search")

    alive = [u for u in sg.base.nodes if sg.node_alive(u)]
    load = {u: base.P[u] + base.R[u] for u in alive}
    floor = max(load.values(), default=0)
    # most constrained requests first prunes earlier
    cands.sort(key=lambda c: len(c[1]))
    best = [math.inf, None]
    chosen = [None] * len(cands)

    def place(j, cur):
        if cur >= best[0]:
            return
        if j == len(cands):
            best[0], best[1] = cur, list(chosen)
            return
        for p in cands[j][1]:
            for u in p:
                load[u] += 1
            chosen[j] = p
            place(j + 1, max(cur, max(load[u] for u in p)))
            for u in p:
                load[u] -= 1
            if best[0] == floor:
                return

    place(0, floor)
    assignment = {cands[j][0]: best[1][j] for j in range(len(cands))} if cands else {}
    return OracleResult(int(best[0]) if cands else floor, assignment)


def greedy_ml(sg, plans, requests, base: LoadLedger, method=splice) -> int:
    """ML after serving ``requests`` in order with ``method``."""
    ledger = base.copy()
    for s, t in requests:
        try:
            method(sg, plans, ledger, s, t)
        except SpliceError:
            pass
    return maximal_load(ledger, sg)
