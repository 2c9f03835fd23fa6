"""Bundled example networks."""

import math
from importlib import resources

from .mrc import BackupTopologySet, load_backups
from .topology import NetworkGraph, load_topology


def _text(name):
    return resources.files(__package__).joinpath("data").joinpath(name).read_text()


def fig3_graph() -> NetworkGraph:
    """Eight-node example network (see data/fig3.topo for the layout)."""
    return load_topology(_text("fig3.topo"))


def fig3_backups(g: NetworkGraph = None) -> BackupTopologySet:
    """Three hand-built backup topologies matching the example routes."""
    return load_backups(_text("fig3.backups"), g or fig3_graph())


def random50_graph() -> NetworkGraph:
    """Sample 50-node / 120-link random planar network in a 1200x1200 area."""
    return load_topology(_text("random50.topo"))


# Splicing example: two s-t paths p1 = s-a-e-d-t and p2 = s-c-e-b-t, with
# links a-e and e-b destroyed.  Ids: s=1 a=2 c=3 e=4 b=5 d=6 t=7.
FIG5_NODES = {1: (0.0, 300.0), 2: (300.0, 500.0), 3: (300.0, 100.0), 4: (600.0, 300.0),
              5: (900.0, 100.0), 6: (900.0, 500.0), 7: (1200.0, 300.0)}
FIG5_P1 = (1, 2, 4, 6, 7)
FIG5_P2 = (1, 3, 4, 5, 7)
FIG5_DEAD_LINKS = ((2, 4), (4, 5))


def fig5_scenario():
    """(graph, plans, surviving graph) for the splicing example."""
    from .backup_routes import RoutePlan
    from .failure import surviving_graph
    from .geometry import Point
    from .topology import DeploymentArea, link_key

    nodes = {u: Point(*xy) for u, xy in FIG5_NODES.items()}
    links = {}
    for p in (FIG5_P1, FIG5_P2):
        for a, b in zip(p, p[1:]):
            e = link_key(a, b)
            links[e] = math.dist(nodes[a], nodes[b])
    g = NetworkGraph(nodes, links, DeploymentArea(1200.0, 600.0))
    plans = {(1, 7): RoutePlan(1, 7, FIG5_P1, (FIG5_P1, FIG5_P2))}
    return g, plans, surviving_graph(g, dead_links=FIG5_DEAD_LINKS)
