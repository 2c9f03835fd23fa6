"""Monte Carlo harness: sample disk failures, run every demand through a
recovery scheme, and tabulate recovery ratio, controller overhead, stretch
and maximal load.

Schemes:
  SDN-FRRD      zone-penalised backups, local reroute, then splicing
  SDN-MRC       plain MRC backups, local reroute, then splicing
  MRC           plain MRC backups, local reroute only
  PathSplicing  perturbed slices with random slice switching, no controller
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .backup_routes import all_pairs, plan_all_pairs, radius_schedule
from .controller import (LoadLedger, SpliceError, TooLarge, format_splice, greedy_ml,
                         maximal_load, minmax_oracle, shortest_splice, splice)
from .dataplane import (FlowOutcome, Outcome, build_slice_tables, install_routes,
                        primary_intact, simulate_flow, simulate_splicing_flow)
from .failure import (RadiusDistribution, RegionalFailure, apply_failure, format_failure,
                      parse_failure, sample_failure)
from .geometry import Point
from .mrc import generate_backup_topologies
from .topology import (DeploymentArea, NetworkGraph, dijkstra, generate_random_planar,
                       link_key, read_topology)

SCHEMES = ("SDN-FRRD", "SDN-MRC", "MRC", "PathSplicing")

CSV_COLUMNS = ("scheme", "topology", "k", "radius", "trial", "recoverable", "recovered",
               "locally_recovered", "escalated", "spliced_ok", "unspliceable",
               "recovery_ratio", "controller_overhead", "ml", "stretch_p50", "stretch_p90")


class ConfigError(ValueError):
    pass


class UndefinedRatio(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class ExperimentConfig:
    topology: str = "random50"
    k_values: tuple = (6,)
    radii: tuple = (50.0,)                     # fixed radius per sweep point
    radius_dist: Optional[RadiusDistribution] = None  # used instead when set
    trials: int = 300
    seed: int = 1
    schemes: tuple = ("SDN-FRRD",)
    r_a: float = 50.0
    r_b: float = 150.0

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}; choose from {', '.join(SCHEMES)}")
        if not self.k_values or min(self.k_values) < 1:
            raise ConfigError("k values must be >= 1")
        if self.radius_dist is None and not self.radii:
            raise ConfigError("need a radius list or a radius distribution")

    @property
    def sweep_radii(self) -> tuple:
        return (None,) if self.radius_dist is not None else self.radii


def _int_list(text):
    out = []
    for part in text.replace(" ", "").split(","):
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return tuple(out)


def parse_config(text: str) -> ExperimentConfig:
    """``key = value`` lines; '#' starts a comment.

    Keys: topology, k (``6..15`` or ``3,6,9``), radius (list), radius_dist
    (``r_min r_max alpha``), trials, seed, scheme (list), r_a, r_b.
    """
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (x.strip() for x in line.split("=", 1))
        try:
            if key == "topology":
                kw["topology"] = val
            elif key == "k":
                kw["k_values"] = _int_list(val)
            elif key == "radius":
                kw["radii"] = tuple(float(x) for x in val.replace(" ", "").split(",") if x)
            elif key == "radius_dist":
                a, b, alpha = (float(x) for x in val.split())
                kw["radius_dist"] = RadiusDistribution(a, b, alpha)
            elif key == "trials":
                kw["trials"] = int(val)
            elif key == "seed":
                kw["seed"] = int(val)
            elif key == "scheme":
                kw["schemes"] = tuple(x.strip() for x in val.split(",") if x.strip())
            elif key in ("r_a", "r_b"):
                kw[key] = float(val)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {e}") from None
    return ExperimentConfig(**kw)


def load_graph(spec: str) -> NetworkGraph:
    """``random50``, ``random:<n>:<m>:<seed>`` or a topology file path."""
    if spec == "random50":
        from .fixtures import random50_graph
        return random50_graph()
    if spec == "fig3":
        from .fixtures import fig3_graph
        return fig3_graph()
    if spec.startswith("random:"):
        n, m, seed = (int(x) for x in spec.split(":")[1:])
        return generate_random_planar(n, m, DeploymentArea(1200.0, 1200.0), seed,
                                      biconnected=True)
    return read_topology(spec)


# ---------------------------------------------------------------------------
# metrics

@dataclass
class TrialResult:
    scheme: str
    topology: str
    k: int
    radius: float
    trial: int
    recoverable: int = 0
    recovered: int = 0
    requests: int = 0            # recoverable flows whose primary failed
    locally_recovered: int = 0
    escalated: int = 0
    spliced_ok: int = 0
    unspliceable: int = 0
    ml: int = 0
    stretches: list = field(default_factory=list)
    outcomes: list = field(default_factory=list)
    splice_log: list = field(default_factory=list)


def recovery_ratio(outcomes) -> float:
    """Delivered recoverable flows over recoverable flows."""
    rec = [o for o in outcomes if o.kind is not Outcome.NON_RECOVERABLE]
    if not rec:
        raise UndefinedRatio("no recoverable flow")
    return sum(o.delivered for o in rec) / len(rec)


def controller_overhead(outcomes) -> float:
    """Share of reconnection requests the data plane had to escalate.

    A flow that was escalated and later spliced counts as escalated.
    """
    req = [o for o in outcomes
           if o.kind not in (Outcome.NON_RECOVERABLE, Outcome.DELIVERED_PRIMARY)]
    if not req:
        raise UndefinedRatio("no reconnection request")
    esc = sum(o.kind in (Outcome.ESCALATED, Outcome.DELIVERED_SPLICED) for o in req)
    return esc / len(req)


def path_stretch(outcome: FlowOutcome, sg) -> float:
    g = sg.base
    walk = g.path_weight(outcome.path)
    s, t = outcome.source, outcome.dest
    res = dijkstra(sg.graph.adj, s, lambda a, b: g.links[link_key(a, b)], target=t)
    return walk / res[t][0]


def _ratio(num, den):
    return num / den if den else None


def trial_row(r: TrialResult) -> dict:
    st = np.array(r.stretches) if r.stretches else None
    return {
        "scheme": r.scheme, "topology": r.topology, "k": r.k, "radius": r.radius,
        "trial": r.trial, "recoverable": r.recoverable, "recovered": r.recovered,
        "locally_recovered": r.locally_recovered, "escalated": r.escalated,
        "spliced_ok": r.spliced_ok, "unspliceable": r.unspliceable,
        "recovery_ratio": _ratio(r.recovered, r.recoverable),
        "controller_overhead": _ratio(r.escalated, r.requests),
        "ml": r.ml,
        "stretch_p50": float(np.quantile(st, 0.5)) if st is not None else None,
        "stretch_p90": float(np.quantile(st, 0.9)) if st is not None else None,
    }


@dataclass
class MetricsReport:
    config: ExperimentConfig
    trials: list                       # TrialResult per (scheme, k, radius, trial)
    failures: list                     # RegionalFailure in sampling order

    def rows(self) -> list:
        return [trial_row(r) for r in self.trials]

    def select(self, scheme, k=None, radius=None) -> list:
        return [r for r in self.trials if r.scheme == scheme
                and (k is None or r.k == k) and (radius is None or r.radius == radius)]

    def mean_recovery(self, scheme, k=None, radius=None) -> float:
        v = [r.recovered / r.recoverable for r in self.select(scheme, k, radius)
             if r.recoverable]
        return float(np.mean(v)) if v else math.nan

    def mean_overhead(self, scheme, k=None, radius=None) -> float:
        v = [r.escalated / r.requests for r in self.select(scheme, k, radius) if r.requests]
        return float(np.mean(v)) if v else math.nan

    def stretch_samples(self, scheme, k=None, radius=None) -> np.ndarray:
        return np.array([x for r in self.select(scheme, k, radius) for x in r.stretches])

    def ml_values(self, scheme, k=None, radius=None) -> np.ndarray:
        return np.array([r.ml for r in self.select(scheme, k, radius)])

    def summary(self) -> list:
        out = []
        keys = sorted({(r.scheme, r.k, r.radius) for r in self.trials},
                      key=lambda x: (SCHEMES.index(x[0]), x[1], x[2]))
        for scheme, k, radius in keys:
            st = self.stretch_samples(scheme, k, radius)
            out.append({
                "scheme": scheme, "k": k, "radius": radius,
                "recovery_ratio": self.mean_recovery(scheme, k, radius),
                "controller_overhead": self.mean_overhead(scheme, k, radius),
                "stretch_le_1.5": float(np.mean(st <= 1.5)) if st.size else math.nan,
                "ml_mean": float(np.mean(self.ml_values(scheme, k, radius))),
            })
        return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(report: MetricsReport, stream=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in report.rows():
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def stretch_cdf(samples, points=None) -> list:
    """(x, F(x)) pairs of the empirical CDF, gnuplot-ready."""
    xs = np.sort(np.asarray(samples, dtype=float))
    if points is None:
        return [(float(x), (i + 1) / len(xs)) for i, x in enumerate(xs)]
    return [(float(p), float(np.searchsorted(xs, p, side="right") / len(xs))) for p in points]


# ---------------------------------------------------------------------------
# deployment and per-trial simulation

@dataclass
class Deployment:
    """Everything installed before failures: backups, plans, switch tables."""

    graph: NetworkGraph
    k: int
    r_a: float
    r_b: float
    demands: list
    _cache: dict = field(default_factory=dict)

    def _get(self, key, make):
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    @property
    def bts(self):
        return self._get("bts", lambda: generate_backup_topologies(self.graph, self.k))

    def plans(self, penalize: bool):
        sched = radius_schedule(self.r_a, self.r_b, self.k)
        return self._get(("plans", penalize), lambda: plan_all_pairs(
            self.graph, self.bts, sched, penalize=penalize, demands=self.demands))

    def switches(self, penalize: bool):
        return self._get(("sw", penalize), lambda: install_routes(self.plans(penalize), self.bts))

    def ledger(self, penalize: bool) -> LoadLedger:
        return self._get(("ledger", penalize), lambda: LoadLedger.from_plans(self.plans(penalize)))

    def slices(self, seed: int):
        return self._get(("slices", seed), lambda: build_slice_tables(
            self.graph, path_splicing_baseline_routes(self.graph, self.k, seed)))


def perturbation_bound(deg_i, deg_j, deg_max) -> float:
    return (deg_i + deg_j) / deg_max


def path_splicing_baseline_routes(g: NetworkGraph, k: int, seed: int) -> list:
    """Link weights of k slices; slice 0 is unperturbed.

    The perturbation drawn from [0, (d_i + d_j) / d_max] scales the base
    weight, since an additive term of at most 2 is invisible against
    geographic link lengths.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    deg = {u: len(vs) for u, vs in g.adj.items()}
    dmax = max(deg.values())
    out = [dict(g.links)]
    for _ in range(1, k):
        w = {}
        for (a, b), base in g.links.items():
            bound = perturbation_bound(deg[a], deg[b], dmax)
            w[(a, b)] = base * (1.0 + rng.uniform(0.0, bound))
        out.append(w)
    return out


class _StretchOracle:
    """Post-failure shortest distances, one Dijkstra per source."""

    def __init__(self, sg):
        self.sg = sg
        self.trees = {}

    def __call__(self, o: FlowOutcome) -> float:
        g = self.sg.base
        s = o.source
        if s not in self.trees:
            self.trees[s] = dijkstra(self.sg.graph.adj, s, lambda a, b: g.links[link_key(a, b)])
        return g.path_weight(o.path) / self.trees[s][o.dest][0]


def run_trial(dep: Deployment, scheme: str, failure: RegionalFailure, *, topology="",
              radius=None, trial=0, seed=0, log=False) -> TrialResult:
    g = dep.graph
    sg = apply_failure(g, failure)
    res = TrialResult(scheme, topology, dep.k, failure.radius if radius is None else radius, trial)
    stretch = _StretchOracle(sg)
    dead_n, dead_l = sg.destroyed_nodes, sg.destroyed_links

    if scheme == "PathSplicing":
        slices = dep.slices(seed)
        # primaries are slice-0 routes
        ledger = LoadLedger()
        prim = {}
        for s, t in dep.demands:
            p = [s]
            while p[-1] != t:
                p.append(slices.next_hop[0][p[-1]][t])
            prim[(s, t)] = tuple(p)
            ledger.P.update(p)
    else:
        penalize = scheme == "SDN-FRRD"
        plans = dep.plans(penalize)
        switches = dep.switches(penalize)
        ledger = dep.ledger(penalize).copy()
        prim = {d: plans[d].primary for d in dep.demands}

    outcomes = {}
    for s, t in dep.demands:
        p = prim[(s, t)]
        touched = any(u in dead_n for u in p) or \
            any(link_key(a, b) in dead_l for a, b in zip(p, p[1:]))
        if not touched:
            o = FlowOutcome(s, t, Outcome.DELIVERED_PRIMARY, p)
        elif scheme == "PathSplicing":
            rng = np.random.default_rng([seed, trial, s, t])
            o = simulate_splicing_flow(slices, sg, s, t, rng)
        else:
            o = simulate_flow(switches, sg, s, t)
        outcomes[(s, t)] = o

    for o in outcomes.values():
        if o.kind is Outcome.DELIVERED_LOCAL:
            ledger.add_path(o.path)

    if scheme in ("SDN-FRRD", "SDN-MRC"):
        for (s, t), o in sorted(outcomes.items()):
            if o.kind is not Outcome.ESCALATED:
                continue
            try:
                sp = splice(sg, plans, ledger, s, t)
            except SpliceError:
                res.unspliceable += 1
                if log:
                    res.splice_log.append(format_splice(s, t, "unspliceable", 0,
                                                        maximal_load(ledger, sg)))
                continue
            again = simulate_flow(switches, sg, s, t, actions=sp.action_map())
            if not again.delivered:
                raise AssertionError(f"spliced flow {s}->{t} not delivered: {again}")
            outcomes[(s, t)] = replace(again, kind=Outcome.DELIVERED_SPLICED)
            res.spliced_ok += 1
            if log:
                res.splice_log.append(format_splice(s, t, "ok", len(sp.actions),
                                                    maximal_load(ledger, sg)))

    for (s, t), o in outcomes.items():
        if o.kind is Outcome.NON_RECOVERABLE:
            continue
        res.recoverable += 1
        if o.kind is not Outcome.DELIVERED_PRIMARY:
            res.requests += 1
        if o.delivered:
            res.recovered += 1
        if o.kind is Outcome.DELIVERED_LOCAL:
            res.locally_recovered += 1
        if o.kind in (Outcome.ESCALATED, Outcome.DELIVERED_SPLICED):
            res.escalated += 1
        if o.rerouted:
            res.stretches.append(stretch(o))
    res.ml = maximal_load(ledger, sg)
    if log:
        res.outcomes = [outcomes[d] for d in sorted(outcomes)]
    return res


def _failure_rng(seed, ri, trial):
    return np.random.default_rng([seed, ri, trial])


def sample_failures(cfg: ExperimentConfig, area: DeploymentArea) -> list:
    out = []
    for ri, r in enumerate(cfg.sweep_radii):
        dist = cfg.radius_dist if r is None else RadiusDistribution(r, r)
        for j in range(cfg.trials):
            out.append(sample_failure(dist, area, _failure_rng(cfg.seed, ri, j)))
    return out


def run_monte_carlo(cfg: ExperimentConfig, failures=None, graph=None,
                    deployments=None, progress=None) -> MetricsReport:
    """Every scheme x k x radius x trial.  Failures are shared across
    schemes and k so comparisons are paired; pass ``failures`` (as read
    from a replay log) to skip sampling."""
    g = graph if graph is not None else load_graph(cfg.topology)
    if failures is None:
        failures = sample_failures(cfg, g.area)
    n_r = len(cfg.sweep_radii)
    if len(failures) != n_r * cfg.trials:
        raise ConfigError(f"expected {n_r * cfg.trials} failures, got {len(failures)}")
    demands = all_pairs(g)
    deployments = {} if deployments is None else deployments
    results = []
    for k in cfg.k_values:
        key = (cfg.topology, k, cfg.r_a, cfg.r_b)
        if key not in deployments:
            deployments[key] = Deployment(g, k, cfg.r_a, cfg.r_b, demands)
        dep = deployments[key]
        for scheme in cfg.schemes:
            for ri, r in enumerate(cfg.sweep_radii):
                for j in range(cfg.trials):
                    f = failures[ri * cfg.trials + j]
                    results.append(run_trial(dep, scheme, f, topology=cfg.topology,
                                             radius=r, trial=j, seed=cfg.seed))
                if progress:
                    progress(scheme, k, r)
    return MetricsReport(cfg, results, list(failures))


@dataclass(frozen=True)
class MLComparison:
    requests: int
    splice: int
    shortest: int
    oracle: Optional[int]  # None when the exhaustive search is too large


def escalation_scenario(dep: Deployment, failure: RegionalFailure, penalize=True):
    """(surviving graph, plans, ledger after local reroutes, escalated demands)."""
    sg = apply_failure(dep.graph, failure)
    plans = dep.plans(penalize)
    switches = dep.switches(penalize)
    ledger = dep.ledger(penalize).copy()
    escalated = []
    for s, t in dep.demands:
        if primary_intact(plans[(s, t)].primary, sg):
            continue
        o = simulate_flow(switches, sg, s, t)
        if o.kind is Outcome.DELIVERED_LOCAL:
            ledger.add_path(o.path)
        elif o.kind is Outcome.ESCALATED:
            escalated.append((s, t))
    return sg, plans, ledger, escalated


def compare_ml(dep: Deployment, failure: RegionalFailure, penalize=True,
               oracle_limit=10 ** 5) -> MLComparison:
    sg, plans, base, reqs = escalation_scenario(dep, failure, penalize)
    ml_s = greedy_ml(sg, plans, reqs, base, splice)
    ml_h = greedy_ml(sg, plans, reqs, base, shortest_splice)
    try:
        ml_o = minmax_oracle(sg, plans, reqs, base, limit=oracle_limit).ml
    except TooLarge:
        ml_o = None
    return MLComparison(len(reqs), ml_s, ml_h, ml_o)


# ---------------------------------------------------------------------------
# failure replay log

def write_failure_log(report: MetricsReport, stream=None) -> str:
    lines = [f"# seed {report.config.seed}"]
    lines.extend(format_failure(f) for f in report.failures)
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text


def read_failure_log(source) -> tuple:
    """(seed or None, failures) from a log written by :func:`write_failure_log`."""
    if isinstance(source, (str, Path)) and not str(source).startswith(("#", "failure")):
        source = Path(source).read_text()
    seed, failures = None, []
    for line in str(source).splitlines():
        line = line.strip()
        if line.startswith("# seed"):
            seed = int(line.split()[2])
        line = line.split("#", 1)[0].strip()
        if line:
            failures.append(parse_failure(line))
    return seed, failures


def replay(cfg: ExperimentConfig, log_text: str, **kw) -> MetricsReport:
    seed, failures = read_failure_log(log_text)
    if seed is not None and seed != cfg.seed:
        cfg = replace(cfg, seed=seed)
    return run_monte_carlo(cfg, failures=failures, **kw)


def fixed_failure(cx, cy, r) -> RegionalFailure:
    return RegionalFailure(Point(cx, cy), r)
