"""Command-line entry point: ``georesilience <subcommand> ...``."""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .backup_routes import all_pairs
from .dataplane import format_flow
from .failure import parse_failure
from .mrc import MRCError, emit_backups, generate_backup_topologies
from .topology import DeploymentArea, TopologyError, emit_topology, generate_random_planar

log = logging.getLogger("georesilience")


def _out(path):
    return contextlib.nullcontext(sys.stdout) if path in (None, "-") else open(path, "w")


def cmd_gen_topo(args):
    g = generate_random_planar(args.n, args.m, DeploymentArea(args.width, args.height),
                               args.seed, biconnected=args.biconnected)
    with _out(args.output) as f:
        emit_topology(g, f)


def cmd_gen_backups(args):
    g = ex.load_graph(args.topology)
    bts = generate_backup_topologies(g, args.k)
    with _out(args.output) as f:
        emit_backups(bts, f)


def cmd_simulate(args):
    g = ex.load_graph(args.topology)
    dep = ex.Deployment(g, args.k, args.r_a, args.r_b, all_pairs(g))
    f = parse_failure("failure " + " ".join(args.failure))
    res = ex.run_trial(dep, args.scheme, f, topology=args.topology, seed=args.seed, log=True)
    with _out(args.output) as out:
        for o in res.outcomes:
            out.write(format_flow(o) + "\n")
        for line in res.splice_log:
            out.write(line + "\n")
        row = ex.trial_row(res)
        out.write("# " + " ".join(f"{c}={ex._fmt(row[c])}" for c in ex.CSV_COLUMNS) + "\n")


def _progress(scheme, k, r):
    log.info("done %s k=%d radius=%s", scheme, k, r)


def _finish(report, args):
    with _out(args.output) as f:
        ex.write_csv(report, f)
    if getattr(args, "failure_log", None):
        Path(args.failure_log).write_text(ex.write_failure_log(report))
    for row in report.summary():
        log.info("%s", " ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                                for k, v in row.items()))


def cmd_experiment(args):
    cfg = ex.parse_config(Path(args.config).read_text())
    _finish(ex.run_monte_carlo(cfg, progress=_progress), args)


def cmd_replay(args):
    cfg = ex.parse_config(Path(args.config).read_text())
    report = ex.replay(cfg, Path(args.log).read_text(), progress=_progress)
    _finish(report, args)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="georesilience", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    q = sub.add_parser("gen-topo", help="write a random planar topology")
    q.add_argument("--n", type=int, default=50)
    q.add_argument("--m", type=int, default=120)
    q.add_argument("--width", type=float, default=1200.0)
    q.add_argument("--height", type=float, default=1200.0)
    q.add_argument("--seed", type=int, default=7)
    q.add_argument("--biconnected", action="store_true")
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_gen_topo)

    q = sub.add_parser("gen-backups", help="write MRC backup topologies")
    q.add_argument("topology", help="file, 'random50', 'fig3' or random:<n>:<m>:<seed>")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_gen_backups)

    q = sub.add_parser("simulate", help="one failure, per-flow logs")
    q.add_argument("topology")
    q.add_argument("--k", type=int, default=6)
    q.add_argument("--scheme", choices=ex.SCHEMES, default="SDN-FRRD")
    q.add_argument("--failure", nargs=3, metavar=("CX", "CY", "R"), required=True)
    q.add_argument("--r-a", type=float, default=50.0)
    q.add_argument("--r-b", type=float, default=150.0)
    q.add_argument("--seed", type=int, default=1)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("experiment", help="Monte Carlo sweep to CSV")
    q.add_argument("config")
    q.add_argument("-o", "--output")
    q.add_argument("--failure-log")
    q.set_defaults(func=cmd_experiment)

    q = sub.add_parser("replay", help="re-run a sweep from a failure log")
    q.add_argument("config")
    q.add_argument("log")
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except (ValueError, OSError, TopologyError, MRCError) as e:
        print(f"georesilience: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
