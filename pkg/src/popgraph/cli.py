"""Command line entry point: ``popgraph {generate,analyze,attack,sweep,bounds}``.

Exit status is 0 on success, 1 on usage errors and 2 on runtime errors.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import analytics, attack, bounds, harness
from .bigraph import BigraphParams, generate, load_edge_list, save_edge_list
from .errors import PopgraphError
from .numerics import ChannelSpec


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


def _alpha(text: str) -> float:
    return math.inf if text.strip().lower() in ("inf", "infinity") else float(text)


def _add_graph_args(p, required=True):
    p.add_argument("--n", type=int, required=required, help="number of groups")
    p.add_argument("--m", type=int, required=required, help="number of users")
    p.add_argument("--mu", type=int, required=required, help="edges per group")
    p.add_argument("--alpha", type=_alpha, required=required, help="power-law exponent or 'inf'")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="popgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="generate a graph and write its edge list")
    _add_graph_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("analyze", help="degree, moment and sparsity reports for edge-list files")
    p.add_argument("graphs", nargs="+")
    p.add_argument("--psi", type=float, default=1.0, help="sparsity slack")
    p.add_argument("--pmf-csv", help="write the pooled degree pmf as CSV")

    p = sub.add_parser("attack", help="run one attack and print its trace")
    p.add_argument("graph")
    p.add_argument("--strategy", choices=[s.value for s in attack.Strategy], default="aits")
    p.add_argument("--nq", type=float, default=0.05, help="BSC crossover probability")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--victim", type=int, help="1-based victim index (default: uniform draw)")
    p.add_argument("--trace", help="write the query trace to this file instead of stdout")

    p = sub.add_parser("sweep", help="run a full experiment from a config file")
    p.add_argument("--config", help="config file (defaults to the desk preset)")
    p.add_argument("--preset", choices=sorted(harness.PRESETS), default="desk")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("bounds", help="evaluate the query and error bounds")
    _add_graph_args(p)
    p.add_argument("--nq", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--c-prime", type=float, default=1.0)
    p.add_argument("--c-thm1", type=float, default=1.0)
    return parser


def _cmd_generate(args, out):
    params = BigraphParams(n=args.n, m=args.m, mu=args.mu, alpha=args.alpha, seed=args.seed)
    graph = generate(params)
    save_edge_list(graph, args.out)
    out.write(f"wrote {args.out} n={graph.n} m={graph.m} edges={graph.n_edges}\n")


def _cmd_analyze(args, out):
    graphs = [load_edge_list(path) for path in args.graphs]
    p = graphs[0].params
    pmf = analytics.empirical_degree_pmf(graphs)
    moments = analytics.degree_moment_stats(graphs)
    out.write(f"n={p.n}\nm={p.m}\nmu={p.mu}\n"
              f"alpha={'inf' if math.isinf(p.alpha) else p.alpha!r}\n")
    out.write(f"total_degree={sum(g.n_edges for g in graphs)}\n")
    out.write(f"max_degree={int(pmf.support.max())}\n")
    if math.isinf(p.alpha):
        ref = lambda k: analytics.geometric_degree_pmf(p.mu, k)
        out.write(f"tv_to_geometric={analytics.total_variation(pmf, ref)!r}\n")
    k_min, k_max = analytics.default_fit_window(p.n)
    try:
        out.write(f"powerlaw_exponent={analytics.fit_powerlaw_exponent(pmf, k_min, k_max)!r}\n")
    except PopgraphError:
        out.write("powerlaw_exponent=nan\n")
    out.write(moments.to_text())
    try:
        out.write(analytics.fingerprint_sparsity(graphs[0], args.psi).to_text())
    except ValueError as exc:
        out.write(f"sparsity_error={exc}\n")
    if args.pmf_csv:
        pmf.to_csv(args.pmf_csv)


def _cmd_attack(args, out):
    graph = load_edge_list(args.graph)
    assignment = attack.ChannelAssignment.single(
        graph.m, attack.QueryChannel(ChannelSpec.bsc(args.nq)))
    victims = attack.VictimModel.uniform(graph.m)
    victim = None
    if args.victim is not None:
        if not 1 <= args.victim <= graph.m:
            raise UsageError(f"victim must lie in 1..{graph.m}")
        victim = args.victim - 1
    rng = np.random.default_rng(args.seed)
    outcome = attack.run_attack(graph, assignment, victims, args.strategy, args.epsilon, rng,
                                victim=victim, trace=True)
    if args.trace:
        with open(args.trace, "w") as fh:
            attack.write_trace(outcome, fh)
    else:
        attack.write_trace(outcome, out)
    result = "unresolved" if outcome.identified is None else f"identified:{outcome.identified + 1}"
    out.write(f"victim={outcome.victim + 1}\nresult={result}\nqueries={outcome.queries_used}\n"
              f"correct={outcome.correct}\n")


def _cmd_sweep(args, out):
    config = harness.load_config(args.config) if args.config else harness.preset(args.preset)
    result = harness.run_sweep(config, out_dir=args.out)
    out.write(f"wrote {len(result.points)} points to {args.out}\n")


def _cmd_bounds(args, out):
    params = BigraphParams(n=args.n, m=args.m, mu=args.mu, alpha=args.alpha)
    channel = attack.QueryChannel(ChannelSpec.bsc(args.nq))
    inputs = bounds.BoundInputs(params=params, channels={channel.theta_label: channel},
                                p_theta={channel.theta_label: 1.0}, epsilon=args.epsilon,
                                entropy=math.log(args.m), c_prime=args.c_prime,
                                c_thm1=args.c_thm1)
    res = bounds.theorem2_bounds(inputs)
    out.write("[bound]\n")
    out.write(res.to_text())
    cor = bounds.corollary1_bound(params, args.nq, args.epsilon, c_thm1=args.c_thm1,
                                  c_prime=args.c_prime, H_M=math.log(args.m))
    out.write("[closed_form]\n")
    out.write(cor.to_text())


COMMANDS = {"generate": _cmd_generate, "analyze": _cmd_analyze, "attack": _cmd_attack,
            "sweep": _cmd_sweep, "bounds": _cmd_bounds}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
    except UsageError:
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        sys.stderr.write(f"popgraph: {exc}\n")
        return 1
    except (PopgraphError, ValueError, OSError) as exc:
        sys.stderr.write(f"popgraph: error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
