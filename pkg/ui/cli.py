"""
Command-line interface for the PageRank discrepancy toolkit.

Sub-commands: pagerank, gamma, sweep, limit, predict, search. Data goes to
stdout (or --out) as CSV; legends, summaries and logs go to stderr.
Exit codes: 0 success, 2 I/O error, 3 invalid graph data, 4 usage error.
"""
from __future__ import annotations
from contextlib import nullcontext
from typing import List, Optional
import argparse
import logging
import math
import sys

from config import setup_logging
from core.digraph import (
    Alpha1UndefinedError,
    AlphaError,
    GraphError,
    PagerankError,
    read_graph,
    serialize_graph,
)
from core.discrepancy import SearchConfig, limit_table, parse_grid, run_search, sweep
from core.export import (
    fmt,
    write_limit_csv,
    write_pagerank_csv,
    write_prediction_csv,
    write_search_records,
    write_sweep_csv,
)
from core.gamma import (
    argmax_discrepancy,
    build_gamma_general,
    gamma_legend,
    integer_argmax,
    predict_discrepancy,
    prediction_table,
)
from core.pagerank import PowerConfig, WalkConfig, solve


logger = logging.getLogger("pagerank.cli")

EXIT_OK = 0
EXIT_IO = 2
EXIT_DATA = 3
EXIT_USAGE = 4


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 1], got {text}")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be at least 0, got {value}")
    return value


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0 or math.isinf(value):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {text}")
    return value


def ladder_lengths(text: str) -> List[int]:
    """Comma list of k values, each at least 2."""
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            k = int(item)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {item!r}") from None
        if k < 2:
            raise argparse.ArgumentTypeError(f"k must be at least 2 so that 1 - 1/k lies in (0, 1), got {k}")
        values.append(k)
    if not values:
        raise argparse.ArgumentTypeError("empty k list")
    return values


def alpha_grid(text: str) -> List[float]:
    """Either "default" or a comma list of alphas in [0, 1]."""
    try:
        return parse_grid(text)
    except AlphaError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _output(path: Optional[str]):
    if path is None or path == "-":
        return nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="")


def cmd_pagerank(args: argparse.Namespace) -> int:
    """Print the PageRank vector of a graph file as CSV."""
    g = read_graph(args.graph)
    vector = solve(g, args.alpha, args.solver,
                   power=PowerConfig(tol=args.tol, max_iter=args.max_iter),
                   walk=WalkConfig(steps=args.steps, seed=args.seed))
    write_pagerank_csv(vector, sys.stdout)
    return EXIT_OK


def cmd_gamma(args: argparse.Namespace) -> int:
    """Write Gamma(k, m) in the graph file format; role legend to stderr."""
    g, labels = build_gamma_general(args.k, args.m)
    with _output(args.out) as stream:
        stream.write(serialize_graph(g))
    for line in gamma_legend(labels):
        print(line, file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    """Distances from alpha_ref to every grid alpha, as CSV."""
    g = read_graph(args.graph)
    result = sweep(g, args.alpha_ref, args.grid)
    with _output(args.out) as stream:
        write_sweep_csv(result, stream)
    peak = result.peak()
    logger.info(f"Sweep peak d2={peak.d2:.9f} at alpha={peak.alpha!r}")
    return EXIT_OK


def cmd_limit(args: argparse.Namespace) -> int:
    """Ladder limit table between alpha = 1 and alpha = 1 - 1/k."""
    rows = limit_table(args.k, args.m)
    with _output(args.out) as stream:
        write_limit_csv(rows, stream)
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    """Table of f(m) and m / (1 + m^2) on a real grid, with the maximisers on stderr."""
    count = int(math.floor(args.m_max / args.step + 1e-9))
    m_values = [round(args.step * i, 12) for i in range(1, count + 1)]
    with _output(args.out) as stream:
        write_prediction_csv(prediction_table(m_values), stream)
    for m in range(1, int(math.floor(args.m_max)) + 1):
        print(f"# m={m} f={fmt(predict_discrepancy(m))}", file=sys.stderr)
    m_star, f_star = argmax_discrepancy()
    print(f"# argmax m={m_star:.6f} f={f_star:.6f} f^2={f_star * f_star:.6f}", file=sys.stderr)
    print(f"# best integer m={integer_argmax(max(1, int(math.floor(args.m_max))))}", file=sys.stderr)
    return EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    """Exhaustive search over all graphs on n vertices; ranked records to stdout."""
    config = SearchConfig(n=args.n, top=args.top, refine_rounds=args.refine_rounds,
                          workers=args.workers, allow_large=args.allow_large)
    records = run_search(config, args.grid)
    logger.info(f"Search on n={config.n} kept {len(records)} record(s)")
    write_search_records(records, sys.stdout)
    return EXIT_OK


def build_parser() -> CommandParser:
    parser = CommandParser(prog="pagerank-discrepancy",
                           description="PageRank vectors, ladder constructions and alpha discrepancies.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("pagerank", help="PageRank vector of a graph file")
    p.add_argument("graph", help="graph file")
    p.add_argument("--alpha", type=probability, required=True)
    p.add_argument("--solver", choices=("auto", "exact", "power", "walk"), default="auto")
    p.add_argument("--tol", type=positive_float, default=PowerConfig.tol)
    p.add_argument("--max-iter", type=positive_int, default=PowerConfig.max_iter)
    p.add_argument("--steps", type=positive_int, default=WalkConfig.steps)
    p.add_argument("--seed", type=int, default=WalkConfig.seed)
    p.set_defaults(handler=cmd_pagerank)

    p = commands.add_parser("gamma", help="write the ladder Gamma(k, m)")
    p.add_argument("--k", type=positive_int, required=True)
    p.add_argument("--m", type=positive_int, default=2)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.set_defaults(handler=cmd_gamma)

    p = commands.add_parser("sweep", help="distances from alpha_ref along a grid")
    p.add_argument("graph", help="graph file")
    p.add_argument("--alpha-ref", type=probability, default=1.0)
    p.add_argument("--grid", type=alpha_grid, default="default", help='"default" or comma list of alphas')
    p.add_argument("--out")
    p.set_defaults(handler=cmd_sweep)

    p = commands.add_parser("limit", help="ladder limit table")
    p.add_argument("--k", type=ladder_lengths, default=[10, 100, 1000], help="comma list, each k >= 2")
    p.add_argument("--m", type=positive_int, default=2)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_limit)

    p = commands.add_parser("predict", help="closed-form f(m) table")
    p.add_argument("--m-max", type=positive_float, default=10.0)
    p.add_argument("--step", type=positive_float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_predict)

    p = commands.add_parser("search", help="exhaustive search over small graphs")
    p.add_argument("--n", type=positive_int, default=SearchConfig.n)
    p.add_argument("--grid", type=alpha_grid, default="default")
    p.add_argument("--top", type=positive_int, default=SearchConfig.top)
    p.add_argument("--refine-rounds", type=non_negative_int, default=SearchConfig.refine_rounds)
    p.add_argument("--workers", type=positive_int, default=SearchConfig.workers)
    p.add_argument("--allow-large", action="store_true", help="permit n = 5")
    p.set_defaults(handler=cmd_search)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "m_max", None) is not None and args.m_max < 1:
        parser.error("--m-max must be at least 1")
    setup_logging(args.verbose)
    try:
        return args.handler(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GraphError, Alpha1UndefinedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (AlphaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PagerankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
