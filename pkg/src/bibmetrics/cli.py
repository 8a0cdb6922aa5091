"""Command-line driver.

Subcommands select pipeline stages: ``clean`` parses and writes the cleaned
corpus, ``analyze`` adds graphs and the in-memory analyses, ``report``
writes the report artifacts, ``run`` does everything.  All options can come
from a YAML config file (``--config``); flags override the file, and the
BIBMETRICS_OUTPUT_DIR environment variable overrides the configured output
directory (flags still win).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import (
    ConfigError,
    OUTPUT_DIR_ENV,
    RunConfig,
    load_config,
    parse_topic_flag,
)
from .pipeline import InputError, StageError, run
from .relevance import Bm25Params

SUBCOMMAND_STAGES = {
    "clean": ("clean",),
    "analyze": ("clean", "graphs", "trends", "relevance"),
    "report": ("report",),
    "run": ("clean", "graphs", "trends", "relevance", "report"),
}


def _add_shared_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("inputs", nargs="*", type=Path, help="export files (.txt tagged or .csv)")
    parser.add_argument("--config", type=Path, help="YAML config file")
    parser.add_argument("--input-format", choices=["auto", "tagged", "csv"], help="input format (default: auto by extension)")
    parser.add_argument("-o", "--output-dir", type=Path, help="artifact directory")
    parser.add_argument("--aliases", type=Path, help="country alias file (raw=canonical per line)")
    parser.add_argument("--strict", action="store_true", default=None, help="fail on unrecognized countries")
    parser.add_argument("--threads", type=int, help="worker thread cap (results are identical for any value)")
    parser.add_argument("--clock", help="fixed ISO timestamp for reproducible outputs")
    parser.add_argument("--latin1-fallback", action="store_true", default=None, help="re-read non-UTF-8 inputs as latin-1")
    parser.add_argument("--csv-column", action="append", metavar="NAME=TAG", help="CSV column to field tag (repeatable)")
    parser.add_argument("--topic", action="append", metavar="'Name: pat; pat'", help="add a topic (repeatable)")
    parser.add_argument("--domain-pattern", action="append", metavar="PATTERN", help="domain query-level pattern (repeatable)")
    parser.add_argument("--method-pattern", action="append", metavar="PATTERN", help="method query-level pattern (repeatable)")
    parser.add_argument("--k1", type=float, help="BM25 k1 (default 1.2)")
    parser.add_argument("--b", type=float, help="BM25 b (default 0.75)")
    parser.add_argument("--damping", type=float, help="PageRank damping d in (0, 1] (default 0.85)")
    parser.add_argument("--pagerank-tol", type=float, help="PageRank convergence threshold (default 1e-10)")
    parser.add_argument("--pagerank-max-iter", type=int, help="PageRank iteration cap (default 200)")
    parser.add_argument("--pagerank-weighted", action="store_true", default=None, help="spread PageRank proportionally to edge weight")
    parser.add_argument("--betweenness-raw", action="store_true", default=None, help="report raw instead of normalized betweenness")
    parser.add_argument("--betweenness-weighted", action="store_true", default=None, help="use distance 1/weight for shortest paths")
    parser.add_argument("--window-years", type=int, help="trend lookback window (default 3)")
    parser.add_argument("--top-k", type=int, help="trending topics kept per year (default 4)")
    parser.add_argument("--trend-mode", choices=["magnitude", "literal"], help="trendiness sign handling (default magnitude)")
    parser.add_argument("--inclusive-window", action="store_true", default=None, help="include the focal year in the window")
    parser.add_argument("--trend-smoothing", action="store_true", default=None, help="add-half smoothing for everywhere-finite scores")
    parser.add_argument("--restrict-window", action="store_true", default=None, help="count only topic-matching papers in the window total")
    parser.add_argument("--table-limit", type=int, help="rows per ranking table (default 20)")
    parser.add_argument("--min-node-size", type=float, help="smallest exported node size (default 1)")
    parser.add_argument("--max-node-size", type=float, help="largest exported node size (default 10)")
    parser.add_argument("--dry-run", action="store_true", help="validate config and inputs, write nothing")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-record diagnostics")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bibmetrics",
        description="Systematic-review insights from bibliographic export files.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("clean", "parse inputs and write the cleaned corpus (papers.json)"),
        ("analyze", "clean plus graphs with centrality exports"),
        ("report", "write LaTeX tables and summary.json"),
        ("run", "all stages"),
    ]:
        sub = subparsers.add_parser(name, help=help_text)
        _add_shared_options(sub)
    return parser


def _override(settings, **updates):
    """Frozen-settings copy with only the flags the user actually passed."""
    changes = {k: v for k, v in updates.items() if v is not None}
    return dataclasses.replace(settings, **changes) if changes else settings


def _merge(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()

    env_output = os.environ.get(OUTPUT_DIR_ENV)
    if env_output:
        config.output_dir = Path(env_output)

    if args.inputs:
        config.inputs = list(args.inputs)
    if args.input_format:
        config.input_format = args.input_format
    if args.output_dir:
        config.output_dir = args.output_dir
    if args.aliases:
        config.aliases_path = args.aliases
    if args.strict is not None:
        config.strict = args.strict
    if args.threads is not None:
        config.threads = args.threads
    if args.clock:
        config.clock = args.clock
    if args.latin1_fallback is not None:
        config.latin1_fallback = args.latin1_fallback
    if args.csv_column:
        header_map = dict(config.csv_header_map or {})
        for item in args.csv_column:
            name, sep, tag = item.partition("=")
            if not sep or not name or not tag:
                raise ConfigError(f"--csv-column expects NAME=TAG, got {item!r}")
            header_map[name] = tag
        config.csv_header_map = header_map
    if args.topic:
        config.topics = list(config.topics) + [parse_topic_flag(t) for t in args.topic]
    if args.domain_pattern:
        config.query_levels = {**config.query_levels, "domain": args.domain_pattern}
    if args.method_pattern:
        config.query_levels = {**config.query_levels, "method": args.method_pattern}

    try:
        if args.k1 is not None or args.b is not None:
            config.bm25 = Bm25Params(
                k1=args.k1 if args.k1 is not None else config.bm25.k1,
                b=args.b if args.b is not None else config.bm25.b,
            )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    config.pagerank = _override(
        config.pagerank,
        damping=args.damping,
        tol=args.pagerank_tol,
        max_iter=args.pagerank_max_iter,
        weighted=args.pagerank_weighted,
    )
    config.betweenness = _override(
        config.betweenness,
        normalized=(False if args.betweenness_raw else None),
        weighted=args.betweenness_weighted,
    )
    config.trend = _override(
        config.trend,
        window_years=args.window_years,
        top_k=args.top_k,
        mode=args.trend_mode,
        inclusive_window=args.inclusive_window,
        smoothing=args.trend_smoothing,
        restrict_window=args.restrict_window,
    )
    config.report = _override(
        config.report,
        table_limit=args.table_limit,
        min_node_size=args.min_node_size,
        max_node_size=args.max_node_size,
    )
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        config = _merge(args)
        bundle = run(config, SUBCOMMAND_STAGES[args.command], dry_run=args.dry_run)
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.dry_run:
        print("dry run ok: configuration and inputs are valid")
        return 0
    for artifact in bundle.artifacts:
        print(f"wrote {artifact.path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
