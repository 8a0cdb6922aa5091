"""Pipeline orchestration: inputs -> clean -> analyses -> artifacts.

Stages:

* ``clean``     parse and clean the inputs, write ``papers.json``
* ``graphs``    collaboration graphs with centrality-sized nodes,
                ``graph_<kind>.graphml`` and ``graph_<kind>.dot``
* ``trends``    per-year trendiness observations (feeds report)
* ``relevance`` BM25 relevance matrix (feeds report)
* ``report``    LaTeX tables plus ``summary.json``

Cleaning always runs first; analyses a requested stage depends on are
computed in memory but only requested stages write files.  When query
levels are configured, records must match at least one pattern of every
level to enter the corpus.  All stages are deterministic: rerunning with
unchanged inputs and a fixed clock rewrites every artifact byte-for-byte,
regardless of the thread count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

from . import centrality, ingest, normalize, relevance, report, trends
from .config import ConfigError, RunConfig
from .graph import ENTITY_KINDS, build_graph
from .normalize import Diagnostic, PaperRecord

__all__ = ["InputError", "StageError", "STAGES", "run"]

logger = logging.getLogger("bibmetrics")

STAGES = ("clean", "graphs", "trends", "relevance", "report")

T = TypeVar("T")
U = TypeVar("U")


class InputError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


def _map_ordered(fn: Callable[[T], U], items: Sequence[T], threads: int) -> list[U]:
    """Apply fn to items, preserving order regardless of the thread count."""
    if threads <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (threads * 4))))


def _detect_format(path: Path, configured: str) -> str:
    if configured != "auto":
        return configured
    return "csv" if path.suffix.lower() == ".csv" else "tagged"


def _read_records(config: RunConfig) -> list[ingest.RawRecord]:
    records: list[ingest.RawRecord] = []
    for path in config.inputs:
        if not path.is_file():
            raise InputError(f"input file not found: {path}")
        try:
            text = ingest.read_export_text(path, latin1_fallback=config.latin1_fallback)
            if _detect_format(path, config.input_format) == "csv":
                records.extend(ingest.parse_csv(text, config.csv_header_map))
            else:
                records.extend(ingest.parse_tagged(text))
        except ingest.IngestError as exc:
            raise InputError(f"{path}: {exc}") from exc
    return records


def _clock_year(config: RunConfig) -> int | None:
    if config.clock is None:
        return None
    try:
        stamp = datetime.fromisoformat(config.clock.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ConfigError(f"clock is not an ISO timestamp: {config.clock!r}") from exc
    return stamp.year


def _query_filter(
    papers: list[PaperRecord],
    tokens: list[list[str]],
    levels: dict[str, list[str]],
) -> tuple[list[PaperRecord], list[list[str]], int]:
    """Keep records matching at least one pattern in every query level."""
    compiled_levels = [trends.compile_patterns(patterns) for patterns in levels.values()]
    kept_papers: list[PaperRecord] = []
    kept_tokens: list[list[str]] = []
    for paper, token_list in zip(papers, tokens):
        if all(trends.match_tokens(token_list, level) for level in compiled_levels):
            kept_papers.append(paper)
            kept_tokens.append(token_list)
    return kept_papers, kept_tokens, len(papers) - len(kept_papers)


def _validate(config: RunConfig, stages: set[str]) -> None:
    unknown = stages - set(STAGES)
    if unknown:
        raise ConfigError(f"unknown stage(s): {', '.join(sorted(unknown))}")
    if not stages:
        raise ConfigError("no stages requested")
    if not config.inputs:
        raise ConfigError("no input files configured")
    if config.threads < 1:
        raise ConfigError("threads must be >= 1")
    if config.report.max_node_size <= config.report.min_node_size:
        raise ConfigError("max_node_size must exceed min_node_size")
    if not 0.0 < config.pagerank.damping <= 1.0:
        raise ConfigError(f"pagerank damping must be in (0, 1], got {config.pagerank.damping}")
    if config.pagerank.tol <= 0 or config.pagerank.max_iter < 1:
        raise ConfigError("pagerank tol must be positive and max_iter >= 1")
    if config.trend.window_years < 1 or config.trend.top_k < 1:
        raise ConfigError("trend window_years and top_k must be positive")
    needs_topics = stages & {"trends", "relevance", "report"}
    if needs_topics and not config.topics:
        raise ConfigError(
            f"stage(s) {', '.join(sorted(needs_topics))} need at least one topic"
        )


def run(config: RunConfig, stages: Iterable[str] = STAGES, dry_run: bool = False) -> report.ReportBundle:
    """Execute the requested stages and return the produced artifacts.

    With ``dry_run`` the configuration and inputs are validated (files are
    read and parsed) but nothing is computed or written.
    """
    stage_set = set(stages)
    _validate(config, stage_set)
    generated_at = config.clock
    now_year = _clock_year(config)

    raw_records = _read_records(config)
    bundle = report.ReportBundle(output_dir=config.output_dir)
    if dry_run:
        logger.info("dry run: %d raw records from %d file(s), nothing written",
                    len(raw_records), len(config.inputs))
        return bundle

    out_dir = config.output_dir
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out_dir}: {exc}") from exc

    # Clean always runs first.
    try:
        aliases = None
        if config.aliases_path is not None:
            aliases = dict(normalize.DEFAULT_COUNTRY_ALIASES)
            aliases.update(normalize.load_alias_file(config.aliases_path))
        papers, diagnostics = normalize.clean(
            raw_records, aliases=aliases, strict=config.strict, now_year=now_year
        )
        tokens = _map_ordered(relevance.record_tokens, papers, config.threads)
        if config.query_levels:
            papers, tokens, excluded = _query_filter(papers, tokens, config.query_levels)
            if excluded:
                diagnostics.append(
                    Diagnostic(
                        "query-filter",
                        f"excluded {excluded} record(s) not matching every query level",
                    )
                )
        _log_diagnostics(diagnostics)
    except Exception as exc:
        raise StageError("clean", exc) from exc

    if "clean" in stage_set:
        path = out_dir / "papers.json"
        with open(path, "wb") as sink:
            normalize.emit_json(papers, sink, generated_at=generated_at)
        bundle.add("papers.json", "json", path)

    need_graphs = stage_set & {"graphs", "report"}
    need_trends = stage_set & {"trends", "report"}
    need_relevance = stage_set & {"relevance", "report"}

    graph_results: dict[str, dict[str, centrality.CentralityResult]] = {}
    if need_graphs:
        try:
            for kind in ENTITY_KINDS:
                g = build_graph(papers, kind)
                if g.n == 0:
                    results = {
                        "betweenness": centrality.CentralityResult(
                            "betweenness", {}, config.betweenness.normalized
                        ),
                        "pagerank": centrality.CentralityResult("pagerank", {}, True),
                    }
                else:
                    results = {
                        "betweenness": centrality.betweenness(
                            g, normalized=config.betweenness.normalized,
                            weighted=config.betweenness.weighted,
                        ),
                        "pagerank": centrality.pagerank(
                            g, d=config.pagerank.damping, tol=config.pagerank.tol,
                            max_iter=config.pagerank.max_iter, weighted=config.pagerank.weighted,
                        ),
                    }
                if results["pagerank"].warning:
                    logger.warning("%s pagerank: %s", kind, results["pagerank"].warning)
                graph_results[kind] = results
                if "graphs" in stage_set:
                    sizing = results[config.report.sizing[kind]]
                    for fmt in ("graphml", "dot"):
                        path = out_dir / f"graph_{kind}.{fmt}"
                        with open(path, "wb") as sink:
                            report.export_graph(
                                g, sizing, fmt, sink,
                                min_size=config.report.min_node_size,
                                max_size=config.report.max_node_size,
                            )
                        bundle.add(path.name, fmt, path)
        except Exception as exc:
            raise StageError("graphs", exc) from exc

    trend_results = None
    if need_trends:
        try:
            trend_results = trends.trend_table(
                papers, config.topics,
                window_years=config.trend.window_years,
                top_k=config.trend.top_k,
                mode=config.trend.mode,
                inclusive_window=config.trend.inclusive_window,
                smoothing=config.trend.smoothing,
                restrict_window=config.trend.restrict_window,
                tokens=tokens,
            )
        except Exception as exc:
            raise StageError("trends", exc) from exc

    relevance_result = None
    if need_relevance:
        try:
            if papers:
                docs = [
                    relevance.DocVector(paper_id=p.id, tokens=t, length=len(t))
                    for p, t in zip(papers, tokens)
                ]
                relevance_result = relevance.relevance_matrix(
                    papers, config.topics, params=config.bm25, docs=docs
                )
            else:
                relevance_result = relevance.RelevanceMatrix(
                    paper_ids=[], topics=[t.name for t in config.topics], cells=[]
                )
        except Exception as exc:
            raise StageError("relevance", exc) from exc

    if "report" in stage_set:
        try:
            limit = config.report.table_limit
            tables = {
                "sources_by_year.tex": report.source_year_matrix(
                    papers, year_range=config.report.year_range, limit=limit
                ),
                "top_author_by_papers.tex": report.top_entities_table(papers, "author", "papers", limit),
                "top_author_by_citations.tex": report.top_entities_table(papers, "author", "citations", limit),
                "top_affiliation_by_papers.tex": report.top_entities_table(papers, "affiliation", "papers", limit),
                "top_affiliation_by_citations.tex": report.top_entities_table(papers, "affiliation", "citations", limit),
                "trending.tex": report.trending_table(trend_results or {}, top_k=config.trend.top_k),
            }
            if relevance_result is not None:
                tables["relevance.tex"] = report.relevance_table(relevance_result)
            for name, text in tables.items():
                path = out_dir / name
                path.write_bytes(text.encode("utf-8"))
                bundle.add(name, "latex", path)

            path = out_dir / "summary.json"
            with open(path, "wb") as sink:
                report.summary_json(
                    sink,
                    records=papers,
                    centrality_results=graph_results,
                    trends=trend_results,
                    relevance=relevance_result,
                    generated_at=generated_at,
                    table_limit=limit,
                )
            bundle.add("summary.json", "json", path)
        except Exception as exc:
            raise StageError("report", exc) from exc

    logger.info("wrote %d artifact(s) to %s", len(bundle.artifacts), out_dir)
    return bundle


def _log_diagnostics(diagnostics: list[Diagnostic]) -> None:
    if not diagnostics:
        return
    logger.info("cleaning produced %d diagnostic(s)", len(diagnostics))
    for diagnostic in diagnostics:
        logger.debug("%s", diagnostic)
