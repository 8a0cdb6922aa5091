"""Human-facing artifacts: LaTeX tables, graph exports, JSON summary.

Every emitter is deterministic: identical inputs produce byte-identical
output, nodes and ranking rows follow fixed sort orders, and all special
characters are escaped so the fragments drop into a manuscript unchanged.
"""

from __future__ import annotations

import json
import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO

from .centrality import CentralityResult
from .graph import CollaborationGraph
from .normalize import PaperRecord
from .relevance import RelevanceMatrix
from .trends import TrendObservation

__all__ = [
    "Artifact",
    "ReportBundle",
    "latex_escape",
    "top_entities_table",
    "source_year_matrix",
    "trending_table",
    "relevance_table",
    "export_graph",
    "summary_json",
]

_SPECIALS = {
    "\\": r"\textbackslash{}",
    "&": r"\&",
    "%": r"\%",
    "_": r"\_",
    "#": r"\#",
    "$": r"\$",
    "{": r"\{",
    "}": r"\}",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
}
_SPECIALS_RE = re.compile(r"[\\&%_#${}~^]")


def latex_escape(text: str) -> str:
    """Escape LaTeX special characters in one pass."""
    return _SPECIALS_RE.sub(lambda m: _SPECIALS[m.group()], text)


@dataclass(frozen=True)
class Artifact:
    name: str
    format: str
    path: Path


@dataclass
class ReportBundle:
    output_dir: Path
    artifacts: list[Artifact] = field(default_factory=list)

    def add(self, name: str, format: str, path: Path) -> None:
        self.artifacts.append(Artifact(name=name, format=format, path=path))

    def names(self) -> list[str]:
        return [a.name for a in self.artifacts]


def _table(caption: str, label: str, colspec: str, header: str, rows: list[str]) -> str:
    lines = [
        r"\begin{table}[ht]",
        r"\centering",
        f"\\caption{{{caption}}}",
        f"\\label{{{label}}}",
        f"\\begin{{tabular}}{{{colspec}}}",
        r"\toprule",
        header + r" \\",
        r"\midrule",
    ]
    lines.extend(row + r" \\" for row in rows)
    lines += [r"\bottomrule", r"\end{tabular}", r"\end{table}", ""]
    return "\n".join(lines)


_ENTITY_HEADERS = {"author": "Author Name", "affiliation": "Affiliation Name", "source": "Source Name"}
_METRIC_HEADERS = {"papers": r"\#Papers", "citations": r"\#Citations"}


def _record_entities(record: PaperRecord, kind: str) -> list[str]:
    if kind == "author":
        return record.authors
    if kind == "affiliation":
        return list(dict.fromkeys(a.institution for a in record.affiliations))
    if kind == "source":
        return [record.source] if record.source else []
    raise ValueError(f"unknown entity kind: {kind!r}")


def rank_entities(records: list[PaperRecord], kind: str, metric: str) -> list[tuple[str, int]]:
    """Entities with their paper or citation counts, best first; ties break
    by ascending name."""
    if metric not in ("papers", "citations"):
        raise ValueError(f"unknown metric: {metric!r}")
    counts: dict[str, int] = {}
    for record in records:
        gain = 1 if metric == "papers" else record.times_cited
        for entity in _record_entities(record, kind):
            counts[entity] = counts.get(entity, 0) + gain
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


def top_entities_table(records: list[PaperRecord], kind: str, metric: str, limit: int = 20) -> str:
    """Ranking table of the top authors, affiliations or sources."""
    ranked = rank_entities(records, kind, metric)[:limit]
    header = f"\\textbf{{{_ENTITY_HEADERS[kind]}}} & \\textbf{{{_METRIC_HEADERS[metric]}}}"
    rows = [f"{latex_escape(name)} & {count}" for name, count in ranked]
    return _table(
        caption=f"Top {kind}s by number of {metric}",
        label=f"tab:top_{kind}_by_{metric}",
        colspec="ll",
        header=header,
        rows=rows,
    )


def source_year_matrix(
    records: list[PaperRecord],
    year_range: tuple[int, int] | None = None,
    limit: int = 20,
) -> str:
    """Per-source publication counts by year, with a bold total column.

    Zero cells render as "-"; rows are the top sources by total, descending.
    """
    if year_range is None and records:
        year_range = (min(r.year for r in records), max(r.year for r in records))
    years = list(range(year_range[0], year_range[1] + 1)) if year_range else []

    counts: dict[str, dict[int, int]] = {}
    for record in records:
        if not record.source or (years and not years[0] <= record.year <= years[-1]):
            continue
        by_year = counts.setdefault(record.source, {})
        by_year[record.year] = by_year.get(record.year, 0) + 1

    totals = sorted(
        ((sum(by_year.values()), source) for source, by_year in counts.items()),
        key=lambda item: (-item[0], item[1]),
    )[:limit]

    header_cells = [""] + [str(y) for y in years] + [r"\textbf{Total}"]
    rows = []
    for total, source in totals:
        cells = [latex_escape(source)]
        for year in years:
            n = counts[source].get(year, 0)
            cells.append(str(n) if n else "-")
        cells.append(f"\\textbf{{{total}}}")
        rows.append(" & ".join(cells))
    return _table(
        caption="Papers per source by year",
        label="tab:sources_by_year",
        colspec="l" + "c" * (len(years) + 1),
        header=" & ".join(header_cells),
        rows=rows,
    )


_ORDINALS = ["First", "Second", "Third", "Fourth", "Fifth", "Sixth", "Seventh", "Eighth", "Ninth", "Tenth"]


def _ordinal(i: int) -> str:
    return _ORDINALS[i - 1] if i <= len(_ORDINALS) else f"{i}th"


def _trend_cell(obs: TrendObservation) -> str:
    # Undefined or zero scores render as "-"; +inf outranks every finite
    # score and therefore renders like any other trending topic.
    if obs.insufficient_history or obs.trendiness is None or obs.trendiness == 0:
        return "-"
    return latex_escape(obs.topic)


def trending_table(trends: dict[int, list[TrendObservation]], top_k: int = 4) -> str:
    """One row per year (descending), topic names in rank order."""
    header_cells = [r"\textbf{Year}"] + [
        f"\\textbf{{{_ordinal(i)} Trending Topic}}" for i in range(1, top_k + 1)
    ]
    rows = []
    for year in sorted(trends, reverse=True):
        cells = [_trend_cell(obs) for obs in trends[year][:top_k]]
        cells += ["-"] * (top_k - len(cells))
        rows.append(" & ".join([f"\\textbf{{{year}}}"] + cells))
    return _table(
        caption="Top trending topics per year",
        label="tab:trending_topics",
        colspec="c" * (top_k + 1),
        header=" & ".join(header_cells),
        rows=rows,
    )


def relevance_table(matrix: RelevanceMatrix) -> str:
    """Per-paper topic relevance scores with dense ranks in parentheses."""
    header_cells = [""] + [f"\\textbf{{{latex_escape(t)}}}" for t in matrix.topics]
    rows = []
    for i, row in enumerate(matrix.cells, start=1):
        cells = [f"Paper \\#{i}"]
        for score, rank in row:
            cells.append(f"{score:.2f} ({rank})" if rank is not None else "0")
        rows.append(" & ".join(cells))
    return _table(
        caption="Relevance score of each paper for each topic",
        label="tab:relevance",
        colspec="l" + "c" * len(matrix.topics),
        header=" & ".join(header_cells),
        rows=rows,
    )


def _node_sizes(
    scores: dict[str, float], min_size: float, max_size: float
) -> dict[str, float]:
    if not scores:
        return {}
    values = list(scores.values())
    lo, hi = min(values), max(values)
    if hi <= lo:
        mid = (min_size + max_size) / 2.0
        return {label: mid for label in scores}
    span = max_size - min_size
    return {label: min_size + (s - lo) / (hi - lo) * span for label, s in scores.items()}


def _sorted_edges(g: CollaborationGraph) -> list[tuple[str, str, int]]:
    labels = g.labels()
    pairs = []
    for e in g.edges:
        a, b = labels[e.u], labels[e.v]
        if b < a:
            a, b = b, a
        pairs.append((a, b, e.weight))
    return sorted(pairs)


_GRAPHML_KEYS = [
    ("d0", "node", "label", "string"),
    ("d1", "node", "papers", "int"),
    ("d2", "node", "citations", "int"),
    ("d3", "node", "score", "double"),
    ("d4", "node", "size", "double"),
    ("d5", "edge", "weight", "int"),
]


def _graphml_string(
    g: CollaborationGraph, scores: CentralityResult, min_size: float, max_size: float
) -> str:
    sizes = _node_sizes(scores.scores, min_size, max_size)
    root = ET.Element(
        "graphml",
        {
            "xmlns": "http://graphml.graphdrawing.org/xmlns",
            "xmlns:xsi": "http://www.w3.org/2001/XMLSchema-instance",
            "xsi:schemaLocation": (
                "http://graphml.graphdrawing.org/xmlns "
                "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd"
            ),
        },
    )
    for key_id, target, name, value_type in _GRAPHML_KEYS:
        ET.SubElement(root, "key", {"id": key_id, "for": target, "attr.name": name, "attr.type": value_type})
    graph_el = ET.SubElement(root, "graph", {"id": g.entity_kind, "edgedefault": "undirected"})

    ordered = sorted(g.nodes, key=lambda node: node.label)
    node_ids = {node.label: f"n{i}" for i, node in enumerate(ordered)}
    for node in ordered:
        node_el = ET.SubElement(graph_el, "node", {"id": node_ids[node.label]})
        values = [
            ("d0", node.label),
            ("d1", str(node.papers)),
            ("d2", str(node.citations)),
            ("d3", repr(scores.scores[node.label])),
            ("d4", repr(sizes[node.label])),
        ]
        for key_id, text in values:
            data = ET.SubElement(node_el, "data", {"key": key_id})
            data.text = text
    for a, b, weight in _sorted_edges(g):
        edge_el = ET.SubElement(graph_el, "edge", {"source": node_ids[a], "target": node_ids[b]})
        data = ET.SubElement(edge_el, "data", {"key": "d5"})
        data.text = str(weight)

    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot_string(
    g: CollaborationGraph, scores: CentralityResult, min_size: float, max_size: float
) -> str:
    sizes = _node_sizes(scores.scores, min_size, max_size)
    lines = [f"graph {g.entity_kind}_collaboration {{"]
    for node in sorted(g.nodes, key=lambda node: node.label):
        attrs = (
            f"papers={node.papers}, citations={node.citations}, "
            f"score={_dot_quote(repr(scores.scores[node.label]))}, "
            f"size={_dot_quote(repr(sizes[node.label]))}"
        )
        lines.append(f"  {_dot_quote(node.label)} [{attrs}];")
    for a, b, weight in _sorted_edges(g):
        lines.append(f"  {_dot_quote(a)} -- {_dot_quote(b)} [weight={weight}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(
    g: CollaborationGraph,
    scores: CentralityResult,
    format: str,
    sink: IO[bytes],
    min_size: float = 1.0,
    max_size: float = 10.0,
) -> None:
    """Write the graph as GraphML or DOT with centrality-driven node sizes.

    Node size is an affine map of the score onto [min_size, max_size];
    nodes are sorted by label so output is deterministic.
    """
    if set(scores.scores) != {node.label for node in g.nodes}:
        raise ValueError("scores do not cover exactly the graph's nodes")
    if format == "graphml":
        text = _graphml_string(g, scores, min_size, max_size)
    elif format == "dot":
        text = _dot_string(g, scores, min_size, max_size)
    else:
        raise ValueError(f"unknown graph format: {format!r}")
    sink.write(text.encode("utf-8"))


def _json_score(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return value


def _trend_entries(trends: dict[int, list[TrendObservation]]) -> dict[str, list[dict]]:
    out: dict[str, list[dict]] = {}
    for year in sorted(trends, reverse=True):
        out[str(year)] = [
            {
                "topic": obs.topic,
                "rho": obs.rho,
                "delta": obs.delta,
                "n_window": obs.n_window,
                "trendiness": _json_score(obs.trendiness),
                "emergent": obs.emergent,
                "insufficient_history": obs.insufficient_history,
            }
            for obs in trends[year]
        ]
    return out


def summary_json(
    sink: IO[bytes],
    records: list[PaperRecord],
    centrality_results: dict[str, dict[str, CentralityResult]] | None = None,
    trends: dict[int, list[TrendObservation]] | None = None,
    relevance: RelevanceMatrix | None = None,
    generated_at: str | None = None,
    table_limit: int = 20,
) -> None:
    """Machine-readable companion to the LaTeX outputs.

    Bundles entity rankings, centrality scores, trend observations (with
    their rho/delta/N counts for auditability) and the relevance matrix.
    Keys are sorted, so output is byte-identical for identical inputs.
    Non-finite trend scores serialize as null; the counts alongside them
    always allow recomputation.
    """
    if generated_at is None:
        generated_at = datetime.now(timezone.utc).isoformat(timespec="seconds")

    rankings = {
        f"{kind}s_by_{metric}": [
            {"name": name, "value": value}
            for name, value in rank_entities(records, kind, metric)[:table_limit]
        ]
        for kind in ("author", "affiliation", "source")
        for metric in ("papers", "citations")
    }

    centrality_block: dict[str, dict] = {}
    for kind, results in (centrality_results or {}).items():
        block: dict[str, object] = {}
        for measure, result in results.items():
            block[measure] = {label: result.scores[label] for label in sorted(result.scores)}
            if result.iterations is not None:
                block[f"{measure}_iterations"] = result.iterations
                block[f"{measure}_residual"] = result.residual
                block[f"{measure}_warning"] = result.warning
        centrality_block[kind] = block

    relevance_block = None
    if relevance is not None:
        relevance_block = {
            "topics": relevance.topics,
            "papers": [
                {
                    "id": paper_id,
                    "cells": [{"score": score, "rank": rank} for score, rank in row],
                }
                for paper_id, row in zip(relevance.paper_ids, relevance.cells)
            ],
        }

    document = {
        "schema_version": "1",
        "generated_at": generated_at,
        "corpus": {
            "papers": len(records),
            "years": sorted({r.year for r in records}),
        },
        "rankings": rankings,
        "centrality": centrality_block,
        "trends": _trend_entries(trends or {}),
        "relevance": relevance_block,
    }
    text = json.dumps(document, ensure_ascii=False, indent=2, sort_keys=True, allow_nan=False)
    sink.write(text.encode("utf-8"))
    sink.write(b"\n")
