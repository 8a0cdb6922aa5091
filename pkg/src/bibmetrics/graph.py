"""Weighted undirected collaboration networks over cleaned records.

Three entity kinds are supported: authors, institutions and countries.
Each paper contributes one node per distinct entity it mentions and one
unit of edge weight per unordered entity pair, so an edge weight counts the
papers in which both endpoints co-occur.  Entities appearing alone in a
paper still become nodes, which keeps per-node paper and citation counts
consistent with the ranking tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .normalize import PaperRecord

__all__ = ["ENTITY_KINDS", "GraphNode", "GraphEdge", "CollaborationGraph", "build_graph", "degree_stats"]

ENTITY_KINDS = ("author", "institution", "country")


@dataclass
class GraphNode:
    label: str
    papers: int
    citations: int


@dataclass(frozen=True)
class GraphEdge:
    u: int
    v: int
    weight: int


@dataclass
class CollaborationGraph:
    entity_kind: str
    nodes: list[GraphNode]
    edges: list[GraphEdge]

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    def labels(self) -> list[str]:
        return [node.label for node in self.nodes]


def _entities(record: PaperRecord, kind: str) -> list[str]:
    if kind == "author":
        values = record.authors
    elif kind == "institution":
        values = [a.institution for a in record.affiliations]
    elif kind == "country":
        values = [a.country for a in record.affiliations]
    else:
        raise ValueError(f"unknown entity kind: {kind!r}")
    # Distinct set, first-appearance order: no self-loops, no double counting.
    return list(dict.fromkeys(v for v in values if v))


def build_graph(records: list[PaperRecord], kind: str) -> CollaborationGraph:
    """Build the collaboration graph for one entity kind.

    Node indices follow first appearance in record order; each unordered
    pair is stored once with u < v.
    """
    index: dict[str, int] = {}
    nodes: list[GraphNode] = []
    weights: dict[tuple[int, int], int] = {}

    for record in records:
        entities = _entities(record, kind)
        ids = []
        for label in entities:
            i = index.get(label)
            if i is None:
                i = len(nodes)
                index[label] = i
                nodes.append(GraphNode(label=label, papers=0, citations=0))
            nodes[i].papers += 1
            nodes[i].citations += record.times_cited
            ids.append(i)
        for a, b in combinations(ids, 2):
            key = (a, b) if a < b else (b, a)
            weights[key] = weights.get(key, 0) + 1

    edges = [GraphEdge(u, v, w) for (u, v), w in weights.items()]
    return CollaborationGraph(entity_kind=kind, nodes=nodes, edges=edges)


def degree_stats(g: CollaborationGraph) -> list[tuple[int, int]]:
    """Per-node (degree, weighted degree), aligned with ``g.nodes``."""
    degree = [0] * g.n
    weighted = [0] * g.n
    for edge in g.edges:
        degree[edge.u] += 1
        degree[edge.v] += 1
        weighted[edge.u] += edge.weight
        weighted[edge.v] += edge.weight
    return list(zip(degree, weighted))
