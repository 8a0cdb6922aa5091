"""Shared builders for graphs and synthetic corpora."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from bibmetrics.graph import CollaborationGraph, GraphEdge, GraphNode
from bibmetrics.normalize import Affiliation, PaperRecord

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


def make_graph(labels, edges, kind="author") -> CollaborationGraph:
    """Graph from label string/list plus (u, v[, weight]) index tuples."""
    nodes = [GraphNode(label=str(l), papers=1, citations=0) for l in labels]
    built = []
    for edge in edges:
        u, v, w = edge if len(edge) == 3 else (*edge, 1)
        if u > v:
            u, v = v, u
        built.append(GraphEdge(u, v, w))
    return CollaborationGraph(entity_kind=kind, nodes=nodes, edges=built)


def random_graph(rng: random.Random, max_n=8, weighted=False):
    """Random undirected graph as (n, [(u, v, w)]) with u < v."""
    n = rng.randint(1, max_n)
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < rng.choice((0.2, 0.4, 0.6)):
                w = rng.randint(1, 5) if weighted else 1
                edges.append((u, v, w))
    return n, edges


_FIRST = ["Maria", "Wei", "Chidi", "Petra", "John", "Yuki", "Hans", "Elena", "Amir", "Lena"]
_LAST = ["Alvarez", "Chen", "Okafor", "Novak", "Smith", "Tanaka", "Weber", "Rossi", "Karimi", "Berg"]
_TOPIC_PHRASES = [
    "digital twin", "deep learning", "machine learning", "blockchain",
    "computer vision", "convolutional networks", "reinforcement learning", "5G",
]
_DOMAIN_PHRASES = ["smart manufacturing", "production line", "smart factory", "manufacturing system"]
_SOURCES = [
    "Journal of Smart Systems", "Automation Letters", "Industrial Computing",
    "Applied Factory Science", "Sensors and Systems",
]
_COUNTRIES = ["USA", "Canada", "China", "Germany", "South Korea", "Japan"]


def make_paper(i, year, authors, institutions=None, countries=None, source=None,
               times_cited=0, title=None, abstract=None, keywords=(), doi=None):
    institutions = institutions or []
    countries = countries or ["USA"] * len(institutions)
    return PaperRecord(
        id=doi or f"paper-{i:05d}",
        title=title or f"Study {i}",
        doi=doi,
        abstract=abstract,
        year=year,
        source=source or "",
        publisher=None,
        authors=list(authors),
        affiliations=[
            Affiliation(institution=inst, country=country, linked_authors=[])
            for inst, country in zip(institutions, countries)
        ],
        keywords=list(keywords),
        times_cited=times_cited,
    )


def random_corpus(rng: random.Random, n_papers, n_authors=24, n_institutions=8,
                  n_sources=5, years=(2015, 2021), with_text=False):
    """Synthetic cleaned corpus with collaboration structure and topic text."""
    author_pool = [f"{last}, {first}" for last in _LAST for first in _FIRST][:n_authors]
    institution_pool = [f"Inst {chr(65 + i)} Technol" for i in range(n_institutions)]
    papers = []
    for i in range(n_papers):
        team = rng.sample(author_pool, rng.randint(1, min(4, n_authors)))
        n_aff = rng.randint(1, min(3, n_institutions))
        institutions = rng.sample(institution_pool, n_aff)
        countries = [rng.choice(_COUNTRIES) for _ in institutions]
        title = None
        abstract = None
        keywords = ()
        if with_text:
            domain = rng.choice(_DOMAIN_PHRASES)
            methods = rng.sample(_TOPIC_PHRASES, rng.randint(1, 3))
            title = f"{methods[0].title()} for {domain} applications {i}"
            abstract = (
                f"We study {domain} scenarios using {' and '.join(methods)}. "
                f"Results on case {i} show improvements."
            )
            keywords = tuple(methods)
        papers.append(
            make_paper(
                i,
                year=rng.randint(*years),
                authors=team,
                institutions=institutions,
                countries=countries,
                source=rng.choice(_SOURCES[:n_sources]),
                times_cited=rng.randint(0, 40),
                title=title,
                abstract=abstract,
                keywords=keywords,
            )
        )
    return papers
