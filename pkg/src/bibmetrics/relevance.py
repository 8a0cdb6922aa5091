"""Okapi BM25 relevance of every paper against each topic keyword vector.

Documents are the token streams of title, keywords and abstract.  A topic's
query is the bag of its pattern tokens, with trailing-``*`` wildcards
expanded against the corpus vocabulary at scoring time.  The IDF variant is
the non-negative ln((N - n + 0.5)/(n + 0.5) + 1) so scores stay comparable
across topics.  No stemming or stopword removal is applied; scores remain
auditable against a direct evaluation of the formula.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field

from ._text import record_tokens, tokenize
from .normalize import PaperRecord
from .trends import CompiledPattern, TopicVector, compile_patterns

__all__ = [
    "DocVector",
    "CorpusStats",
    "Bm25Params",
    "RelevanceMatrix",
    "EmptyCorpus",
    "tokenize",
    "build_doc",
    "build_stats",
    "idf",
    "bm25_score",
    "expand_query",
    "relevance_matrix",
]


class EmptyCorpus(Exception):
    """Raised when scoring is attempted without any document text."""


# Optional filter; scoring keeps every token by default so results stay
# auditable against the formula.
STOPWORDS = frozenset(
    "a an and are as at be but by for from has have in is it its of on or "
    "that the this to was we were with our".split()
)


@dataclass
class DocVector:
    paper_id: str
    tokens: list[str]
    length: int

    def term_counts(self) -> Counter:
        counts = self.__dict__.get("_term_counts")
        if counts is None:
            counts = Counter(self.tokens)
            self.__dict__["_term_counts"] = counts
        return counts


@dataclass
class CorpusStats:
    doc_count: int
    avgdl: float
    doc_freq: dict[str, int]
    # Sorted vocabulary, kept for wildcard prefix expansion.
    vocabulary: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 <= 0:
            raise ValueError(f"k1 must be positive, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


def build_doc(record: PaperRecord, drop_stopwords: bool = False) -> DocVector:
    tokens = record_tokens(record)
    if drop_stopwords:
        tokens = [t for t in tokens if t not in STOPWORDS]
    return DocVector(paper_id=record.id, tokens=tokens, length=len(tokens))


def build_stats(docs: list[DocVector]) -> CorpusStats:
    doc_freq: dict[str, int] = {}
    total_length = 0
    for doc in docs:
        total_length += doc.length
        for token in set(doc.tokens):
            doc_freq[token] = doc_freq.get(token, 0) + 1
    doc_count = len(docs)
    avgdl = total_length / doc_count if doc_count else 0.0
    return CorpusStats(
        doc_count=doc_count,
        avgdl=avgdl,
        doc_freq=doc_freq,
        vocabulary=sorted(doc_freq),
    )


def idf(term: str, stats: CorpusStats) -> float:
    n = stats.doc_freq.get(term, 0)
    return math.log((stats.doc_count - n + 0.5) / (n + 0.5) + 1.0)


def bm25_score(
    doc: DocVector,
    query_terms: list[str],
    stats: CorpusStats,
    params: Bm25Params = Bm25Params(),
) -> float:
    """Sum of per-term BM25 contributions of the query against one document.

    Terms absent from the document contribute 0; a term repeated in the
    query contributes once per occurrence.
    """
    if stats.doc_count == 0 or stats.avgdl == 0:
        raise EmptyCorpus("corpus has no documents or no tokens")
    counts = doc.term_counts()
    norm = params.k1 * (1.0 - params.b + params.b * doc.length / stats.avgdl)
    score = 0.0
    for term in query_terms:
        tf = counts.get(term, 0)
        if tf == 0:
            continue
        score += idf(term, stats) * tf * (params.k1 + 1.0) / (tf + norm)
    return score


def _expand_prefix(prefix: str, vocabulary: list[str]) -> list[str]:
    lo = bisect_left(vocabulary, prefix)
    hi = lo
    while hi < len(vocabulary) and vocabulary[hi].startswith(prefix):
        hi += 1
    return vocabulary[lo:hi]


def expand_query(compiled: list[CompiledPattern], stats: CorpusStats) -> list[str]:
    """Flatten compiled patterns into query terms, expanding wildcards
    against the corpus vocabulary (matches in sorted order)."""
    terms: list[str] = []
    for phrase in compiled:
        for token, is_prefix in phrase:
            if is_prefix:
                terms.extend(_expand_prefix(token, stats.vocabulary))
            else:
                terms.append(token)
    return terms


@dataclass
class RelevanceMatrix:
    """Per-paper, per-topic (score, rank) cells; rank is the dense rank of
    the topic within the paper's row and is omitted for zero scores."""

    paper_ids: list[str]
    topics: list[str]
    cells: list[list[tuple[float, int | None]]]


def _rank_row(scores: list[float]) -> list[tuple[float, int | None]]:
    distinct = sorted({s for s in scores if s > 0.0}, reverse=True)
    rank_of = {s: i + 1 for i, s in enumerate(distinct)}
    return [(s, rank_of[s]) if s > 0.0 else (s, None) for s in scores]


def relevance_matrix(
    records: list[PaperRecord],
    topics: list[TopicVector],
    params: Bm25Params = Bm25Params(),
    docs: list[DocVector] | None = None,
    drop_stopwords: bool = False,
) -> RelevanceMatrix:
    """Score every record against every topic keyword vector."""
    if not records:
        raise EmptyCorpus("no records to score")
    if docs is None:
        docs = [build_doc(r, drop_stopwords) for r in records]
    stats = build_stats(docs)
    if stats.avgdl == 0:
        raise EmptyCorpus("corpus has no tokens")
    queries = [expand_query(compile_patterns(t.patterns), stats) for t in topics]
    if drop_stopwords:
        queries = [[t for t in q if t not in STOPWORDS] for q in queries]
    cells = []
    for doc in docs:
        row = [bm25_score(doc, query, stats, params) for query in queries]
        cells.append(_rank_row(row))
    return RelevanceMatrix(
        paper_ids=[doc.paper_id for doc in docs],
        topics=[t.name for t in topics],
        cells=cells,
    )
