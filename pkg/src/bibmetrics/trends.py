"""Topic assignment and per-year trendiness ranking.

A topic is a named set of keyword patterns.  Each pattern is a phrase that
must occur as a contiguous token run in a paper's title, keywords or
abstract; a trailing ``*`` on a pattern token matches any token with that
prefix, so ``convolution* net*`` hits "convolutional networks".

The trendiness of a topic in year y relates its paper count in y to how
common the topic was in the preceding window: rho papers this year, delta
topic papers among the N window papers, scored as rho / log2(delta / N).
As printed that ratio is negative whenever delta < N, which would rank
niche topics above hot ones, so the default "magnitude" mode scores
rho / |log2(delta / N)| and the signed "literal" form stays available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._text import record_tokens, tokenize
from .normalize import PaperRecord

__all__ = [
    "TopicVector",
    "TrendObservation",
    "DomainError",
    "compile_patterns",
    "match_topic",
    "match_tokens",
    "trendiness",
    "trend_table",
]


class DomainError(ValueError):
    """Raised for count arguments outside the valid domain."""


@dataclass(frozen=True)
class TopicVector:
    """A display name plus its match patterns."""

    name: str
    patterns: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "patterns", tuple(self.patterns))


@dataclass
class TrendObservation:
    """Counts and score for one topic in one year."""

    topic: str
    year: int
    rho: int
    delta: int
    n_window: int
    trendiness: float | None
    emergent: bool
    insufficient_history: bool = False


# A compiled pattern is a phrase of (token, is_prefix) pairs.
CompiledPattern = tuple[tuple[str, bool], ...]


def compile_patterns(patterns) -> list[CompiledPattern]:
    """Tokenize patterns, keeping trailing-``*`` prefix markers.

    Raises ValueError for patterns that tokenize to nothing, including a
    bare ``*``.
    """
    compiled: list[CompiledPattern] = []
    for pattern in patterns:
        phrase: list[tuple[str, bool]] = []
        for chunk in pattern.split():
            is_prefix = chunk.endswith("*")
            tokens = tokenize(chunk.rstrip("*"))
            if is_prefix and not tokens:
                raise ValueError(f"pattern {pattern!r}: wildcard token has no prefix")
            for i, token in enumerate(tokens):
                phrase.append((token, is_prefix and i == len(tokens) - 1))
        if not phrase:
            raise ValueError(f"pattern {pattern!r} is empty after tokenization")
        compiled.append(tuple(phrase))
    if not compiled:
        raise ValueError("topic has no patterns")
    return compiled


def _token_matches(token: str, want: str, is_prefix: bool) -> bool:
    return token.startswith(want) if is_prefix else token == want


def match_tokens(
    tokens: list[str],
    compiled: list[CompiledPattern],
    positions: dict[str, list[int]] | None = None,
) -> bool:
    """True when any compiled pattern occurs as a contiguous token run.

    ``positions`` (token -> indices) may be passed in when the same token
    list is matched against many topics.
    """
    if positions is None:
        positions = {}
        for i, token in enumerate(tokens):
            positions.setdefault(token, []).append(i)
    for phrase in compiled:
        first, first_prefix = phrase[0]
        if first_prefix:
            starts = [i for i, t in enumerate(tokens) if t.startswith(first)]
        else:
            starts = positions.get(first, [])
        for start in starts:
            if start + len(phrase) > len(tokens):
                continue
            if all(
                _token_matches(tokens[start + k], want, pref)
                for k, (want, pref) in enumerate(phrase)
            ):
                return True
    return False


def match_topic(record: PaperRecord, topic: TopicVector) -> bool:
    """Does the record's title/keywords/abstract text contain the topic?"""
    return match_tokens(record_tokens(record), compile_patterns(topic.patterns))


def trendiness(
    rho: int,
    delta: int,
    n_window: int,
    mode: str = "magnitude",
    smoothing: bool = False,
) -> float:
    """Score one topic-year cell from its counts.

    Edge rules: rho = 0 scores 0; delta = 0 scores 0 (the topic is emergent,
    absent from the window); delta = n_window returns +inf, which ranks
    above every finite score.  With ``smoothing`` the ratio becomes
    (delta + 0.5) / (n_window + 1) and both delta edges turn finite.
    """
    if mode not in ("magnitude", "literal"):
        raise ValueError(f"unknown trendiness mode: {mode!r}")
    if n_window < 1:
        raise DomainError(f"window paper count must be >= 1, got {n_window}")
    if rho < 0 or delta < 0:
        raise DomainError("counts must be non-negative")
    if delta > n_window:
        raise DomainError(f"delta ({delta}) exceeds window size ({n_window})")

    if rho == 0:
        return 0.0
    if smoothing:
        ratio = (delta + 0.5) / (n_window + 1)
    else:
        if delta == 0:
            return 0.0
        if delta == n_window:
            return math.inf
        ratio = delta / n_window
    log = math.log2(ratio)
    return rho / log if mode == "literal" else rho / abs(log)


def _rank_key(obs: TrendObservation) -> tuple:
    score = obs.trendiness if obs.trendiness is not None else -math.inf
    return (-score, -obs.rho, obs.topic)


def trend_table(
    records: list[PaperRecord],
    topics: list[TopicVector],
    window_years: int = 3,
    top_k: int = 4,
    mode: str = "magnitude",
    inclusive_window: bool = False,
    smoothing: bool = False,
    restrict_window: bool = False,
    tokens: list[list[str]] | None = None,
) -> dict[int, list[TrendObservation]]:
    """Ranked trend observations for every year in the corpus.

    For each year, rho counts that year's topic papers and the lookback
    window covers the ``window_years`` preceding years (the focal year too
    when ``inclusive_window``).  N counts all window papers, or only papers
    matching at least one topic when ``restrict_window``.  Years whose
    window is empty are flagged as having insufficient history.  Rankings
    break score ties by higher rho, then name; ``top_k`` entries are kept
    per year.  Output years are in descending order.
    """
    if window_years < 1:
        raise ValueError("window_years must be positive")
    if top_k < 1:
        raise ValueError("top_k must be positive")
    names = [t.name for t in topics]
    if len(set(names)) != len(names):
        raise ValueError("topic names must be unique")

    if tokens is None:
        tokens = [record_tokens(r) for r in records]
    compiled = [compile_patterns(t.patterns) for t in topics]
    matched: list[list[bool]] = []
    for token_list in tokens:
        positions: dict[str, list[int]] = {}
        for i, token in enumerate(token_list):
            positions.setdefault(token, []).append(i)
        matched.append([match_tokens(token_list, c, positions) for c in compiled])

    per_year_total: dict[int, int] = {}
    per_year_matches: dict[int, list[int]] = {}
    for record, flags in zip(records, matched):
        year = record.year
        if year not in per_year_total:
            per_year_total[year] = 0
            per_year_matches[year] = [0] * len(topics)
        if not restrict_window or any(flags):
            per_year_total[year] += 1
        for t, flag in enumerate(flags):
            if flag:
                per_year_matches[year][t] += 1

    result: dict[int, list[TrendObservation]] = {}
    for year in sorted(per_year_total, reverse=True):
        if inclusive_window:
            window = range(year - window_years + 1, year + 1)
        else:
            window = range(year - window_years, year)
        n_window = sum(per_year_total.get(y, 0) for y in window)
        observations = []
        for t, topic in enumerate(topics):
            rho = per_year_matches[year][t]
            delta = sum(per_year_matches.get(y, [0] * len(topics))[t] for y in window)
            if n_window == 0:
                observations.append(
                    TrendObservation(
                        topic=topic.name,
                        year=year,
                        rho=rho,
                        delta=0,
                        n_window=0,
                        trendiness=None,
                        emergent=True,
                        insufficient_history=True,
                    )
                )
            else:
                score = trendiness(rho, delta, n_window, mode=mode, smoothing=smoothing)
                observations.append(
                    TrendObservation(
                        topic=topic.name,
                        year=year,
                        rho=rho,
                        delta=delta,
                        n_window=n_window,
                        trendiness=score,
                        emergent=delta == 0,
                    )
                )
        observations.sort(key=_rank_key)
        result[year] = observations[:top_k]
    return result
