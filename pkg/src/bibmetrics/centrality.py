"""Betweenness and PageRank scores for collaboration graphs.

Betweenness counts, for every node, the fraction of all-pairs shortest
paths passing through it; the normalized variant divides by the maximum
possible value (n-1)(n-2)/2.  The default treats edges as unit hops, since
collaboration weight measures strength rather than distance; weighted mode
uses distance 1/weight.  Weighted shortest paths are compared with exact
integer arithmetic (all 1/w distances are scaled by the weight LCM), so
equal-length paths can never be missed to floating-point rounding.

PageRank iterates the damped random walk from a uniform start until the L1
change drops below tolerance.  Undirected edges act as two directed links;
isolated nodes redistribute their mass uniformly, which keeps the score sum
at exactly 1.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import CollaborationGraph

__all__ = ["CentralityResult", "betweenness", "pagerank"]


@dataclass
class CentralityResult:
    kind: str
    scores: dict[str, float]
    normalized: bool
    params: dict = field(default_factory=dict)
    iterations: int | None = None
    residual: float | None = None
    warning: str | None = None


def _directed_arrays(g: CollaborationGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Each undirected edge as two directed (src, dst, weight) entries."""
    m = g.m
    src = np.empty(2 * m, dtype=np.int64)
    dst = np.empty(2 * m, dtype=np.int64)
    wgt = np.empty(2 * m, dtype=np.int64)
    for i, e in enumerate(g.edges):
        src[i], dst[i], wgt[i] = e.u, e.v, e.weight
        src[m + i], dst[m + i], wgt[m + i] = e.v, e.u, e.weight
    return src, dst, wgt


def _csr(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(src, kind="stable")
    indices = dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices


def _accumulate_source_bfs(
    s: int, indptr: np.ndarray, indices: np.ndarray, n: int, bc: np.ndarray
) -> None:
    """One Brandes pass: BFS shortest-path counts, then dependency sweep."""
    dist = np.full(n, -1, dtype=np.int64)
    sigma = np.zeros(n)
    dist[s] = 0
    sigma[s] = 1.0
    frontier = np.array([s], dtype=np.int64)
    stages: list[tuple[np.ndarray, np.ndarray]] = []
    level = 0
    while frontier.size:
        counts = indptr[frontier + 1] - indptr[frontier]
        total = int(counts.sum())
        if total == 0:
            break
        heads = np.cumsum(counts) - counts
        offsets = np.arange(total, dtype=np.int64) - np.repeat(heads, counts)
        epos = np.repeat(indptr[frontier], counts) + offsets
        nbrs = indices[epos]
        srcs = np.repeat(frontier, counts)
        fresh = nbrs[dist[nbrs] == -1]
        dist[fresh] = level + 1
        mask = dist[nbrs] == level + 1
        if not mask.any():
            break
        stage_src, stage_dst = srcs[mask], nbrs[mask]
        sigma += np.bincount(stage_dst, weights=sigma[stage_src], minlength=n)
        stages.append((stage_src, stage_dst))
        frontier = np.unique(stage_dst)
        level += 1

    delta = np.zeros(n)
    for stage_src, stage_dst in reversed(stages):
        contrib = sigma[stage_src] / sigma[stage_dst] * (1.0 + delta[stage_dst])
        delta += np.bincount(stage_src, weights=contrib, minlength=n)
    delta[s] = 0.0
    bc += delta


def _accumulate_source_dijkstra(
    s: int, adjacency: list[list[tuple[int, int]]], n: int, bc: np.ndarray
) -> None:
    """One Brandes pass with integer edge lengths (exact tie detection)."""
    dist: list[int | None] = [None] * n
    seen: dict[int, int] = {s: 0}
    sigma = [0.0] * n
    sigma[s] = 1.0
    preds: list[list[int]] = [[] for _ in range(n)]
    heap: list[tuple[int, int, int]] = [(0, s, s)]
    order: list[int] = []

    while heap:
        d, _, v = heapq.heappop(heap)
        if dist[v] is not None:
            continue
        dist[v] = d
        order.append(v)
        for w, length in adjacency[v]:
            if dist[w] is not None:
                continue
            nd = d + length
            best = seen.get(w)
            if best is None or nd < best:
                seen[w] = nd
                heapq.heappush(heap, (nd, v, w))
                sigma[w] = sigma[v]
                preds[w] = [v]
            elif nd == best:
                sigma[w] += sigma[v]
                preds[w].append(v)

    delta = [0.0] * n
    for w in reversed(order):
        for v in preds[w]:
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
        if w != s:
            bc[w] += delta[w]


def betweenness(
    g: CollaborationGraph, normalized: bool = True, weighted: bool = False
) -> CentralityResult:
    """Betweenness centrality of every node.

    Raw scores sum pair dependencies over unordered pairs; normalization
    multiplies by 2/((n-1)(n-2)) and is degenerate for n < 3, where all
    scores are reported as 0.
    """
    n = g.n
    if n < 1:
        raise ValueError("graph has no nodes")
    bc = np.zeros(n)

    if g.m > 0 and n >= 3:
        if weighted:
            scale = math.lcm(*{e.weight for e in g.edges})
            adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
            for e in g.edges:
                length = scale // e.weight
                adjacency[e.u].append((e.v, length))
                adjacency[e.v].append((e.u, length))
            for s in range(n):
                _accumulate_source_dijkstra(s, adjacency, n, bc)
        else:
            src, dst, _ = _directed_arrays(g)
            indptr, indices = _csr(n, src, dst)
            for s in range(n):
                _accumulate_source_bfs(s, indptr, indices, n, bc)

    bc /= 2.0  # each unordered pair was visited from both endpoints
    if normalized:
        if n >= 3:
            bc *= 2.0 / ((n - 1) * (n - 2))
        else:
            bc[:] = 0.0

    scores = {node.label: float(bc[i]) for i, node in enumerate(g.nodes)}
    return CentralityResult(
        kind="betweenness",
        scores=scores,
        normalized=normalized,
        params={"normalized": normalized, "weighted": weighted},
    )


def pagerank(
    g: CollaborationGraph,
    d: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 200,
    weighted: bool = False,
) -> CentralityResult:
    """Damped random-walk scores, summing to 1.

    Each node starts at 1/n and spreads its value along incident edges,
    evenly by default or weight-proportionally in weighted mode.  d = 1.0 is
    the undamped update; it is accepted but may oscillate on bipartite
    components, which is then reported through the warning field.
    """
    n = g.n
    if n < 1:
        raise ValueError("graph has no nodes")
    if not 0.0 < d <= 1.0:
        raise ValueError(f"damping must be in (0, 1], got {d}")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")

    src, dst, wgt = _directed_arrays(g)
    out = np.bincount(src, weights=wgt.astype(float) if weighted else None, minlength=n)
    dangling = np.flatnonzero(out == 0)
    if src.size:
        coef = (wgt.astype(float) if weighted else np.ones(src.size)) / out[src]
    else:
        coef = np.zeros(0)

    pr = np.full(n, 1.0 / n)
    iterations = 0
    residual = 0.0
    for iterations in range(1, max_iter + 1):
        flow = np.bincount(dst, weights=pr[src] * coef, minlength=n) if src.size else np.zeros(n)
        lost = pr[dangling].sum() / n if dangling.size else 0.0
        new = (1.0 - d) / n + d * (flow + lost)
        residual = float(np.abs(new - pr).sum())
        pr = new
        if residual < tol:
            break

    warning = None
    if residual >= tol:
        warning = f"did not converge in {max_iter} iterations (residual {residual:.3e})"

    scores = {node.label: float(pr[i]) for i, node in enumerate(g.nodes)}
    return CentralityResult(
        kind="pagerank",
        scores=scores,
        normalized=True,
        params={"damping": d, "tol": tol, "max_iter": max_iter, "weighted": weighted},
        iterations=iterations,
        residual=residual,
        warning=warning,
    )
