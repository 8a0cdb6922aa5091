"""Independent reference implementations used as test oracles.

Nothing in here shares code with the package: betweenness enumerates every
shortest path explicitly, PageRank iterates a dense matrix, BM25 is a
direct scalar evaluation over raw token lists, and the DOT reader is a
small standalone grammar.  Weighted path lengths use exact fractions so
tie detection can never be lost to floating-point rounding.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

import numpy as np


# -- betweenness by exhaustive shortest-path enumeration ---------------------

def _all_shortest_paths(adjacency, s, t):
    """Every minimum-length simple path from s to t (DFS with pruning)."""
    best: list = [None]
    paths: list[list[int]] = []

    def dfs(node, dist, path, visited):
        if best[0] is not None and dist > best[0]:
            return
        if node == t:
            if best[0] is None or dist < best[0]:
                best[0] = dist
                paths.clear()
            if dist == best[0]:
                paths.append(list(path))
            return
        for nbr, length in adjacency[node]:
            if nbr in visited:
                continue
            visited.add(nbr)
            path.append(nbr)
            dfs(nbr, dist + length, path, visited)
            path.pop()
            visited.discard(nbr)

    dfs(s, 0, [s], {s})
    return paths


def brute_betweenness(n, edges, normalized=True, weighted=False):
    """Betweenness over unordered pairs by enumerating all shortest paths.

    ``edges`` is a list of (u, v, weight) with u < v.
    """
    adjacency = [[] for _ in range(n)]
    for u, v, w in edges:
        length = Fraction(1, w) if weighted else 1
        adjacency[u].append((v, length))
        adjacency[v].append((u, length))

    bc = [0.0] * n
    for s in range(n):
        for t in range(s + 1, n):
            paths = _all_shortest_paths(adjacency, s, t)
            if not paths:
                continue
            through = [0] * n
            for path in paths:
                for node in path[1:-1]:
                    through[node] += 1
            for i in range(n):
                if i != s and i != t and through[i]:
                    bc[i] += through[i] / len(paths)
    if normalized:
        if n >= 3:
            factor = 2.0 / ((n - 1) * (n - 2))
            bc = [x * factor for x in bc]
        else:
            bc = [0.0] * n
    return bc


# -- PageRank by dense power iteration ----------------------------------------

def dense_pagerank(n, edges, d=0.85, weighted=False, tol=1e-14, max_iter=5000):
    """Stationary scores from an explicitly built dense transition matrix."""
    M = np.zeros((n, n))
    strength = np.zeros(n)
    for u, v, w in edges:
        gain = w if weighted else 1
        strength[u] += gain
        strength[v] += gain
    for u, v, w in edges:
        gain = w if weighted else 1
        M[v, u] = gain / strength[u]   # u sends to v
        M[u, v] = gain / strength[v]
    for j in range(n):
        if strength[j] == 0:
            M[:, j] = 1.0 / n
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        new = (1.0 - d) / n + d * (M @ x)
        if np.abs(new - x).sum() < tol:
            return new
        x = new
    return x


# -- BM25 by direct scalar evaluation -----------------------------------------

def scalar_bm25(doc_index, docs, query, k1, b):
    """Direct evaluation over raw token lists, no index structures."""
    N = len(docs)
    doc = docs[doc_index]
    avgdl = sum(len(d) for d in docs) / N
    score = 0.0
    for term in query:
        df = sum(1 for d in docs if term in d)
        idf = math.log((N - df + 0.5) / (df + 0.5) + 1.0)
        tf = doc.count(term)
        if tf == 0:
            continue
        score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len(doc) / avgdl))
    return score


# -- standalone DOT reader -----------------------------------------------------

_DOT_ID = r'"(?:[^"\\]|\\.)*"'
_DOT_NODE = re.compile(rf"^\s*({_DOT_ID})\s*(?:\[[^\]]*\])?\s*;\s*$")
_DOT_EDGE = re.compile(rf"^\s*({_DOT_ID})\s*--\s*({_DOT_ID})\s*(?:\[[^\]]*\])?\s*;\s*$")


def _dot_unquote(text):
    return text[1:-1].replace('\\"', '"').replace("\\\\", "\\")


def parse_dot(text):
    """Node labels and edge label pairs of an undirected DOT graph."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("graph") or lines[-1].rstrip() != "}":
        raise ValueError("not an undirected DOT graph")
    nodes, edge_pairs = [], []
    for line in lines[1:-1]:
        if not line.strip():
            continue
        edge = _DOT_EDGE.match(line)
        if edge:
            edge_pairs.append((_dot_unquote(edge.group(1)), _dot_unquote(edge.group(2))))
            continue
        node = _DOT_NODE.match(line)
        if node:
            nodes.append(_dot_unquote(node.group(1)))
            continue
        raise ValueError(f"unparseable DOT line: {line!r}")
    return nodes, edge_pairs


# -- structural LaTeX fragment checks ------------------------------------------

_UNESCAPED = re.compile(r"(?<!\\)[&%_#]")
_COLSPEC = {"l", "c", "r"}


def check_latex_fragment(text):
    """Validate a table fragment: balanced environments and braces,
    consistent row widths, no unescaped special characters in cells.

    Returns the list of environments seen.  Raises AssertionError on any
    violation, mirroring what a LaTeX compile of the fragment inside a
    minimal booktabs document would reject.
    """
    stack, seen = [], []
    for kind, env in re.findall(r"\\(begin|end)\{(\w+)\}", text):
        if kind == "begin":
            stack.append(env)
            seen.append(env)
        else:
            assert stack and stack[-1] == env, f"unbalanced \\end{{{env}}}"
            stack.pop()
    assert not stack, f"unclosed environments: {stack}"

    depth = 0
    for match in re.finditer(r"(?<!\\)[{}]", text):
        depth += 1 if match.group() == "{" else -1
        assert depth >= 0, "closing brace before opening brace"
    assert depth == 0, "unbalanced braces"

    spec_match = re.search(r"\\begin\{tabular\}\{([^}]*)\}", text)
    if spec_match:
        ncols = sum(1 for ch in spec_match.group(1) if ch in _COLSPEC)
        body = text[spec_match.end():]
        body = body[: body.index(r"\end{tabular}")]
        for line in body.splitlines():
            line = line.strip()
            if not line.endswith(r"\\"):
                continue
            row = line[:-2]
            cells = re.split(r"(?<!\\)&", row)
            assert len(cells) == ncols, f"row has {len(cells)} cells, colspec has {ncols}: {row!r}"
            for cell in cells:
                plain = re.sub(r"\\(textbf|textit|caption|label)\{", "{", cell)
                bad = _UNESCAPED.search(plain)
                assert bad is None, f"unescaped {bad.group()!r} in cell {cell!r}"
    return seen
