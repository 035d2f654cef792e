"""Adapted PageRank and FolkRank over the user/resource/tag graph."""

from __future__ import annotations

import threading
from collections import defaultdict
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .corpus import TrainingIndex
from .ranking import Recommendation, top_k

DAMPING = 0.7
TOL = 1e-6
MAX_ITER = 100
BOOST = 0.25


class PageRankResult(NamedTuple):
    weights: np.ndarray
    iterations: int
    converged: bool


class FolksonomyGraph:
    """Undirected tripartite graph with a column-stochastic transition matrix.

    Node order is users, then resources, then tags, each sorted. Edge
    weights: user-tag = posts of the user carrying the tag, user-resource =
    tags in that post, resource-tag = users who gave the tag to the resource.
    """

    def __init__(self, index: TrainingIndex) -> None:
        folk = index.folksonomy
        self.users = sorted(folk.users)
        self.resources = sorted(folk.resources)
        self.tags = sorted(folk.tags)
        self.node_id: dict[tuple[str, str], int] = {}
        for kind, names in (("user", self.users), ("resource", self.resources), ("tag", self.tags)):
            for name in names:
                self.node_id[(kind, name)] = len(self.node_id)
        self.n = len(self.node_id)
        self.tag_offset = len(self.users) + len(self.resources)

        edges: dict[tuple[int, int], int] = defaultdict(int)
        for post in folk.posts:
            u = self.node_id[("user", post.user)]
            r = self.node_id[("resource", post.resource)]
            edges[(u, r)] += len(post.tags)
            for tag in post.tags:
                t = self.node_id[("tag", tag)]
                edges[(u, t)] += 1
                edges[(r, t)] += 1
        self.edges = dict(sorted(edges.items()))

        rows, cols, vals = [], [], []
        for (i, j), w in self.edges.items():
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        weights = sp.csc_matrix((vals, (rows, cols)), shape=(self.n, self.n), dtype=np.float64)
        degree = np.asarray(weights.sum(axis=0)).ravel()
        isolated = degree == 0
        inv = np.divide(1.0, degree, out=np.zeros_like(degree), where=~isolated)
        trans = weights @ sp.diags(inv)
        if isolated.any():
            trans = trans + sp.diags(isolated.astype(np.float64))
        self.degree = degree
        self.transition = sp.csr_matrix(trans)
        self._uniform_lock = threading.Lock()
        self._uniform: PageRankResult | None = None
        self._uniform_key: tuple | None = None

    def weight(self, a: tuple[str, str], b: tuple[str, str]) -> int:
        i, j = sorted((self.node_id[a], self.node_id[b]))
        return self.edges.get((i, j), 0)

    def uniform_preference(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n)

    def query_preference(self, user: str | None, resource: str | None, boost: float = BOOST) -> np.ndarray:
        """``boost`` mass on each known query node, the rest spread uniformly."""
        hits = [self.node_id[key] for key in (("user", user), ("resource", resource)) if key in self.node_id]
        pref = np.full(self.n, (1.0 - boost * len(hits)) / self.n)
        for i in hits:
            pref[i] += boost
        return pref

    def baseline(self, damping: float = DAMPING, tol: float = TOL, max_iter: int = MAX_ITER) -> PageRankResult:
        """Uniform-preference ranking, computed once and reused."""
        with self._uniform_lock:
            if self._uniform is None or (damping, tol, max_iter) != self._uniform_key:
                self._uniform = adapted_pagerank(self, self.uniform_preference(), damping, tol, max_iter)
                self._uniform_key = (damping, tol, max_iter)
            return self._uniform


def build_graph(index: TrainingIndex) -> FolksonomyGraph:
    graph = index._cache.get("graph")
    if graph is None:
        graph = index._cache["graph"] = FolksonomyGraph(index)
    return graph


def adapted_pagerank(
    graph: FolksonomyGraph,
    preference: np.ndarray,
    damping: float = DAMPING,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
) -> PageRankResult:
    """Iterate w <- damping * A w + (1 - damping) * p from uniform w.

    Stops once the L1 distance to the fixpoint is provably below ``tol``:
    A is L1 non-expansive, so that distance is at most
    damping / (1 - damping) times the last step.
    """
    p = np.asarray(preference, dtype=np.float64)
    if p.shape != (graph.n,) or (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("preference must be a non-negative vector summing to 1")
    if not 0 <= damping < 1:
        raise ValueError("damping must be in [0, 1)")
    factor = damping / (1.0 - damping)
    teleport = (1.0 - damping) * p
    w = np.full(graph.n, 1.0 / graph.n)
    for it in range(1, max_iter + 1):
        nxt = damping * (graph.transition @ w) + teleport
        delta = np.abs(nxt - w).sum()
        w = nxt
        if delta * factor < tol:
            return PageRankResult(w, it, True)
    return PageRankResult(w, max_iter, False)


def folkrank(
    graph: FolksonomyGraph,
    user: str,
    resource: str,
    damping: float = DAMPING,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
    boost: float = BOOST,
) -> dict[str, float]:
    """Differential tag weights: boosted-preference run minus uniform run."""
    if ("user", user) not in graph.node_id and ("resource", resource) not in graph.node_id:
        return {}
    w1 = adapted_pagerank(graph, graph.query_preference(user, resource, boost), damping, tol, max_iter).weights
    w0 = graph.baseline(damping, tol, max_iter).weights
    diff = w1[graph.tag_offset:] - w0[graph.tag_offset:]
    return dict(zip(graph.tags, diff.tolist()))


def apr_recommend(
    index: TrainingIndex,
    user: str,
    resource: str,
    k: int,
    damping: float = DAMPING,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
) -> Recommendation:
    if not index.folksonomy.posts:
        return []
    graph = build_graph(index)
    w = adapted_pagerank(graph, graph.query_preference(user, resource), damping, tol, max_iter).weights
    return top_k(dict(zip(graph.tags, w[graph.tag_offset:].tolist())), k)


def fr_recommend(
    index: TrainingIndex,
    user: str,
    resource: str,
    k: int,
    damping: float = DAMPING,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
) -> Recommendation:
    """Tags with a positive FolkRank differential, best first."""
    if not index.folksonomy.posts:
        return []
    diff = folkrank(build_graph(index), user, resource, damping, tol, max_iter)
    return top_k({t: s for t, s in diff.items() if s > 0}, k)
