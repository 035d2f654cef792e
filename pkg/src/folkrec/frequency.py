"""Popularity baselines (MP, MP_u, MP_r, MP_u,r) and user-based CF."""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Mapping

from .corpus import TrainingIndex
from .ranking import Recommendation, mix, softmax_normalize, top_k

DEFAULT_NEIGHBORS = 20


def _counts(counts: Mapping[str, int]) -> dict[str, float]:
    return {t: float(c) for t, c in counts.items()}


def mp(index: TrainingIndex, k: int) -> Recommendation:
    """Globally most frequent tags; the same list for every query."""
    return top_k(_counts(index.tag_counts), k)


def mp_u(index: TrainingIndex, user: str, k: int) -> Recommendation:
    return top_k(_counts(index.user_tag_counts.get(user, {})), k)


def mp_r(index: TrainingIndex, resource: str, k: int) -> Recommendation:
    return top_k(_counts(index.resource_tag_counts.get(resource, {})), k)


def mp_ur(index: TrainingIndex, user: str, resource: str, k: int, beta: float = 0.5) -> Recommendation:
    """Mixture of user and resource popularity, each softmax-normalized."""
    user_part = softmax_normalize(_counts(index.user_tag_counts.get(user, {})))
    res_part = softmax_normalize(_counts(index.resource_tag_counts.get(resource, {})))
    return top_k(mix(user_part, res_part, beta), k)


# --------------------------------------------------------------------------
# collaborative filtering


class _UserProfiles:
    """Tag-frequency vectors, their norms and a tag -> users inverted index."""

    def __init__(self, index: TrainingIndex) -> None:
        self.vectors = index.user_tag_counts
        self.norms = {u: math.sqrt(sum(c * c for c in v.values())) for u, v in self.vectors.items()}
        by_tag: dict[str, list[str]] = defaultdict(list)
        for u, v in self.vectors.items():
            for t in v:
                by_tag[t].append(u)
        self.users_by_tag = {t: tuple(us) for t, us in by_tag.items()}


def _profiles(index: TrainingIndex) -> _UserProfiles:
    prof = index._cache.get("cf_profiles")
    if prof is None:
        prof = index._cache["cf_profiles"] = _UserProfiles(index)
    return prof


def prepare_cf(index: TrainingIndex) -> None:
    """Precompute CF profiles; call before sharing ``index`` across threads."""
    _profiles(index)


def neighbors(index: TrainingIndex, user: str, n: int = DEFAULT_NEIGHBORS) -> list[tuple[str, float]]:
    """The ``n`` most cosine-similar users with positive similarity.

    Ties in similarity go to the lexicographically smaller user id.
    """
    if n < 1:
        raise ValueError("neighborhood size must be >= 1")
    prof = _profiles(index)
    mine = prof.vectors.get(user)
    if not mine:
        return []
    dots: dict[str, float] = defaultdict(float)
    for t, c in mine.items():
        for v in prof.users_by_tag.get(t, ()):
            if v != user:
                dots[v] += c * prof.vectors[v][t]
    norm_u = prof.norms[user]
    sims = [(v, d / (norm_u * prof.norms[v])) for v, d in dots.items() if d > 0]
    sims.sort(key=lambda vs: (-vs[1], vs[0]))
    return sims[:n]


def cf(index: TrainingIndex, user: str, resource: str, k: int, n: int = DEFAULT_NEIGHBORS) -> Recommendation:
    """User-based CF: tags of the ``n`` nearest users, weighted by similarity.

    ``resource`` is accepted for interface symmetry; candidates come from
    the neighbors' whole profiles.
    """
    scores: dict[str, float] = defaultdict(float)
    vectors = _profiles(index).vectors
    for v, sim in neighbors(index, user, n):
        for t, c in vectors[v].items():
            scores[t] += sim * c
    return top_k(scores, k)
