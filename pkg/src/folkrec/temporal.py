"""Time-aware recommenders.

BLL scores each tag in a user's history by its base-level activation, the
log of a power-law-decayed sum over every past usage. BLL+C blends that
with the resource's tag popularity. GIRP and GIRPTM are the exponential,
first/last-usage baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import TrainingIndex
from .frequency import _counts
from .ranking import Recommendation, mix, softmax_normalize, top_k


@dataclass(frozen=True)
class DecayParams:
    """
    d: power-law decay exponent of the activation.
    min_recency: recencies are clamped to at least this many seconds.
    beta: weight of the user component in the hybrids.
    lam: exponential decay rate (per second) for GIRP.
    """

    d: float = 0.5
    min_recency: float = 1.0
    beta: float = 0.5
    lam: float = 1 / 86400

    def __post_init__(self) -> None:
        if self.d < 0:
            raise ValueError("d must be >= 0")
        if self.min_recency < 1:
            raise ValueError("min_recency must be >= 1")
        if not 0 <= self.beta <= 1:
            raise ValueError("beta must be in [0, 1]")
        if not self.lam > 0:
            raise ValueError("lam must be > 0")


DEFAULT_PARAMS = DecayParams()


def activation(timestamps, ref_time: float, d: float = 0.5, min_recency: float = 1.0) -> float:
    """ln(sum_i max(ref_time - t_i, min_recency) ** -d)."""
    if not timestamps:
        raise ValueError("activation needs at least one usage")
    return math.log(math.fsum(max(ref_time - t, min_recency) ** -d for t in timestamps))


def bla(
    index: TrainingIndex, user: str, tag: str, ref_time: float, params: DecayParams = DEFAULT_PARAMS
) -> float | None:
    """Base-level activation of ``tag`` for ``user``; None if never used."""
    times = index.tag_times(user, tag)
    if not times:
        return None
    return activation(times, ref_time, params.d, params.min_recency)


def bll_scores(
    index: TrainingIndex, user: str, ref_time: float, params: DecayParams = DEFAULT_PARAMS
) -> dict[str, float]:
    """Softmax-normalized activations over the user's distinct tags."""
    history = index.user_tag_times.get(user, {})
    return softmax_normalize(
        {t: activation(ts, ref_time, params.d, params.min_recency) for t, ts in history.items()}
    )


def resource_scores(index: TrainingIndex, resource: str) -> dict[str, float]:
    return softmax_normalize(_counts(index.resource_tag_counts.get(resource, {})))


def bll_recommend(
    index: TrainingIndex, user: str, ref_time: float, k: int, params: DecayParams = DEFAULT_PARAMS
) -> Recommendation:
    return top_k(bll_scores(index, user, ref_time, params), k)


def bll_c_recommend(
    index: TrainingIndex,
    user: str,
    resource: str,
    ref_time: float,
    k: int,
    params: DecayParams = DEFAULT_PARAMS,
) -> Recommendation:
    scores = mix(bll_scores(index, user, ref_time, params), resource_scores(index, resource), params.beta)
    return top_k(scores, k)


# --------------------------------------------------------------------------
# GIRP


def girp_log_raw(times, ref_time: float, lam: float, min_recency: float = 1.0) -> float:
    """log of n * (exp(-lam * rec_last) + exp(-lam * rec_first)) / 2.

    Kept in the log domain: for recencies of a few years the exponentials
    underflow and every tag would tie at zero.
    """
    n = len(times)
    if n == 0:
        raise ValueError("girp needs at least one usage")
    first = max(ref_time - min(times), min_recency)
    last = max(ref_time - max(times), min_recency)
    a, b = -lam * last, -lam * first
    return math.log(n) + max(a, b) + math.log1p(math.exp(-abs(a - b))) - math.log(2)


def girp_scores(
    index: TrainingIndex, user: str, ref_time: float, params: DecayParams = DEFAULT_PARAMS
) -> dict[str, float]:
    """Normalized GIRP weights: raw / sum(raw), i.e. softmax of log raw."""
    history = index.user_tag_times.get(user, {})
    return softmax_normalize(
        {t: girp_log_raw(ts, ref_time, params.lam, params.min_recency) for t, ts in history.items()}
    )


def girp_recommend(
    index: TrainingIndex, user: str, ref_time: float, k: int, params: DecayParams = DEFAULT_PARAMS
) -> Recommendation:
    return top_k(girp_scores(index, user, ref_time, params), k)


def girptm_recommend(
    index: TrainingIndex,
    user: str,
    resource: str,
    ref_time: float,
    k: int,
    params: DecayParams = DEFAULT_PARAMS,
) -> Recommendation:
    scores = mix(girp_scores(index, user, ref_time, params), resource_scores(index, resource), params.beta)
    return top_k(scores, k)
