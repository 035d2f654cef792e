"""Shared ranking and normalization helpers."""

from __future__ import annotations

import math
from typing import Mapping

Recommendation = list[tuple[str, float]]


def top_k(scores: Mapping[str, float], k: int) -> Recommendation:
    """The ``k`` best (tag, score) pairs: score descending, then tag ascending."""
    if k <= 0:
        return []
    ranked = sorted(scores.items(), key=lambda ts: (-ts[1], ts[0]))
    return ranked[:k]


def softmax_normalize(scores: Mapping[str, float]) -> dict[str, float]:
    """exp(s_t) / sum exp(s_t'), shifted by the max for stability."""
    if not scores:
        return {}
    top = max(scores.values())
    if not math.isfinite(top):
        raise ValueError("scores must be finite")
    exps = {t: math.exp(s - top) for t, s in scores.items()}
    total = math.fsum(exps.values())
    return {t: e / total for t, e in exps.items()}


def mix(
    first: Mapping[str, float], second: Mapping[str, float], weight: float
) -> dict[str, float]:
    """weight * first + (1 - weight) * second over the union of keys.

    A side with zero weight contributes no candidates at all.
    """
    if not 0 <= weight <= 1:
        raise ValueError("mixing weight must be in [0, 1]")
    out = {t: weight * s for t, s in first.items()} if weight > 0 else {}
    rest = 1 - weight
    if rest > 0:
        for t, s in second.items():
            out[t] = out.get(t, 0.0) + rest * s
    return out
