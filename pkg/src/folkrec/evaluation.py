"""Temporal leave-one-out splitting and ranking metrics.

All per-post metrics are exact :class:`fractions.Fraction` values and the
aggregation divides last, so a report does not depend on the order (or the
number of threads) in which test posts were scored.
"""

from __future__ import annotations

import csv
import io
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .corpus import Folksonomy, Post

MAX_K = 10
CUTOFFS = tuple(range(1, MAX_K + 1))

# (user, resource, ref_time, k) -> ranked (tag, score) pairs
Recommender = Callable[[str, str, int, int], Sequence[tuple[str, float]]]


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class

    user: str
    resource: str
    true_tags: frozenset[str]
    timestamp: int

    def __post_init__(self) -> None:
        if not self.true_tags:
            raise ValueError("test case needs at least one true tag")


@dataclass(frozen=True)
class SplitPair:
    train: Folksonomy
    test: tuple[TestCase, ...]


def leave_one_out_split(folk: Folksonomy, include_single: bool = False) -> SplitPair:
    """Hold out each user's latest post.

    Ties in time go to the lexicographically larger resource. Users with a
    single post stay in training unless ``include_single`` is set, in which
    case that post is moved to the test set and the user has no history.
    """
    by_user: dict[str, list[Post]] = defaultdict(list)
    for post in folk.posts:
        by_user[post.user].append(post)
    train: list[Post] = []
    test: list[TestCase] = []
    for user in sorted(by_user):
        posts = by_user[user]
        if len(posts) < 2 and not include_single:
            train.extend(posts)
            continue
        held = max(posts, key=lambda p: (p.timestamp, p.resource))
        train.extend(p for p in posts if p is not held)
        test.append(TestCase(user, held.resource, frozenset(held.tags), held.timestamp))
    return SplitPair(Folksonomy(tuple(train)), tuple(test))


# --------------------------------------------------------------------------
# per-post metrics


def _tag_list(recommended) -> list[str]:
    tags = [r[0] if isinstance(r, tuple) else r for r in recommended]
    if len(set(tags)) != len(tags):
        raise ValueError("recommendation contains duplicate tags")
    return tags


def precision_recall_f1(recommended, true_tags, k: int) -> tuple[Fraction, Fraction, Fraction]:
    if not 1 <= k <= MAX_K:
        raise ValueError(f"k must be in 1..{MAX_K}, got {k}")
    truth = set(true_tags)
    hits = sum(1 for t in _tag_list(recommended)[:k] if t in truth)
    p = Fraction(hits, k)
    r = Fraction(hits, len(truth))
    f1 = 2 * p * r / (p + r) if p + r else Fraction(0)
    return p, r, f1


def reciprocal_rank(recommended, true_tags, cutoff: int = MAX_K) -> Fraction:
    """Mean over true tags of 1/rank; tags not found in the top ``cutoff`` add 0."""
    truth = set(true_tags)
    found = sum(
        (Fraction(1, rank) for rank, t in enumerate(_tag_list(recommended)[:cutoff], 1) if t in truth),
        Fraction(0),
    )
    return found / len(truth)


def average_precision(recommended, true_tags, cutoff: int = MAX_K) -> Fraction:
    truth = set(true_tags)
    hits = 0
    total = Fraction(0)
    for rank, t in enumerate(_tag_list(recommended)[:cutoff], 1):
        if t in truth:
            hits += 1
            total += Fraction(hits, rank)
    return total / len(truth)


# --------------------------------------------------------------------------
# aggregation


@dataclass
class AlgorithmReport:
    """Macro-averaged metrics of one recommender over one test set.

    ``f1[k]`` is the harmonic mean of ``precision[k]`` and ``recall[k]``,
    i.e. F1 of the averages rather than the average F1.
    """

    name: str
    n_posts: int
    precision: dict[int, Fraction]
    recall: dict[int, Fraction]
    f1: dict[int, Fraction]
    mrr: Fraction
    map: Fraction
    wall_time: float = field(default=0.0, compare=False)

    def summary(self) -> dict[str, float]:
        return {
            "F1@5": float(self.f1.get(5, 0)),
            "MRR": float(self.mrr),
            "MAP": float(self.map),
        }


def _score_case(recommender: Recommender, case: TestCase, cutoffs: Sequence[int]):
    rec = list(recommender(case.user, case.resource, case.timestamp, MAX_K))
    per_k = {k: precision_recall_f1(rec, case.true_tags, k)[:2] for k in cutoffs}
    return per_k, reciprocal_rank(rec, case.true_tags), average_precision(rec, case.true_tags)


def evaluate(
    recommender: Recommender,
    split: SplitPair | Iterable[TestCase],
    cutoffs: Iterable[int] = CUTOFFS,
    workers: int = 1,
    name: str = "",
) -> AlgorithmReport:
    """Score ``recommender`` on every held-out post and macro-average."""
    cases = list(split.test if isinstance(split, SplitPair) else split)
    if not cases:
        raise EvaluationError("empty test set")
    cutoffs = sorted(set(cutoffs))
    for k in cutoffs:
        if not 1 <= k <= MAX_K:
            raise ValueError(f"cutoff {k} outside 1..{MAX_K}")

    start = time.perf_counter()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _score_case(recommender, c, cutoffs), cases))
    else:
        results = [_score_case(recommender, c, cutoffs) for c in cases]
    elapsed = time.perf_counter() - start

    n = len(results)
    sum_p = {k: Fraction(0) for k in cutoffs}
    sum_r = {k: Fraction(0) for k in cutoffs}
    sum_rr = Fraction(0)
    sum_ap = Fraction(0)
    for per_k, rr, ap in results:
        for k, (p, r) in per_k.items():
            sum_p[k] += p
            sum_r[k] += r
        sum_rr += rr
        sum_ap += ap
    precision = {k: sum_p[k] / n for k in cutoffs}
    recall = {k: sum_r[k] / n for k in cutoffs}
    f1 = {
        k: (2 * precision[k] * recall[k] / (precision[k] + recall[k]) if precision[k] + recall[k] else Fraction(0))
        for k in cutoffs
    }
    return AlgorithmReport(name, n, precision, recall, f1, sum_rr / n, sum_ap / n, elapsed)


# --------------------------------------------------------------------------
# CSV output


def _fmt(x: Fraction) -> str:
    return f"{float(x):.6f}"


def metrics_csv(reports: Sequence[AlgorithmReport]) -> str:
    """One row per (algorithm, k) and one summary row per algorithm.

    Summary rows carry ``k = all`` and fill only the MRR/MAP columns.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algorithm", "k", "recall", "precision", "f1", "mrr", "map", "n_posts"])
    for rep in reports:
        for k in sorted(rep.precision):
            w.writerow([rep.name, k, _fmt(rep.recall[k]), _fmt(rep.precision[k]), _fmt(rep.f1[k]), "", "", rep.n_posts])
        w.writerow([rep.name, "all", "", "", "", _fmt(rep.mrr), _fmt(rep.map), rep.n_posts])
    return buf.getvalue()


def table_csv(reports: Sequence[AlgorithmReport]) -> str:
    """F1@5 / MRR / MAP rows with one column per algorithm."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["measure"] + [r.name for r in reports])
    for measure in ("F1@5", "MRR", "MAP"):
        w.writerow([measure] + [f"{r.summary()[measure]:.6f}" for r in reports])
    return buf.getvalue()


def recall_precision_csv(reports: Sequence[AlgorithmReport]) -> str:
    """Recall/precision curve points, one per (algorithm, k)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algorithm", "k", "recall", "precision"])
    for rep in reports:
        for k in sorted(rep.precision):
            w.writerow([rep.name, k, _fmt(rep.recall[k]), _fmt(rep.precision[k])])
    return buf.getvalue()
