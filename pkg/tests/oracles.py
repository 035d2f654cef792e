"""Slow, obviously-correct reference implementations used as test oracles.

None of these import the code paths they check.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np


# ---------------------------------------------------------------- p-core

def brute_force_core(tas, p):
    """Largest subset of (user, resource, tag) triples in which every user,
    resource and tag occurs in >= p distinct posts, by exhaustive search."""
    tas = sorted(set(tas))

    def ok(subset):
        posts = {(u, r) for u, r, _ in subset}
        users = Counter(u for u, _ in posts)
        res = Counter(r for _, r in posts)
        tags = Counter(t for _, _, t in subset)  # one TAS per (post, tag)
        return all(c >= p for c in users.values()) and all(c >= p for c in res.values()) and all(
            c >= p for c in tags.values()
        )

    for size in range(len(tas), -1, -1):
        found = [set(c) for c in itertools.combinations(tas, size) if ok(c)]
        if found:
            # the maximal core is unique
            assert len(found) == 1, found
            return found[0]
    return set()


# ---------------------------------------------------------------- metrics

def naive_report(rows, cutoffs=range(1, 11)):
    """rows: list of (ranked tag list, true tag set). Exact macro averages."""
    n = len(rows)
    out = {}
    for k in cutoffs:
        ps, rs = [], []
        for rec, truth in rows:
            h = len([t for t in rec[:k] if t in truth])
            ps.append(Fraction(h, k))
            rs.append(Fraction(h, len(truth)))
        p = sum(ps, Fraction(0)) / n
        r = sum(rs, Fraction(0)) / n
        out[("P", k)] = p
        out[("R", k)] = r
        out[("F1", k)] = Fraction(0) if p + r == 0 else 2 * p * r / (p + r)
    rr_total = Fraction(0)
    ap_total = Fraction(0)
    for rec, truth in rows:
        top = rec[:10]
        rr_total += sum((Fraction(1, top.index(t) + 1) for t in truth if t in top), Fraction(0)) / len(truth)
        ap = Fraction(0)
        for i in range(1, len(top) + 1):
            if top[i - 1] in truth:
                ap += Fraction(len([t for t in top[:i] if t in truth]), i)
        ap_total += ap / len(truth)
    out["MRR"] = rr_total / n
    out["MAP"] = ap_total / n
    return out


# ---------------------------------------------------------------- ranking

def ranked(scores, k):
    return sorted(scores.items(), key=lambda x: (-x[1], x[0]))[:k]


def naive_cf(posts, user, k, n=20):
    """Dense cosine CF over a list of (user, resource, tags) posts."""
    profile = {}
    for u, _, tags in posts:
        profile.setdefault(u, Counter()).update(tags)
    vocab = sorted({t for c in profile.values() for t in c})
    vec = {u: np.array([c[t] for t in vocab], dtype=float) for u, c in profile.items()}
    if user not in vec:
        return []
    sims = []
    for v in sorted(vec):
        if v == user:
            continue
        s = float(vec[user] @ vec[v]) / (np.linalg.norm(vec[user]) * np.linalg.norm(vec[v]))
        if s > 0:
            sims.append((v, s))
    sims.sort(key=lambda x: (-x[1], x[0]))
    scores = Counter()
    for v, s in sims[:n]:
        for t, c in profile[v].items():
            scores[t] += s * c
    return ranked(dict(scores), k)


def naive_softmax(d):
    if not d:
        return {}
    z = sum(math.exp(v) for v in d.values())
    return {t: math.exp(v) / z for t, v in d.items()}


def naive_girptm(posts, user, resource, ref, k, beta=0.5, lam=1 / 86400):
    """GIRP mixed with resource popularity, evaluated directly."""
    times = {}
    res_counts = Counter()
    for u, r, tags, ts in posts:
        for t in tags:
            if u == user:
                times.setdefault(t, []).append(ts)
            if r == resource:
                res_counts[t] += 1
    raw = {}
    for t, ts in times.items():
        first = max(ref - min(ts), 1)
        last = max(ref - max(ts), 1)
        raw[t] = len(ts) * (math.exp(-lam * last) + math.exp(-lam * first)) / 2
    total = sum(raw.values())
    user_part = {t: v / total for t, v in raw.items()}
    res_part = naive_softmax({t: float(c) for t, c in res_counts.items()})
    scores = {}
    for t in set(user_part) | set(res_part):
        scores[t] = beta * user_part.get(t, 0.0) + (1 - beta) * res_part.get(t, 0.0)
    return ranked(scores, k)


# ---------------------------------------------------------------- graphs

def dense_graph(posts):
    """Nodes and dense column-stochastic matrix from (user, resource, tags)."""
    users = sorted({u for u, _, _ in posts})
    res = sorted({r for _, r, _ in posts})
    tags = sorted({t for _, _, ts in posts for t in ts})
    nodes = [("user", u) for u in users] + [("resource", r) for r in res] + [("tag", t) for t in tags]
    pos = {n: i for i, n in enumerate(nodes)}
    W = np.zeros((len(nodes), len(nodes)))
    for u, r, ts in posts:
        i, j = pos[("user", u)], pos[("resource", r)]
        W[i, j] += len(ts)
        W[j, i] += len(ts)
        for t in ts:
            x = pos[("tag", t)]
            for y in (i, j):
                W[x, y] += 1
                W[y, x] += 1
    A = W / W.sum(axis=0, keepdims=True)
    return nodes, A


def linear_solve_pagerank(A, pref, damping):
    n = A.shape[0]
    return np.linalg.solve(np.eye(n) - damping * A, (1 - damping) * pref)
