"""Seeded generator of folksonomies whose users reuse tags by frequency and
recency."""

from __future__ import annotations

import random
from collections import Counter

from .corpus import Folksonomy, Post

START_TIME = 1_200_000_000
MEAN_GAP = 2 * 86400


def _pick(rng: random.Random, items: list[str], weights: list[float]) -> str:
    return rng.choices(items, weights=weights, k=1)[0]


def generate_synthetic(
    users: int,
    base_tags: int,
    reuse_bias: float,
    recency_bias: float,
    seed: int,
    posts_per_user: tuple[int, int] = (10, 40),
    resources: int = 0,
    resource_bias: float = 0.0,
) -> Folksonomy:
    """Generate a folksonomy of ``users`` users.

    Each post carries between 1 and ``base_tags`` tags. Every tag slot
    reuses one of the user's earlier tags with probability ``reuse_bias``,
    otherwise it mints a brand-new tag. A reused tag is drawn from

        (1 - recency_bias) * frequency share + recency_bias * recency share

    where the recency share of a tag is proportional to rank ** -1.5 of its last
    use (rank 1 = most recent).

    With ``resources`` > 0 posts are spread over a shared pool of that many
    resources (a broad folksonomy) and, with probability ``resource_bias``,
    a slot instead copies a tag already given to the resource, drawn by
    popularity. With ``resources`` = 0 every post gets its own resource.
    """
    if users < 1 or base_tags < 1:
        raise ValueError("users and base_tags must be >= 1")
    for name, v in (("reuse_bias", reuse_bias), ("recency_bias", recency_bias), ("resource_bias", resource_bias)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must be in [0, 1]")
    lo, hi = posts_per_user
    if not 1 <= lo <= hi:
        raise ValueError("posts_per_user must satisfy 1 <= lo <= hi")

    rng = random.Random(seed)
    fresh = 0
    pool = [f"r{i:05d}" for i in range(resources)]
    resource_tags: dict[str, Counter[str]] = {}
    posts: list[Post] = []

    for u in range(users):
        user = f"u{u:05d}"
        freq: Counter[str] = Counter()
        last_use: dict[str, int] = {}
        clock = START_TIME + rng.randrange(0, 365 * 86400)
        seen: set[str] = set()
        for _ in range(rng.randint(lo, hi)):
            clock += max(1, int(rng.expovariate(1 / MEAN_GAP)))
            choices = [r for r in pool if r not in seen] if pool else []
            if choices:
                resource = rng.choice(choices)
            else:
                resource = f"x{user}-{len(seen)}"
            seen.add(resource)

            by_recency = sorted(last_use, key=lambda t: (-last_use[t], t))
            rec_w = {t: rank ** -1.5 for rank, t in enumerate(by_recency, 1)}
            rec_total = sum(rec_w.values())
            freq_total = sum(freq.values())
            known = resource_tags.get(resource)

            tags: set[str] = set()
            for _ in range(rng.randint(1, base_tags)):
                if known and rng.random() < resource_bias:
                    cands = sorted(known)
                    tags.add(_pick(rng, cands, [known[t] for t in cands]))
                elif by_recency and rng.random() < reuse_bias:
                    weights = [
                        (1 - recency_bias) * freq[t] / freq_total + recency_bias * rec_w[t] / rec_total
                        for t in by_recency
                    ]
                    tags.add(_pick(rng, by_recency, weights))
                else:
                    tags.add(f"t{fresh:06d}")
                    fresh += 1

            posts.append(Post(user, resource, tuple(tags), clock))
            for t in tags:
                freq[t] += 1
                last_use[t] = clock
            resource_tags.setdefault(resource, Counter()).update(tags)
    return Folksonomy(tuple(posts))
