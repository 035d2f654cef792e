"""Acceptance checks. Each test prints one PASS/FAIL line (visible with -s
or in the captured output of a failure)."""

import dataclasses
import math
import random
import time

import numpy as np
from hypothesis import given, settings, strategies as st

from conftest import index_of
from folkrec.corpus import Folksonomy, Post, build_index, p_core, write_dataset
from folkrec.evaluation import evaluate, leave_one_out_split
from folkrec.frequency import mp_u
from folkrec.graph import adapted_pagerank, build_graph, folkrank
from folkrec.harness import ALGORITHMS, ExperimentConfig, make_recommender, run_experiment
from folkrec.ranking import softmax_normalize
from folkrec.synthetic import generate_synthetic
from folkrec.temporal import DecayParams, bll_recommend
from oracles import brute_force_core, dense_graph, linear_solve_pagerank, naive_report


def verdict(capsys, number, label, ok, detail=""):
    with capsys.disabled():
        print(f"\ncriterion {number} {'PASS' if ok else 'FAIL'}: {label}{' (' + detail + ')' if detail else ''}")
    assert ok, detail


def random_folksonomy(rng, max_users, max_posts, vocab="abcdefgh", resources=6):
    posts = {}
    for _ in range(rng.randint(1, max_posts)):
        u = f"u{rng.randrange(max_users)}"
        r = f"r{rng.randrange(resources)}"
        tags = tuple(rng.sample(vocab, rng.randint(1, 3)))
        posts[(u, r)] = Post(u, r, tags, rng.randrange(0, 10**6))
    return Folksonomy(tuple(posts.values()))


# 1 --------------------------------------------------------------------------

def test_metrics_match_naive_evaluator(capsys):
    rng = random.Random(101)
    start = time.perf_counter()
    checked, mismatches = 0, []
    while checked < 120:
        f = random_folksonomy(rng, 10, 15)
        split = leave_one_out_split(f)
        if not split.test:
            continue
        index = build_index(split.train)
        for algo in ("mp", "mp_u", "mp_ur", "cf", "bll_c", "girp", "fr"):
            rec = make_recommender(algo, index)
            got = evaluate(rec, split, workers=1 + checked % 3)
            want = naive_report([([t for t, _ in rec(c.user, c.resource, c.timestamp, 10)], c.true_tags) for c in split.test])
            same = all(
                (got.precision[k], got.recall[k], got.f1[k]) == (want[("P", k)], want[("R", k)], want[("F1", k)])
                for k in range(1, 11)
            ) and (got.mrr, got.map) == (want["MRR"], want["MAP"])
            if not same:
                mismatches.append((checked, algo))
        checked += 1
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 60
    verdict(capsys, 1, "exact metrics vs naive evaluator", ok, f"{checked} corpora, {elapsed:.1f}s, mismatches {mismatches[:3]}")


# 2 --------------------------------------------------------------------------

def test_p_core_matches_exhaustive_search(capsys):
    rng = random.Random(202)
    start = time.perf_counter()
    checked, bad = 0, []
    while checked < 120:
        f = random_folksonomy(rng, 4, 12, vocab="abcd", resources=4)
        if f.n_tas > 14:
            continue
        p = rng.choice((1, 2, 3))
        tas = {(post.user, post.resource, t) for post in f.posts for t in post.tags}
        got = {(post.user, post.resource, t) for post in p_core(f, p).posts for t in post.tags}
        if got != brute_force_core(tas, p):
            bad.append(checked)
        checked += 1
    elapsed = time.perf_counter() - start
    verdict(capsys, 2, "p-core vs exhaustive search", not bad and elapsed < 60, f"{checked} instances, {elapsed:.1f}s, bad {bad[:3]}")


# 3 --------------------------------------------------------------------------

@st.composite
def multi_user_corpora(draw):
    posts = []
    for u in range(draw(st.integers(1, 5))):
        for r in draw(st.sets(st.integers(0, 6), min_size=1, max_size=6)):
            tags = tuple(draw(st.sets(st.sampled_from("abcdefg"), min_size=1, max_size=3)))
            posts.append((f"u{u}", f"r{r}", tags, draw(st.integers(0, 10**7))))
    return posts


_failures = {3: [], 4: []}


@settings(max_examples=300)
@given(multi_user_corpora(), st.integers(1, 10))
def _bll_no_decay_property(posts, k):
    idx = index_of(*posts)
    for user in sorted({p[0] for p in posts}):
        a = [t for t, _ in bll_recommend(idx, user, 2 * 10**7, k, DecayParams(d=0))]
        b = [t for t, _ in mp_u(idx, user, k)]
        if a != b:
            _failures[3].append((user, a, b))
        assert a == b


def test_bll_without_decay_equals_mp_u(capsys):
    try:
        _bll_no_decay_property()
        ok = True
    except AssertionError:
        ok = False
    verdict(capsys, 3, "BLL(d=0) top-k == MP_u top-k", ok, str(_failures[3][:1]) if not ok else "300 corpora")


# 4 --------------------------------------------------------------------------

REF = 10**8


@settings(max_examples=300)
@given(
    st.lists(st.integers(2, 10**7), min_size=0, max_size=8),
    st.integers(1, 10**7 - 1),
    st.data(),
    st.sampled_from(["a", "z"]),
)
def _recency_property(shared, rec_new, data, recent_tag):
    rec_old = data.draw(st.integers(rec_new + 1, 10**7))
    older = "z" if recent_tag == "a" else "a"
    posts = []
    for i, r in enumerate(shared):
        posts.append(("u", f"p{i}", (recent_tag,), REF - r))
        posts.append(("u", f"q{i}", (older,), REF - r))
    posts.append(("u", "new", (recent_tag,), REF - rec_new))
    posts.append(("u", "old", (older,), REF - rec_old))
    rec = bll_recommend(index_of(*posts), "u", REF, 2)
    ok = [t for t, _ in rec] == [recent_tag, older] and rec[0][1] > rec[1][1]
    if not ok:
        _failures[4].append(posts)
    assert ok


def test_recency_monotonicity(capsys):
    try:
        _recency_property()
        ok = True
    except AssertionError:
        ok = False
    verdict(capsys, 4, "more recent tag ranks higher at equal frequency", ok, "300 cases" if ok else str(_failures[4][:1]))


# 5 --------------------------------------------------------------------------

def test_bll_c_equals_bll_on_narrow_corpus(capsys):
    corpus = generate_synthetic(150, 3, 0.9, 0.5, seed=5)
    split = leave_one_out_split(corpus)
    index = build_index(split.train)
    unseen = all(c.resource not in index.resource_tag_counts for c in split.test)
    bll = evaluate(make_recommender("bll", index), split)
    bll_c = evaluate(make_recommender("bll_c", index), split)
    ok = unseen and dataclasses.replace(bll_c, name="bll") == dataclasses.replace(bll, name="bll")
    verdict(capsys, 5, "BLL+C report == BLL report on a narrow corpus", ok, f"F1@5 {float(bll.f1[5]):.4f} vs {float(bll_c.f1[5]):.4f}")


# 6 --------------------------------------------------------------------------

def test_graph_solver_against_linear_solve(capsys):
    rng = random.Random(606)
    checked, worst_l1, worst_sum, worst_zero = 0, 0.0, 0.0, 0.0
    while checked < 60:
        f = random_folksonomy(rng, 5, 10, resources=6)
        g = build_graph(build_index(f))
        if g.n > 30:
            continue
        plain = [(p.user, p.resource, p.tags) for p in f.posts]
        nodes, A = dense_graph(plain)
        assert nodes == list(g.node_id)
        user, res = rng.choice(g.users), rng.choice(g.resources)
        for pref in (g.uniform_preference(), g.query_preference(user, res)):
            got = adapted_pagerank(g, pref).weights
            worst_l1 = max(worst_l1, float(np.abs(got - linear_solve_pagerank(A, pref, 0.7)).sum()))
        w1 = adapted_pagerank(g, g.query_preference(user, res)).weights
        worst_sum = max(worst_sum, abs(float((w1 - g.baseline().weights).sum())))
        zero = folkrank(g, user, res, boost=0.0)
        worst_zero = max(worst_zero, max(abs(v) for v in zero.values()))
        checked += 1
    ok = worst_l1 < 1e-6 and worst_sum < 1e-8 and worst_zero == 0.0
    verdict(
        capsys, 6, "APR vs linear solve, FolkRank sums and uniform boost", ok,
        f"{checked} graphs, max L1 {worst_l1:.2e}, max |sum| {worst_sum:.2e}, max uniform diff {worst_zero}",
    )


# 7 --------------------------------------------------------------------------

def test_trend_on_synthetic_corpus(capsys):
    start = time.perf_counter()
    corpus = generate_synthetic(500, 3, 0.9, 0.5, seed=0, resources=1000, resource_bias=0.3)
    split = leave_one_out_split(corpus)
    index = build_index(split.train)
    f1 = {a: evaluate(make_recommender(a, index), split).f1[5] for a in ("mp_u", "girp", "bll", "bll_c")}
    elapsed = time.perf_counter() - start
    ok = f1["bll"] > f1["mp_u"] and f1["bll_c"] >= f1["bll"] and elapsed < 600
    detail = ", ".join(f"{a} {float(v):.4f}" for a, v in f1.items()) + f", {elapsed:.0f}s"
    verdict(capsys, 7, "F1@5 BLL > MP_u and BLL+C >= BLL", ok, detail)


# 8 --------------------------------------------------------------------------

def test_softmax_invariants(capsys):
    rng = np.random.default_rng(808)
    worst_sum, worst_shift = 0.0, 0.0
    for i in range(10_000):
        n = int(rng.integers(1, 40))
        scale = (1.0, 50.0, 700.0)[i % 3]
        x = rng.uniform(-scale, scale, n)
        if i % 5 == 0:
            x[rng.integers(0, n)] = rng.choice([-700.0, 700.0])
        scores = {f"t{j}": float(v) for j, v in enumerate(x)}
        out = softmax_normalize(scores)
        worst_sum = max(worst_sum, abs(math.fsum(out.values()) - 1))
        c = float(rng.uniform(-700, 700))
        shifted = softmax_normalize({t: v + c for t, v in scores.items()})
        worst_shift = max(worst_shift, max(abs(out[t] - shifted[t]) for t in out))
    ok = worst_sum <= 1e-9 and worst_shift <= 1e-12
    verdict(capsys, 8, "softmax sums to 1 and is shift-invariant", ok, f"max |sum-1| {worst_sum:.1e}, max shift diff {worst_shift:.1e}")


# 9 --------------------------------------------------------------------------

def test_runs_are_byte_identical(capsys, tmp_path):
    data = tmp_path / "synth.tsv"
    with data.open("w", encoding="utf-8") as fh:
        write_dataset(generate_synthetic(60, 3, 0.9, 0.5, seed=9, resources=80, resource_bias=0.3), fh)
    outputs = []
    for i, workers in enumerate((1, 1, 4)):
        cfg = ExperimentConfig(dataset=str(data), core=2, algorithms=tuple(ALGORITHMS), workers=workers, output=str(tmp_path / f"run{i}"))
        files = run_experiment(cfg).files
        outputs.append({name: (tmp_path / f"run{i}" / name).read_bytes() for name in sorted(files)})
    ok = outputs[0] == outputs[1] == outputs[2]
    verdict(capsys, 9, "reruns byte-identical across thread counts", ok, f"{len(outputs[0])} files, {len(ALGORITHMS)} algorithms")
