import math
import random

import numpy as np
import pytest

from argon.ranker import (
    RankerConfig,
    biased_coreset,
    coverage_q,
    coverage_qbar,
    greedy_biased_selection,
    kmeans_ranker,
    load_results,
    top_k_ranker,
    write_results,
)
from argon.represent import Representation


def make_repr(vectors, kind="bert", topic="t"):
    vecs = {k: np.asarray(v, dtype=np.float64) for k, v in vectors.items()}
    return Representation(kind=kind, vectors=vecs, topics={k: topic for k in vecs})


def matrix_psim(sims, default=0.1):
    """Pairwise similarity callable from a sparse symmetric dict."""

    def psim(a, b):
        return sims.get((a, b), sims.get((b, a), default))

    return psim


def oracle_greedy(ids, rel, psim, k, alpha):
    """Brute-force rendition of the greedy loop, recomputed from scratch."""
    remaining = list(ids)
    out = []
    while remaining and len(out) < k:
        scored = []
        for pid in remaining:
            if out:
                objective = alpha * rel[pid] - (1 - alpha) * max(psim(a, pid) for a in out)
            else:
                objective = alpha * rel[pid]
            scored.append((-objective, -rel[pid], pid))
        scored.sort()
        chosen = scored[0][2]
        out.append(chosen)
        remaining.remove(chosen)
    return out


class TestGreedySelection:
    REL = {"a": 1.0, "b": 0.9, "c": 0.8, "d": 0.1}

    def test_worked_example(self):
        # alpha=0.5, k=3: step 2 scores b=-0.025, c=0.35, d=0.0; step 3
        # scores b=-0.025, d=0.0, so b is suppressed as a near duplicate of a
        psim = matrix_psim({("a", "b"): 0.95})
        picks = greedy_biased_selection(sorted(self.REL), self.REL, psim, 3, 0.5)
        assert [p for p, _ in picks] == ["a", "c", "d"]
        assert picks[0][1] == pytest.approx(0.5)
        assert picks[1][1] == pytest.approx(0.35)
        assert picks[2][1] == pytest.approx(0.0)

    def test_alpha_zero_first_pick_breaks_tie_by_relevance(self):
        psim = matrix_psim({})
        picks = greedy_biased_selection(sorted(self.REL), self.REL, psim, 1, 0.0)
        assert picks[0][0] == "a"

    def test_tie_on_relevance_breaks_by_ascending_id(self):
        rel = {"x": 0.5, "m": 0.5, "z": 0.5}
        picks = greedy_biased_selection(sorted(rel), rel, matrix_psim({}, default=0.0), 3, 1.0)
        assert [p for p, _ in picks] == ["m", "x", "z"]

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            greedy_biased_selection(["a"], {"a": 0.5}, matrix_psim({}), 0, 0.5)
        with pytest.raises(ValueError):
            greedy_biased_selection(["a"], {"a": 0.5}, matrix_psim({}), 1, 1.5)


class TestBiasedCoreset:
    def test_alpha_one_is_pure_relevance_topk(self):
        rel = [("p1", 0.9), ("p2", 0.5), ("p3", 0.7)]
        rep = make_repr({"p1": [1, 0], "p2": [0, 1], "p3": [1, 1]})
        result = biased_coreset("q", rel, rep, "cos", 2, 1.0)
        assert result.premise_ids() == ["p1", "p3"]

    def test_k_at_least_candidates_returns_all(self):
        rel = [("p1", 0.2), ("p2", 0.9), ("p3", 0.5)]
        rep = make_repr({"p1": [1, 0], "p2": [0, 1], "p3": [1, 1]})
        result = biased_coreset("q", rel, rep, "cos", 5, 0.5)
        assert len(result.items) == 3
        assert result.premise_ids()[0] == "p2"  # argmax relevance first

    def test_selection_score_of_first_item(self):
        rel = [("p1", 0.8), ("p2", 0.4)]
        rep = make_repr({"p1": [1, 0], "p2": [0, 1]})
        result = biased_coreset("q", rel, rep, "cos", 2, 0.5)
        assert result.items[0].selection_score == pytest.approx(0.5 * 0.8)

    def test_empty_candidates_rejected(self):
        rep = make_repr({})
        with pytest.raises(ValueError):
            biased_coreset("q", [], rep, "cos", 3, 0.5)

    def test_relevance_outside_unit_interval_rejected(self):
        rep = make_repr({"p1": [1, 0]})
        with pytest.raises(ValueError):
            biased_coreset("q", [("p1", 1.2)], rep, "cos", 1, 0.5)

    def test_duplicate_candidate_rejected(self):
        rep = make_repr({"p1": [1, 0]})
        with pytest.raises(ValueError):
            biased_coreset("q", [("p1", 0.5), ("p1", 0.6)], rep, "cos", 2, 0.5)

    def test_config_snapshot(self):
        rel = [("p1", 0.8)]
        rep = make_repr({"p1": [1, 0]})
        result = biased_coreset("q", rel, rep, "cos", 1, 0.25)
        assert result.config == RankerConfig(
            k=1, alpha=0.25, representation="bert", similarity="cos", tau=0.0
        )


def unit_at_cos(c):
    """2-d unit vector whose cosine with (1, 0) is c."""
    return [c, math.sqrt(1.0 - c * c)]


class TestCoverage:
    def test_member_of_selection_is_fully_covered(self):
        rep = make_repr({"p": [3, 4], "a": [1, 2]})
        assert coverage_q("p", ["p", "a"], rep, "cos") == pytest.approx(1.0, abs=1e-12)

    def test_single_selected_item_equals_pairwise_similarity(self):
        rep = make_repr({"p": [1, 0], "a": unit_at_cos(0.3)})
        assert coverage_q("p", ["a"], rep, "cos") == rep.sim("p", "a", "cos")

    def test_max_over_selection(self):
        rep = make_repr(
            {"p": [1, 0], "a1": unit_at_cos(0.2), "a2": unit_at_cos(0.7), "a3": unit_at_cos(0.4)}
        )
        assert coverage_q("p", ["a1", "a2", "a3"], rep, "cos") == pytest.approx(0.7, abs=1e-9)

    def test_empty_selection_rejected(self):
        rep = make_repr({"p": [1, 0]})
        with pytest.raises(ValueError):
            coverage_q("p", [], rep, "cos")

    def test_qbar_pool_subset_of_selection(self):
        rep = make_repr({"a": [1, 0], "b": [0, 1]})
        assert coverage_qbar(["a", "b"], ["a", "b"], rep, "cos") == pytest.approx(1.0, abs=1e-12)

    def test_qbar_is_min_over_pool(self):
        rep = make_repr({"s": [1, 0], "p1": unit_at_cos(0.9), "p2": unit_at_cos(0.3)})
        assert coverage_qbar(["s"], ["p1", "p2"], rep, "cos") == pytest.approx(0.3, abs=1e-9)

    def test_qbar_singleton_pool(self):
        rep = make_repr({"s": [1, 0], "p": unit_at_cos(0.42)})
        q = coverage_q("p", ["s"], rep, "cos")
        assert coverage_qbar(["s"], ["p"], rep, "cos") == q

    def test_monotone_coverage_over_selection_prefixes(self):
        rng = random.Random(7)
        ids = [f"p{i}" for i in range(12)]
        rep = make_repr({pid: [rng.uniform(-1, 1) for _ in range(3)] for pid in ids})
        rel = {pid: round(rng.random(), 3) for pid in ids}
        result = biased_coreset("q", sorted(rel.items()), rep, "cos", 6, 0.0)
        order = result.premise_ids()
        previous = -math.inf
        for i in range(1, len(order) + 1):
            value = coverage_qbar(order[:i], ids, rep, "cos")
            assert value >= previous - 1e-12
            previous = value


class TestKmeansRanker:
    def test_k_at_least_n_degenerates_to_relevance_sort(self):
        rel = [("p1", 0.2), ("p2", 0.9), ("p3", 0.5)]
        rep = make_repr({"p1": [0, 0], "p2": [1, 1], "p3": [2, 2]})
        result = kmeans_ranker("q", rel, rep, 3, seed=0)
        assert result.premise_ids() == ["p2", "p3", "p1"]

    def test_two_blobs_one_representative_each(self):
        blob_a = {"a1": [0.0, 0.0], "a2": [0.1, 0.0], "a3": [0.0, 0.1]}
        blob_b = {"b1": [10.0, 10.0], "b2": [10.1, 10.0], "b3": [10.0, 10.1]}
        rep = make_repr({**blob_a, **blob_b})
        rel = [(pid, 0.5) for pid in sorted(rep.vectors)]
        result = kmeans_ranker("q", rel, rep, 2, seed=3)
        chosen = result.premise_ids()
        assert len(chosen) == 2
        assert len({pid[0] for pid in chosen}) == 2  # one from each blob

    def test_identical_vectors_collapse_to_one(self):
        rep = make_repr({f"p{i}": [1.0, 2.0] for i in range(5)})
        rel = [(f"p{i}", 0.1 * i) for i in range(5)]
        result = kmeans_ranker("q", rel, rep, 3, seed=1)
        assert len(result.items) == 1

    def test_deterministic_for_fixed_seed(self):
        rng = random.Random(11)
        rep = make_repr({f"p{i}": [rng.random(), rng.random()] for i in range(15)})
        rel = [(pid, round(rng.random(), 3)) for pid in sorted(rep.vectors)]
        a = kmeans_ranker("q", rel, rep, 4, seed=9)
        b = kmeans_ranker("q", rel, rep, 4, seed=9)
        assert a.premise_ids() == b.premise_ids()

    def test_most_relevant_representative_mode(self):
        # one tight blob: centroid pick and relevance pick differ
        rep = make_repr({"p1": [0.0, 0.0], "p2": [0.2, 0.0], "p3": [0.1, 0.0]})
        rel = [("p1", 0.1), ("p2", 0.9), ("p3", 0.5)]
        centroid = kmeans_ranker("q", rel, rep, 1, seed=0, representative="centroid")
        relevant = kmeans_ranker("q", rel, rep, 1, seed=0, representative="relevant")
        assert centroid.premise_ids() == ["p3"]
        assert relevant.premise_ids() == ["p2"]

    def test_output_sorted_by_relevance(self):
        rng = random.Random(2)
        rep = make_repr({f"p{i}": [rng.random() * 5, rng.random() * 5] for i in range(12)})
        rel = [(pid, round(rng.random(), 3)) for pid in sorted(rep.vectors)]
        result = kmeans_ranker("q", rel, rep, 5, seed=4)
        values = [item.relevance for item in result.items]
        assert values == sorted(values, reverse=True)


class TestTopK:
    def test_matches_alpha_one_coreset(self):
        rng = random.Random(23)
        for _ in range(25):
            n = rng.randint(1, 15)
            ids = [f"p{i}" for i in range(n)]
            rel = [(pid, round(rng.random(), 2)) for pid in ids]
            rep = make_repr({pid: [rng.uniform(-1, 1) for _ in range(3)] for pid in ids})
            k = rng.randint(1, 8)
            assert (
                top_k_ranker("q", rel, k).premise_ids()
                == biased_coreset("q", rel, rep, "cos", k, 1.0).premise_ids()
            )


class TestGreedyProperties:
    def test_small_oracle_equivalence(self):
        rng = random.Random(31)
        for _ in range(50):
            n = rng.randint(1, 12)
            ids = [f"p{i:02d}" for i in range(n)]
            rel = {pid: round(rng.random(), 3) for pid in ids}
            sims = {}
            for i, a in enumerate(ids):
                for b in ids[i + 1 :]:
                    sims[(a, b)] = round(rng.uniform(-1, 1), 3)
            psim = matrix_psim(sims, default=0.0)
            k = rng.randint(1, 6)
            alpha = rng.choice([0.0, 0.25, 0.5, 0.75, 1.0])
            picks = [p for p, _ in greedy_biased_selection(ids, rel, psim, k, alpha)]
            assert picks == oracle_greedy(ids, rel, psim, k, alpha)

    def test_k_center_property_at_alpha_zero(self):
        rng = random.Random(41)
        for _ in range(20):
            n = rng.randint(2, 12)
            ids = [f"p{i:02d}" for i in range(n)]
            rel = {pid: round(rng.random(), 3) for pid in ids}
            sims = {}
            for i, a in enumerate(ids):
                for b in ids[i + 1 :]:
                    sims[(a, b)] = round(rng.uniform(-1, 1), 3)
            psim = matrix_psim(sims, default=0.0)
            picks = [p for p, _ in greedy_biased_selection(ids, rel, psim, n, 0.0)]
            for step in range(1, len(picks)):
                selected = picks[:step]
                rest = [pid for pid in ids if pid not in selected]
                best = min(max(psim(a, pid) for a in selected) for pid in rest)
                chosen_cov = max(psim(a, picks[step]) for a in selected)
                assert chosen_cov == best


def test_results_file_round_trip(tmp_path):
    rep = make_repr({"p1": [1, 0], "p2": [0, 1]})
    result = biased_coreset("q1", [("p1", 0.9), ("p2", 0.4)], rep, "cos", 2, 0.5)
    write_results([result], tmp_path / "results.jsonl")
    assert load_results(tmp_path / "results.jsonl") == {"q1": ["p1", "p2"]}
