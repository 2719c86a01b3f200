import itertools
import logging
import math
import random

import pytest

from argon.errors import CorpusFormatError, DataError
from argon.evaluation import (
    EvalConfig,
    EvalConfigGrid,
    evaluate_run,
    load_grid,
    loo_select,
    loo_sweep,
    modified_ndcg,
)
from argon.fixtures import FixtureScale, generate_fixture, synth_scores
from argon.pipeline import PipelineConfig, Retriever
from argon.relevance import RelevanceSource

from conftest import make_corpus


def classic_ndcg(ranking, grades, k):
    """Plain NDCG oracle: gain = grade, discount log2(i + 1), 1-based ranks."""
    dcg = sum(
        grades.get(pid, 0) / math.log2(i + 1)
        for i, pid in enumerate(ranking[:k], start=1)
    )
    ideal = sorted(grades.values(), reverse=True)[:k]
    idcg = sum(g / math.log2(i + 1) for i, g in enumerate(ideal, start=1))
    return dcg / idcg if idcg > 0 else 0.0


class TestModifiedNdcg:
    def test_hand_example(self):
        # gains (2, 0, 1); DCG = 2 + 0 + 0.5 = 2.5; IDCG = 2 + 1/log2(3)
        grades = {"p1": 2, "p2": 2, "p3": 1}
        clusters = {"p1": "A", "p2": "A", "p3": "B"}
        value = modified_ndcg(["p1", "p2", "p3"], grades, clusters, 3)
        assert value == pytest.approx(0.9502344167898356, abs=1e-12)
        assert value == pytest.approx(0.95024, abs=1e-5)

    def test_ideal_ranking_scores_one(self):
        grades = {"a": 2, "b": 2, "c": 2}
        clusters = {"a": "A", "b": "B", "c": "C"}
        assert modified_ndcg(["a", "b", "c"], grades, clusters, 3) == 1.0

    def test_all_grade_zero_scores_zero(self):
        grades = {"a": 0, "b": 0}
        assert modified_ndcg(["a", "b"], grades, {}, 2) == 0.0

    def test_duplicate_cluster_member_gains_nothing(self):
        grades = {"a": 2, "b": 2}
        clusters = {"a": "A", "b": "A"}
        only_first = modified_ndcg(["a", "b"], grades, clusters, 2)
        just_one = modified_ndcg(["a"], grades, clusters, 2)
        assert only_first == just_one

    def test_unjudged_premise_counts_as_grade_zero(self, caplog):
        grades = {"a": 2}
        with caplog.at_level(logging.DEBUG, logger="argon.evaluation"):
            value = modified_ndcg(["mystery", "a"], grades, {}, 2)
        assert value == pytest.approx((2 / math.log2(3)) / 2)
        assert any("mystery" in rec.message for rec in caplog.records)

    def test_ranking_truncated_to_k(self):
        grades = {"a": 2, "b": 2}
        clusters = {"a": "A", "b": "B"}
        assert modified_ndcg(["a", "b"], grades, clusters, 1) == 1.0

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            modified_ndcg(["a"], {"a": 1}, {}, 0)

    def test_no_relevant_judgments_means_zero(self):
        assert modified_ndcg(["a"], {}, {}, 3) == 0.0

    def test_matches_classic_ndcg_on_singleton_clusters(self):
        rng = random.Random(77)
        ids = [f"p{i}" for i in range(10)]
        for _ in range(200):
            grades = {pid: rng.choice([0, 1, 2]) for pid in ids}
            clusters = {pid: f"s-{pid}" for pid, g in grades.items() if g >= 1}
            ranking = rng.sample(ids, rng.randint(1, len(ids)))
            k = rng.randint(1, 10)
            assert modified_ndcg(ranking, grades, clusters, k) == pytest.approx(
                classic_ndcg(ranking, grades, k), abs=1e-12
            )

    def test_permutations_bounded_and_ideal_reaches_one(self):
        grades = {"a1": 2, "a2": 2, "b1": 1, "b2": 1, "c1": 2, "z": 0}
        clusters = {"a1": "A", "a2": "A", "b1": "B", "b2": "B", "c1": "C"}
        items = sorted(grades)
        values = [
            modified_ndcg(list(perm), grades, clusters, 6)
            for perm in itertools.permutations(items)
        ]
        assert max(values) == 1.0
        assert all(v <= 1.0 for v in values)


class TestEvaluateRun:
    def corpus(self):
        return make_corpus(
            claims=[("q1", "one", "t", None), ("q2", "two", "t", None)],
            premises=[("p1", "x", "t"), ("p2", "y", "t")],
            judgments=[("q1", "q1", "p1", 2), ("q2", "q2", "p2", 2), ("q2", "q2", "p1", 0)],
            clusters=[("q1", "m", ["p1"]), ("q2", "m", ["p2"])],
        )

    def test_single_query_mean_is_its_score(self):
        corpus = self.corpus()
        report = evaluate_run({"q1": ["p1"]}, corpus, 5)
        assert report.mean_ndcg == report.per_query[0].ndcg == 1.0

    def test_mean_of_two_queries(self):
        corpus = self.corpus()
        report = evaluate_run({"q1": ["p1"], "q2": ["p1"]}, corpus, 5)
        scores = {q.query_claim_id: q.ndcg for q in report.per_query}
        assert scores == {"q1": 1.0, "q2": 0.0}
        assert report.mean_ndcg == 0.5

    def test_query_without_judgments_is_an_error(self):
        corpus = self.corpus()
        with pytest.raises(DataError, match="q9"):
            evaluate_run({"q9": ["p1"]}, corpus, 5)

    def test_empty_results_rejected(self):
        with pytest.raises(ValueError):
            evaluate_run({}, self.corpus(), 5)


class TestLooSelect:
    def test_three_query_hand_matrix(self):
        # config A: q1 .9 / q2 .2 / q3 .3 ; config B: q1 .4 / q2 .6 / q3 .5
        # holding out q1: A averages .25, B .55 -> B, held-out .4
        # holding out q2: A averages .60, B .45 -> A, held-out .2
        # holding out q3: A averages .55, B .50 -> A, held-out .3
        matrix = [
            {"q1": 0.9, "q2": 0.2, "q3": 0.3},
            {"q1": 0.4, "q2": 0.6, "q3": 0.5},
        ]
        chosen, held_out, mean = loo_select(matrix, ["q1", "q2", "q3"])
        assert chosen == {"q1": 1, "q2": 0, "q3": 0}
        assert held_out == {"q1": 0.4, "q2": 0.2, "q3": 0.3}
        assert mean == pytest.approx((0.4 + 0.2 + 0.3) / 3)

    def test_dominant_config_chosen_everywhere(self):
        matrix = [
            {"q1": 0.9, "q2": 0.8},
            {"q1": 0.5, "q2": 0.4},
        ]
        chosen, _, _ = loo_select(matrix, ["q1", "q2"])
        assert chosen == {"q1": 0, "q2": 0}

    def test_tie_keeps_first_config(self):
        matrix = [
            {"q1": 0.5, "q2": 0.5},
            {"q1": 0.5, "q2": 0.5},
        ]
        chosen, _, _ = loo_select(matrix, ["q1", "q2"])
        assert chosen == {"q1": 0, "q2": 0}

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            loo_select([], ["q1", "q2"])

    def test_needs_two_queries(self):
        with pytest.raises(ValueError):
            loo_select([{"q1": 0.5}], ["q1"])


class TestLooSweep:
    def setup_method(self):
        self.corpus = generate_fixture(13, FixtureScale())
        table = synth_scores(self.corpus, seed=13)
        source = RelevanceSource.from_table(table)
        self.retriever = Retriever(self.corpus, PipelineConfig(scorer="table"), source=source)

    def test_singleton_grid_equals_evaluate_run_exactly(self):
        grid = EvalConfigGrid(
            alphas=(0.5,), taus=(0.4,), representations=("claim-sim",),
            similarities=("cos",), rankers=("biased-coreset",), ks=(5,),
        )
        sweep = loo_sweep(self.corpus, grid, self.retriever.pipeline_fn())
        cfg = grid.configs_for_k(5)[0]
        results = {
            qid: self.retriever.retrieve_with(cfg, qid).premise_ids()
            for qid in self.corpus.query_claim_ids()
        }
        report = evaluate_run(results, self.corpus, 5)
        assert sweep.reports[0].mean_ndcg == report.mean_ndcg  # exact
        for a, b in zip(sweep.reports[0].per_query, report.per_query):
            assert a.ndcg == b.ndcg

    def test_sweep_emits_one_report_per_k(self):
        grid = EvalConfigGrid(taus=(0.4,), ks=(3, 5))
        sweep = loo_sweep(self.corpus, grid, self.retriever.pipeline_fn())
        assert [r.k for r in sweep.reports] == [3, 5]
        assert len(sweep.matrix) == 2 * len(self.corpus.query_claim_ids())

    def test_needs_two_queries(self):
        grid = EvalConfigGrid()
        with pytest.raises(ValueError):
            loo_sweep(self.corpus, grid, self.retriever.pipeline_fn(), queries=["c0000"])


class TestGrid:
    def test_axes_must_be_non_empty(self):
        with pytest.raises(ValueError):
            EvalConfigGrid(alphas=())

    def test_ranges_validated(self):
        with pytest.raises(ValueError):
            EvalConfigGrid(alphas=(1.5,))
        with pytest.raises(ValueError):
            EvalConfigGrid(rankers=("mystery",))

    def test_enumeration_order_is_deterministic(self):
        grid = EvalConfigGrid(alphas=(0.0, 1.0), rankers=("top-k", "kmeans"))
        configs = grid.configs_for_k(5)
        assert configs[0] == EvalConfig("top-k", "claim-sim", "cos", 0.0, 0.0, 5)
        assert [c.ranker for c in configs] == ["top-k", "top-k", "kmeans", "kmeans"]

    def test_load_grid(self, tmp_path):
        (tmp_path / "grid.json").write_text('{"alphas": [0.25], "ks": [5, 10]}')
        grid = load_grid(tmp_path / "grid.json")
        assert grid.alphas == (0.25,)
        assert grid.ks == (5, 10)

    def test_load_grid_rejects_unknown_fields(self, tmp_path):
        (tmp_path / "grid.json").write_text('{"alpha": [0.25]}')
        with pytest.raises(CorpusFormatError, match="alpha"):
            load_grid(tmp_path / "grid.json")
