"""Ranking quality metrics and the leave-one-out hyperparameter harness.

The metric is a duplicate-aware NDCG: within one query, premises judged to
express the same idea share a meaning-cluster label, and only the first
premise of a cluster to appear in the ranking earns its grade as gain; later
members earn nothing.  The ideal list places each cluster once, at its
maximum grade, in descending order.  Graded premises outside any cluster
count as singleton ideas; unjudged premises score zero.

Hyperparameters are chosen per held-out query: for every query the config
maximizing the mean metric over all *other* queries is selected, the query is
scored under that config, and the held-out scores are averaged.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .corpus import Corpus
from .errors import CorpusFormatError, DataError
from .ranker import RANKER_KINDS
from .represent import REPRESENTATION_KINDS, normalize_similarity_kind

logger = logging.getLogger(__name__)


def modified_ndcg(
    ranking: Sequence[str],
    grades: Mapping[str, int],
    clusters: Mapping[str, str],
    k: int,
) -> float:
    """Duplicate-aware NDCG of one ranking, truncated to ``k``.

    ``grades`` maps premise id to grade for this query; ``clusters`` maps
    premise id to its meaning-cluster label.  Premises missing from
    ``grades`` are treated as grade 0 (logged, not an error).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    seen: set[str] = set()
    dcg = 0.0
    for i, pid in enumerate(ranking[:k], start=1):
        if pid not in grades:
            logger.debug("premise '%s' has no judgment for this query; counted as grade 0", pid)
        grade = grades.get(pid, 0)
        if grade <= 0:
            continue
        label = clusters.get(pid, pid)  # graded but unclustered: its own idea
        if label in seen:
            continue
        seen.add(label)
        dcg += grade / math.log2(i + 1)

    best_per_label: dict[str, int] = {}
    for pid, grade in grades.items():
        if grade <= 0:
            continue
        label = clusters.get(pid, pid)
        if grade > best_per_label.get(label, 0):
            best_per_label[label] = grade
    ideal = sorted(best_per_label.values(), reverse=True)[:k]
    idcg = sum(g / math.log2(i + 1) for i, g in enumerate(ideal, start=1))
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


def query_eval_data(corpus: Corpus, query_claim_id: str) -> tuple[dict[str, int], dict[str, str]]:
    """(grades, cluster labels) for one query claim."""
    return corpus.grades_for_query(query_claim_id), corpus.cluster_labels_for_query(query_claim_id)


# ---------------------------------------------------------------------------
# configs and reports


@dataclass(frozen=True)
class EvalConfig:
    ranker: str
    representation: str
    similarity: str
    alpha: float
    tau: float
    k: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EvalConfigGrid:
    """Axes of the hyperparameter sweep; enumeration order is fixed."""

    alphas: tuple[float, ...] = (0.5,)
    taus: tuple[float, ...] = (0.0,)
    representations: tuple[str, ...] = ("claim-sim",)
    similarities: tuple[str, ...] = ("cos",)
    rankers: tuple[str, ...] = ("biased-coreset",)
    ks: tuple[int, ...] = (5,)

    def __post_init__(self):
        for name in ("alphas", "taus", "representations", "similarities", "rankers", "ks"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"grid axis '{name}' is empty")
        if any(not 0.0 <= a <= 1.0 for a in self.alphas):
            raise ValueError("alphas must lie in [0, 1]")
        if any(not 0.0 <= t <= 1.0 for t in self.taus):
            raise ValueError("taus must lie in [0, 1]")
        for r in self.representations:
            if r not in REPRESENTATION_KINDS:
                raise ValueError(f"unknown representation kind '{r}'")
        object.__setattr__(
            self, "similarities", tuple(normalize_similarity_kind(s) for s in self.similarities)
        )
        for r in self.rankers:
            if r not in RANKER_KINDS:
                raise ValueError(f"unknown ranker kind '{r}'")
        if any(k < 1 for k in self.ks):
            raise ValueError("ks must be >= 1")

    def configs_for_k(self, k: int) -> list[EvalConfig]:
        return [
            EvalConfig(ranker=r, representation=rep, similarity=s, alpha=a, tau=t, k=k)
            for r, rep, s, a, t in itertools.product(
                self.rankers, self.representations, self.similarities, self.alphas, self.taus
            )
        ]


def load_grid(path: str | Path) -> EvalConfigGrid:
    """Read a sweep grid from JSON; absent axes fall back to singleton defaults."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"{path}: invalid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise CorpusFormatError(f"{path}: grid file must hold a JSON object")
    known = {"alphas", "taus", "representations", "similarities", "rankers", "ks"}
    unknown = set(raw) - known
    if unknown:
        raise CorpusFormatError(f"{path}: unknown grid fields {sorted(unknown)}")
    kwargs = {key: tuple(value) for key, value in raw.items()}
    try:
        return EvalConfigGrid(**kwargs)
    except ValueError as exc:
        raise CorpusFormatError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class QueryScore:
    query_claim_id: str
    ndcg: float
    config: EvalConfig | None = None


@dataclass(frozen=True)
class EvalReport:
    k: int
    mean_ndcg: float
    per_query: tuple[QueryScore, ...]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "mean_ndcg": self.mean_ndcg,
            "per_query": [
                {
                    "query_claim_id": q.query_claim_id,
                    "ndcg": q.ndcg,
                    "config": q.config.to_dict() if q.config is not None else None,
                }
                for q in self.per_query
            ],
        }


@dataclass(frozen=True)
class SweepResult:
    reports: tuple[EvalReport, ...]
    matrix: tuple[tuple[EvalConfig, str, float], ...]  # (config, query, score)


# ---------------------------------------------------------------------------
# evaluation drivers


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("ARGON_THREADS", "1")))
    except ValueError:
        return 1


def _map_queries(fn: Callable[[str], float], queries: Sequence[str]) -> dict[str, float]:
    workers = _worker_count()
    if workers == 1 or len(queries) <= 1:
        return {qid: fn(qid) for qid in queries}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return dict(zip(queries, pool.map(fn, queries)))


def evaluate_run(results: Mapping[str, Sequence[str]], corpus: Corpus, k: int) -> EvalReport:
    """Score one ranking per query and average, in ascending query-id order."""
    queries = sorted(results)
    if not queries:
        raise ValueError("no queries to evaluate")
    judged = set(corpus.query_claim_ids())
    per_query = []
    for qid in queries:
        if qid not in judged:
            raise DataError(f"query '{qid}' has no judgments")
        grades, clusters = query_eval_data(corpus, qid)
        per_query.append(QueryScore(qid, modified_ndcg(results[qid], grades, clusters, k)))
    mean = sum(q.ndcg for q in per_query) / len(per_query)
    return EvalReport(k=k, mean_ndcg=mean, per_query=tuple(per_query))


def loo_select(
    matrix: Sequence[Mapping[str, float]],
    queries: Sequence[str],
) -> tuple[dict[str, int], dict[str, float], float]:
    """Pick, per held-out query, the config with the best mean over the rest.

    ``matrix[ci][qid]`` is the score of config ``ci`` on query ``qid``.  Ties
    keep the earliest config.  Returns (chosen config index per query,
    held-out score per query, mean held-out score).
    """
    if len(matrix) == 0:
        raise ValueError("empty grid")
    if len(queries) < 2:
        raise ValueError("leave-one-out needs at least 2 query claims")
    chosen: dict[str, int] = {}
    held_out: dict[str, float] = {}
    for qid in queries:
        best_ci = None
        best_mean = None
        for ci, row in enumerate(matrix):
            rest = [row[other] for other in queries if other != qid]
            mean_rest = sum(rest) / len(rest)
            if best_mean is None or mean_rest > best_mean:
                best_ci, best_mean = ci, mean_rest
        chosen[qid] = best_ci
        held_out[qid] = matrix[best_ci][qid]
    mean = sum(held_out[qid] for qid in queries) / len(queries)
    return chosen, held_out, mean


def loo_sweep(
    corpus: Corpus,
    grid: EvalConfigGrid,
    pipeline: Callable[[EvalConfig, str], Sequence[str]],
    queries: Sequence[str] | None = None,
) -> SweepResult:
    """Run the grid through ``pipeline`` and select configs per held-out query.

    ``pipeline(config, query_claim_id)`` must return the ranked premise ids
    for that query under that config.  One report is produced per k in the
    grid; selection compares only configs sharing the held-out query's k.
    """
    queries = sorted(queries if queries is not None else corpus.query_claim_ids())
    if len(queries) < 2:
        raise ValueError("leave-one-out needs at least 2 query claims")
    eval_data = {qid: query_eval_data(corpus, qid) for qid in queries}

    reports = []
    matrix_rows = []
    for k in grid.ks:
        configs = grid.configs_for_k(k)
        matrix: list[dict[str, float]] = []
        for cfg in configs:

            def score_one(qid: str, cfg: EvalConfig = cfg) -> float:
                grades, clusters = eval_data[qid]
                return modified_ndcg(pipeline(cfg, qid), grades, clusters, k)

            row = _map_queries(score_one, queries)
            matrix.append(row)
            matrix_rows.extend((cfg, qid, row[qid]) for qid in queries)
        chosen, held_out, mean = loo_select(matrix, queries)
        reports.append(
            EvalReport(
                k=k,
                mean_ndcg=mean,
                per_query=tuple(
                    QueryScore(qid, held_out[qid], configs[chosen[qid]]) for qid in queries
                ),
            )
        )
    return SweepResult(reports=tuple(reports), matrix=tuple(matrix_rows))


# ---------------------------------------------------------------------------
# report serialization


def report_to_json(reports: Sequence[EvalReport]) -> str:
    """Single report -> one object; several ks -> a JSON array."""
    payload = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_report(reports: Sequence[EvalReport], path: str | Path) -> None:
    Path(path).write_text(report_to_json(reports), encoding="utf-8")


def write_sweep_csv(result: SweepResult, path: str | Path) -> None:
    """Long-form config-by-query score matrix."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["k", "ranker", "representation", "similarity", "alpha", "tau", "query_claim_id", "ndcg"]
        )
        for cfg, qid, value in result.matrix:
            writer.writerow(
                [cfg.k, cfg.ranker, cfg.representation, cfg.similarity, cfg.alpha, cfg.tau, qid, value]
            )
