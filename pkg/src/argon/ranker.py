"""Final premise selection.

Three rankers produce the user-facing list:

* greedy biased-coreset selection: the first pick maximizes ``alpha * R[p]``;
  every later pick maximizes ``alpha * R[p] - (1 - alpha) * max_{a in A}
  psim(a, p)`` over the remaining candidates, so high relevance is traded off
  against proximity to what is already selected.  ``alpha = 1`` degenerates to
  a pure relevance sort, ``alpha = 0`` to greedy k-center selection.
* a k-means baseline: cluster the representation vectors, keep at most one
  premise per cluster, order by relevance.
* plain top-k by relevance.

Ties everywhere break by higher relevance, then ascending premise id, which
pins down the output even when the objective is constant (e.g. the first pick
at ``alpha = 0``).

Coverage of a selection is measured by ``coverage_q`` (similarity of one
premise to its best representative) and ``coverage_qbar`` (the worst such
value over a candidate pool); the greedy loop maximizes the latter at
``alpha = 0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .represent import REPRESENTATION_KINDS, Representation, normalize_similarity_kind

RANKER_KINDS = ("biased-coreset", "kmeans", "top-k")


@dataclass(frozen=True)
class RankerConfig:
    k: int
    alpha: float = 0.5
    representation: str = "claim-sim"
    similarity: str = "cos"
    tau: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        if self.representation not in REPRESENTATION_KINDS:
            raise ValueError(f"unknown representation kind '{self.representation}'")
        object.__setattr__(self, "similarity", normalize_similarity_kind(self.similarity))


@dataclass(frozen=True)
class RankedItem:
    premise_id: str
    relevance: float
    selection_score: float


@dataclass(frozen=True)
class RankedResult:
    query_claim_id: str
    items: tuple[RankedItem, ...]
    config: RankerConfig

    def premise_ids(self) -> list[str]:
        return [item.premise_id for item in self.items]


def _validate_candidates(candidates: Sequence[tuple[str, float]]) -> dict[str, float]:
    if len(candidates) == 0:
        raise ValueError("candidate set is empty")
    relevance: dict[str, float] = {}
    for pid, rel in candidates:
        if pid in relevance:
            raise ValueError(f"duplicate candidate premise '{pid}'")
        if not 0.0 <= rel <= 1.0:
            raise ValueError(f"relevance of '{pid}' is {rel}, outside [0, 1]")
        relevance[pid] = rel
    return relevance


def greedy_biased_selection(
    ids: Sequence[str],
    relevance: Mapping[str, float],
    psim: Callable[[str, str], float],
    k: int,
    alpha: float,
) -> list[tuple[str, float]]:
    """Core greedy loop over an arbitrary pairwise-similarity callable.

    Returns (premise id, objective value at pick time) in selection order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    remaining = list(ids)
    max_sim = {pid: 0.0 for pid in remaining}  # overwritten on first pick
    selected: list[tuple[str, float]] = []
    for step in range(min(k, len(remaining))):

        def objective(pid: str) -> float:
            if step == 0:
                return alpha * relevance[pid]
            return alpha * relevance[pid] - (1.0 - alpha) * max_sim[pid]

        best_id = min(remaining, key=lambda pid: (-objective(pid), -relevance[pid], pid))
        selected.append((best_id, objective(best_id)))
        remaining.remove(best_id)
        for pid in remaining:
            value = psim(best_id, pid)
            if step == 0 or value > max_sim[pid]:
                max_sim[pid] = value
    return selected


def biased_coreset(
    query_claim_id: str,
    candidates: Sequence[tuple[str, float]],
    repr_: Representation,
    sim_kind: str,
    k: int,
    alpha: float,
    config: RankerConfig | None = None,
) -> RankedResult:
    """Greedy biased-coreset ranking of scored candidates."""
    relevance = _validate_candidates(candidates)
    sim_kind = normalize_similarity_kind(sim_kind)
    ids = sorted(relevance)
    matrix = repr_.pairwise_matrix(ids, sim_kind)
    pos = {pid: i for i, pid in enumerate(ids)}

    def psim(a: str, b: str) -> float:
        return float(matrix[pos[a], pos[b]])

    picks = greedy_biased_selection(ids, relevance, psim, k, alpha)
    if config is None:
        config = RankerConfig(k=k, alpha=alpha, representation=repr_.kind, similarity=sim_kind)
    return RankedResult(
        query_claim_id=query_claim_id,
        items=tuple(
            RankedItem(premise_id=pid, relevance=relevance[pid], selection_score=obj)
            for pid, obj in picks
        ),
        config=config,
    )


def top_k_ranker(
    query_claim_id: str,
    candidates: Sequence[tuple[str, float]],
    k: int,
    config: RankerConfig | None = None,
) -> RankedResult:
    """The k most relevant candidates, no de-duplication."""
    relevance = _validate_candidates(candidates)
    if k < 1:
        raise ValueError("k must be >= 1")
    order = sorted(relevance, key=lambda pid: (-relevance[pid], pid))[:k]
    if config is None:
        config = RankerConfig(k=k, alpha=1.0)
    return RankedResult(
        query_claim_id=query_claim_id,
        items=tuple(
            RankedItem(premise_id=pid, relevance=relevance[pid], selection_score=relevance[pid])
            for pid in order
        ),
        config=config,
    )


def coverage_q(
    premise_id: str,
    selected: Sequence[str],
    repr_: Representation,
    sim_kind: str = "cos",
) -> float:
    """How well one premise is represented: max similarity to any selected item."""
    if len(selected) == 0:
        raise ValueError("selection is empty")
    return max(repr_.sim(premise_id, a, sim_kind) for a in selected)


def coverage_qbar(
    selected: Sequence[str],
    pool: Sequence[str],
    repr_: Representation,
    sim_kind: str = "cos",
) -> float:
    """Worst-case representation of the pool by the selection."""
    if len(pool) == 0:
        raise ValueError("candidate pool is empty")
    return min(coverage_q(pid, selected, repr_, sim_kind) for pid in pool)


# ---------------------------------------------------------------------------
# k-means baseline


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    first = int(rng.integers(n))
    centers = [points[first]]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = float(d2.sum())
        if total == 0.0:
            idx = int(rng.integers(n))  # duplicate points: any pick is equivalent
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers.append(points[idx])
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return np.stack(centers)


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int = 100) -> np.ndarray:
    """Run Lloyd's iterations; returns final point-to-cluster labels."""
    labels = None
    for _ in range(max_iter):
        d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=-1)
        new_labels = np.argmin(d2, axis=1)
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
        for ci in range(centers.shape[0]):
            members = points[labels == ci]
            if members.shape[0] > 0:
                centers[ci] = members.mean(axis=0)
    return labels


def kmeans_ranker(
    query_claim_id: str,
    candidates: Sequence[tuple[str, float]],
    repr_: Representation,
    k: int,
    seed: int = 0,
    representative: str = "centroid",
    config: RankerConfig | None = None,
) -> RankedResult:
    """Cluster candidates and keep at most one premise per non-empty cluster.

    ``representative`` picks either the premise closest to the centroid
    (default) or the most relevant member (``relevant``).  Output is ordered
    by descending relevance.  With ``k`` at least the number of candidates
    every premise forms its own cluster, so this reduces to a relevance sort.
    """
    relevance = _validate_candidates(candidates)
    if k < 1:
        raise ValueError("k must be >= 1")
    if representative not in ("centroid", "relevant"):
        raise ValueError("representative must be 'centroid' or 'relevant'")
    ids = sorted(relevance)
    if config is None:
        config = RankerConfig(k=k, alpha=0.0, representation=repr_.kind)

    def result(chosen: list[str]) -> RankedResult:
        chosen.sort(key=lambda pid: (-relevance[pid], pid))
        return RankedResult(
            query_claim_id=query_claim_id,
            items=tuple(
                RankedItem(premise_id=pid, relevance=relevance[pid], selection_score=relevance[pid])
                for pid in chosen[:k]
            ),
            config=config,
        )

    if k >= len(ids):
        return result(list(ids))

    for other in ids[1:]:
        repr_.check_comparable(ids[0], other)
    points = np.stack([repr_.vector(pid) for pid in ids]).astype(np.float64)
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(points, k, rng)
    labels = _lloyd(points, centers)

    chosen: list[str] = []
    for ci in range(k):
        member_idx = np.flatnonzero(labels == ci)
        if member_idx.size == 0:
            continue
        if representative == "centroid":
            dist = np.sum((points[member_idx] - centers[ci]) ** 2, axis=1)
            chosen.append(ids[member_idx[int(np.argmin(dist))]])  # argmin tie -> lowest id
        else:
            members = [ids[i] for i in member_idx]
            chosen.append(min(members, key=lambda pid: (-relevance[pid], pid)))
    return result(chosen)


# ---------------------------------------------------------------------------
# results.jsonl


def write_results(results: Sequence[RankedResult], dest) -> None:
    """Write results.jsonl to a path or an open text stream."""

    def emit(fh):
        for res in results:
            for rank, item in enumerate(res.items, start=1):
                rec = {
                    "query_claim_id": res.query_claim_id,
                    "rank": rank,
                    "premise_id": item.premise_id,
                    "relevance": item.relevance,
                    "selection_score": item.selection_score,
                }
                fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")

    if hasattr(dest, "write"):
        emit(dest)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            emit(fh)


def load_results(path: str | Path) -> dict[str, list[str]]:
    """Read results.jsonl back into query -> ranked premise ids."""
    rows: dict[str, list[tuple[int, str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            rows.setdefault(rec["query_claim_id"], []).append((rec["rank"], rec["premise_id"]))
    return {qid: [pid for _, pid in sorted(pairs)] for qid, pairs in rows.items()}
