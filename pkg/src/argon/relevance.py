"""Relevance scoring, threshold filtering, and training-pair generation.

The learned model itself lives outside the engine.  Scores arrive either as a
precomputed table (``scores.jsonl``) produced by any classifier, or zero-shot
as embedding cosine mapped to [0, 1].  The training-pair generator emits the
positive/negative pairs an external trainer would consume, with negatives
mined as the hardest non-co-occurring premises by embedding cosine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .errors import CorpusFormatError, MissingScoreError
from .prefilter import CandidateSet
from .represent import EmbeddingStore, similarity

NEGATIVE_MODES = ("global", "same-topic")


@dataclass(frozen=True)
class TrainingPair:
    premise_id: str
    claim_id: str
    label: int  # 1 = relevant pair, 0 = mined negative


class RelevanceSource:
    """Pluggable (claim, premise) -> score in [0, 1].

    ``kind`` is ``table`` for a precomputed score map or ``zero-shot`` for
    embedding cosine rescaled to [0, 1].  Lookups never fall back to 0: a
    missing entry or embedding raises.
    """

    def __init__(
        self,
        kind: str,
        table: Mapping[tuple[str, str], float] | None = None,
        embeddings: EmbeddingStore | None = None,
    ):
        if kind == "table":
            if table is None:
                raise ValueError("table source requires a score table")
            for (cid, pid), value in table.items():
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"score for ({cid}, {pid}) is {value}, outside [0, 1]")
            self.table = dict(table)
            self.embeddings = None
        elif kind == "zero-shot":
            if embeddings is None:
                raise ValueError("zero-shot source requires an embedding store")
            self.table = None
            self.embeddings = embeddings
        else:
            raise ValueError(f"unknown relevance source kind '{kind}'")
        self.kind = kind

    @classmethod
    def from_table(cls, table: Mapping[tuple[str, str], float]) -> "RelevanceSource":
        return cls("table", table=table)

    @classmethod
    def from_embeddings(cls, embeddings: EmbeddingStore) -> "RelevanceSource":
        return cls("zero-shot", embeddings=embeddings)

    def score(self, claim_id: str, premise_id: str) -> float:
        if self.kind == "table":
            try:
                return self.table[(claim_id, premise_id)]
            except KeyError:
                raise MissingScoreError(
                    f"no score entry for claim '{claim_id}', premise '{premise_id}'"
                ) from None
        cos = similarity(self.embeddings[claim_id], self.embeddings[premise_id], "cos")
        return (cos + 1.0) / 2.0


def score(source: RelevanceSource, claim_id: str, premise_id: str) -> float:
    """Free-function form of :meth:`RelevanceSource.score`."""
    return source.score(claim_id, premise_id)


def filter_by_threshold(
    candidates: CandidateSet | Iterable[str],
    source: RelevanceSource,
    query_claim_id: str,
    tau: float,
) -> list[tuple[str, float]]:
    """Keep candidates scoring strictly above ``tau``.

    Returns (premise id, score) pairs in descending score order, ties broken
    by ascending id.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    ids = candidates.all if isinstance(candidates, CandidateSet) else set(candidates)
    kept = []
    for pid in sorted(ids):
        value = source.score(query_claim_id, pid)
        if value > tau:
            kept.append((pid, value))
    kept.sort(key=lambda pair: (-pair[1], pair[0]))
    return kept


def generate_training_pairs(
    corpus: Corpus,
    embeddings: EmbeddingStore,
    l_negatives: int,
    negatives: str = "global",
) -> list[TrainingPair]:
    """Emit one positive per assignment plus up to L mined negatives.

    Negatives for a positive pair (p, c) are the premises most similar to p by
    embedding cosine that are not assigned to c; ``same-topic`` restricts the
    candidate pool to the claim's topic.  Ties break by ascending premise id.
    """
    if l_negatives < 0:
        raise ValueError("number of negatives per positive must be >= 0")
    if negatives not in NEGATIVE_MODES:
        raise ValueError(f"unknown negative mode '{negatives}', expected one of {NEGATIVE_MODES}")

    assigned_to: dict[str, set[str]] = {}
    for a in corpus.assignments:
        assigned_to.setdefault(a.claim_id, set()).add(a.premise_id)

    all_premise_ids = sorted(corpus.premises)
    matrix = np.stack([embeddings[pid] for pid in all_premise_ids]) if all_premise_ids else None
    norms = np.linalg.norm(matrix, axis=1) if matrix is not None else None

    def top_similar(anchor_id: str, pool: list[int], count: int) -> list[str]:
        if count == 0 or not pool:
            return []
        anchor = embeddings[anchor_id]
        anchor_norm = float(np.linalg.norm(anchor))
        sub = matrix[pool]
        sub_norms = norms[pool]
        with np.errstate(divide="ignore", invalid="ignore"):
            cos = (sub @ anchor) / (sub_norms * anchor_norm)
        cos = np.nan_to_num(cos, nan=-2.0)  # zero vectors rank last
        order = sorted(range(len(pool)), key=lambda i: (-cos[i], all_premise_ids[pool[i]]))
        return [all_premise_ids[pool[i]] for i in order[:count]]

    position = {pid: i for i, pid in enumerate(all_premise_ids)}
    pairs: list[TrainingPair] = []
    seen_positive = set()
    for a in sorted(corpus.assignments, key=lambda a: (a.claim_id, a.premise_id)):
        key = (a.claim_id, a.premise_id)
        if key in seen_positive:
            continue
        seen_positive.add(key)
        pairs.append(TrainingPair(premise_id=a.premise_id, claim_id=a.claim_id, label=1))
        co_occurring = assigned_to[a.claim_id]
        pool = []
        claim_topic = corpus.claims[a.claim_id].topic
        for pid in all_premise_ids:
            if pid in co_occurring:
                continue
            if negatives == "same-topic" and corpus.premises[pid].topic != claim_topic:
                continue
            pool.append(position[pid])
        for neg in top_similar(a.premise_id, pool, l_negatives):
            pairs.append(TrainingPair(premise_id=neg, claim_id=a.claim_id, label=0))
    return pairs


# ---------------------------------------------------------------------------
# file formats: scores.jsonl and training_pairs.jsonl


def load_scores(path: str | Path) -> dict[tuple[str, str], float]:
    path = Path(path)
    table: dict[tuple[str, str], float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            for key in ("claim_id", "premise_id", "score"):
                if key not in rec:
                    raise CorpusFormatError(f"{path}:{lineno}: missing required field '{key}'")
            value = rec["score"]
            if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                raise CorpusFormatError(f"{path}:{lineno}: score must be a number in [0, 1]")
            table[(rec["claim_id"], rec["premise_id"])] = float(value)
    return table


def write_scores(table: Mapping[tuple[str, str], float], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (cid, pid) in sorted(table):
            rec = {"claim_id": cid, "premise_id": pid, "score": table[(cid, pid)]}
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")


def write_training_pairs(pairs: Sequence[TrainingPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            rec = {"premise_id": pair.premise_id, "claim_id": pair.claim_id, "label": pair.label}
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
