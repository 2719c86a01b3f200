"""Synthetic corpus generation.

Real argument datasets are not redistributable, so tests and demos run on
generated corpora whose shape (judgment counts, grade split, duplicate-group
sizes) mirrors the published evaluation data.  Generation is a pure function
of ``(seed, scale)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .corpus import Assignment, Claim, Corpus, Judgment, MeaningCluster, Premise
from .represent import EmbeddingStore

# relevance bases per grade used by synth_scores
_GRADE_BASE = {2: 0.9, 1: 0.7, 0: 0.25}


@dataclass(frozen=True)
class FixtureScale:
    """Size knobs for a generated corpus.

    ``grade_counts`` fixes the exact number of grade-2/1/0 judgments; when it
    is None the split is apportioned from ``grade_fractions`` (largest
    remainder, so each proportion lands within one judgment of the request).
    """

    topics: int = 3
    claims_per_topic: int = 4
    premises_per_claim: int = 6
    claim_cluster_size: int = 2
    queries: int = 3
    total_judgments: int = 60
    grade_counts: tuple[int, int, int] | None = None  # (very relevant, relevant, not)
    grade_fractions: tuple[float, float, float] = (0.33, 0.12, 0.55)
    meaning_group_size: int = 3

    @classmethod
    def paper(cls) -> "FixtureScale":
        """Scale mirroring the published evaluation set statistics.

        1,195 judgments split 389 / 139 / 667, which clusters 528 premises.
        """
        return cls(
            topics=10,
            claims_per_topic=6,
            premises_per_claim=24,
            claim_cluster_size=2,
            queries=10,
            total_judgments=1195,
            grade_counts=(389, 139, 667),
            meaning_group_size=3,
        )

    def validate(self) -> None:
        if self.topics < 1 or self.claims_per_topic < 1:
            raise ValueError("scale must include at least one claim")
        if self.premises_per_claim < 1:
            raise ValueError("scale must include at least one premise per claim")
        if self.claim_cluster_size < 1 or self.meaning_group_size < 1:
            raise ValueError("cluster/group sizes must be >= 1")
        if self.queries < 1 or self.queries > self.topics * self.claims_per_topic:
            raise ValueError("queries must be between 1 and the number of claims")
        if self.total_judgments < self.queries:
            raise ValueError("need at least one judgment per query")
        if self.grade_counts is not None:
            if any(c < 0 for c in self.grade_counts):
                raise ValueError("grade counts must be non-negative")
            if sum(self.grade_counts) != self.total_judgments:
                raise ValueError("grade counts must sum to total_judgments")
        else:
            if any(f < 0 for f in self.grade_fractions) or sum(self.grade_fractions) <= 0:
                raise ValueError("grade fractions must be non-negative and not all zero")
        per_query_max = -(-self.total_judgments // self.queries)  # ceil
        pool = self.claims_per_topic * self.premises_per_claim
        if per_query_max > pool:
            raise ValueError(
                f"a query would need {per_query_max} judged premises but its topic "
                f"only holds {pool}"
            )


def _apportion(total: int, fractions: tuple[float, float, float]) -> tuple[int, int, int]:
    """Largest-remainder split of ``total`` into three integer counts."""
    norm = sum(fractions)
    raw = [total * f / norm for f in fractions]
    counts = [int(x) for x in raw]
    remainders = sorted(range(3), key=lambda i: (raw[i] - counts[i], -i), reverse=True)
    for i in remainders[: total - sum(counts)]:
        counts[i] += 1
    return tuple(counts)  # type: ignore[return-value]


def generate_fixture(seed: int, scale: FixtureScale) -> Corpus:
    """Generate a deterministic corpus for the given seed and scale."""
    scale.validate()
    rng = random.Random(seed)

    claims: dict[str, Claim] = {}
    premises: dict[str, Premise] = {}
    assignments: list[Assignment] = []
    owner_claim: dict[str, str] = {}
    premise_seq = 0

    for t in range(scale.topics):
        topic = f"topic{t:02d}"
        vocab = [f"t{t:02d}w{j}" for j in range(10)]
        for i in range(scale.claims_per_topic):
            cid = f"c{t:02d}{i:02d}"
            cluster = f"t{t:02d}g{i // scale.claim_cluster_size}"
            words = [vocab[0], f"{cluster}key", f"{cid}term"] + rng.sample(vocab[1:], 3)
            claims[cid] = Claim(id=cid, text=" ".join(words), topic=topic, cluster_id=cluster)
            for _ in range(scale.premises_per_claim):
                pid = f"p{premise_seq:05d}"
                premise_seq += 1
                pwords = [f"{cid}term"] + rng.sample(vocab, 2) + [f"{pid}x"]
                premises[pid] = Premise(id=pid, text=" ".join(pwords), topic=topic)
                assignments.append(Assignment(claim_id=cid, premise_id=pid))
                owner_claim[pid] = cid

    # query claims: round-robin over topics so every topic is exercised first
    all_claim_ids = sorted(claims)
    query_ids = []
    for j in range(scale.queries):
        t = j % scale.topics
        i = j // scale.topics
        query_ids.append(f"c{t:02d}{i:02d}")

    counts = scale.grade_counts or _apportion(scale.total_judgments, scale.grade_fractions)
    grade_pool = [2] * counts[0] + [1] * counts[1] + [0] * counts[2]
    rng.shuffle(grade_pool)

    base, extra = divmod(scale.total_judgments, scale.queries)
    judgments: list[Judgment] = []
    clusters: list[MeaningCluster] = []
    cursor = 0
    for qi, qid in enumerate(query_ids):
        size = base + (1 if qi < extra else 0)
        topic = claims[qid].topic
        pool = sorted(p.id for p in premises.values() if p.topic == topic)
        chosen = rng.sample(pool, size)
        grades = grade_pool[cursor : cursor + size]
        cursor += size
        for pid, grade in zip(chosen, grades):
            judgments.append(
                Judgment(
                    query_claim_id=qid,
                    result_claim_id=owner_claim[pid],
                    premise_id=pid,
                    grade=grade,
                )
            )
        relevant = [pid for pid, grade in zip(chosen, grades) if grade >= 1]
        for gi in range(0, len(relevant), scale.meaning_group_size):
            members = relevant[gi : gi + scale.meaning_group_size]
            clusters.append(
                MeaningCluster(
                    query_claim_id=qid,
                    label=f"{qid}:m{gi // scale.meaning_group_size:03d}",
                    premise_ids=tuple(members),
                )
            )

    assert len(all_claim_ids) == scale.topics * scale.claims_per_topic
    return Corpus(
        claims=claims,
        premises=premises,
        assignments=tuple(assignments),
        judgments=tuple(judgments),
        meaning_clusters=tuple(clusters),
    )


def _premise_ideas(corpus: Corpus) -> dict[str, tuple[str, str]]:
    """premise id -> (query claim, cluster label), first cluster in sort order."""
    ideas: dict[str, tuple[str, str]] = {}
    for mc in sorted(corpus.meaning_clusters, key=lambda m: (m.query_claim_id, m.label)):
        for pid in mc.premise_ids:
            ideas.setdefault(pid, (mc.query_claim_id, mc.label))
    return ideas


def synth_scores(corpus: Corpus, seed: int, noise: float = 0.03) -> dict[tuple[str, str], float]:
    """Deterministic relevance table over all same-topic (claim, premise) pairs.

    Judged pairs score near a grade-dependent base; premises sharing a meaning
    cluster get near-identical scores against every other claim of the topic,
    so their stacked-score representations are close while their relevance to
    the query still tracks the grade.
    """
    rng = random.Random(seed)
    ideas = _premise_ideas(corpus)
    judged: dict[tuple[str, str], int] = {}
    for j in corpus.judgments:
        key = (j.query_claim_id, j.premise_id)
        if judged.get(key, -1) < j.grade:
            judged[key] = j.grade

    topics = sorted({c.topic for c in corpus.claims.values()})
    idea_affinity: dict[tuple[str, str], float] = {}
    table: dict[tuple[str, str], float] = {}
    for topic in topics:
        claim_ids = corpus.claims_by_topic(topic)
        premise_ids = sorted(p.id for p in corpus.premises.values() if p.topic == topic)
        for cid in claim_ids:
            for pid in premise_ids:
                if (cid, pid) in judged:
                    value = _GRADE_BASE[judged[(cid, pid)]] + noise * rng.uniform(-1, 1)
                elif pid in ideas:
                    key = (ideas[pid][1], cid)
                    if key not in idea_affinity:
                        idea_affinity[key] = rng.uniform(0.05, 0.6)
                    value = idea_affinity[key] + 0.5 * noise * rng.uniform(-1, 1)
                else:
                    value = rng.uniform(0.05, 0.5)
                table[(cid, pid)] = min(1.0, max(0.0, value))
    return table


def synth_embeddings(corpus: Corpus, dim: int = 16, seed: int = 0) -> EmbeddingStore:
    """Deterministic embeddings: topic anchors for claims, idea anchors for premises."""
    rng = np.random.default_rng(seed)
    ideas = _premise_ideas(corpus)

    topics = sorted({c.topic for c in corpus.claims.values()} | {p.topic for p in corpus.premises.values()})
    topic_anchor = {t: rng.normal(size=dim) for t in topics}
    idea_anchor: dict[tuple[str, str], np.ndarray] = {}
    for mc in sorted(corpus.meaning_clusters, key=lambda m: (m.query_claim_id, m.label)):
        key = (mc.query_claim_id, mc.label)
        if key not in idea_anchor:
            topic = corpus.claims[mc.query_claim_id].topic
            idea_anchor[key] = topic_anchor[topic] + rng.normal(size=dim)

    vectors: dict[str, np.ndarray] = {}
    for cid in sorted(corpus.claims):
        vectors[cid] = topic_anchor[corpus.claims[cid].topic] + 0.5 * rng.normal(size=dim)
    for pid in sorted(corpus.premises):
        if pid in ideas:
            vectors[pid] = idea_anchor[ideas[pid]] + 0.15 * rng.normal(size=dim)
        else:
            vectors[pid] = topic_anchor[corpus.premises[pid].topic] + rng.normal(size=dim)
    return EmbeddingStore(dim=dim, vectors=vectors)
