"""Candidate generation: lexical claim retrieval, cluster expansion, and
premise-to-premise BM25 expansion.

The pipeline is, in order: retrieve database claims by divergence-from-
randomness similarity to the query claim, widen to whole claim clusters,
collect the premises assigned to those claims (the seed set), then let every
seed premise act as a BM25 query over all premises (the expansion set).  The
candidate set is the union of seed and expansion.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Claim, Corpus
from .index import InvertedIndex, search_topk, tokenize


@dataclass(frozen=True)
class CandidateSet:
    query_claim_id: str
    seed: frozenset[str]
    expanded: frozenset[str]

    @property
    def all(self) -> frozenset[str]:
        return self.seed | self.expanded

    def __len__(self) -> int:
        return len(self.all)


def prefilter(
    corpus: Corpus,
    claim_index: InvertedIndex,
    premise_index: InvertedIndex,
    query_claim: Claim,
    m_claims: int = 10,
    m_premises: int = 10,
    same_topic: bool = False,
    dfr_c: float = 1.0,
    bm25_k1: float = 1.2,
    bm25_b: float = 0.75,
    tokenizer=tokenize,
) -> CandidateSet:
    """Produce the candidate premise set for one query claim.

    ``same_topic`` restricts the BM25 expansion of each seed premise to
    premises sharing its topic.  A query claim with no tokens yields an empty
    candidate set rather than an error.  ``tokenizer`` must match the one the
    indexes were built with.
    """
    if m_claims < 1 or m_premises < 1:
        raise ValueError("retrieval cutoffs must be >= 1")
    query_tokens = tokenizer(query_claim.text)
    if not query_tokens:
        return CandidateSet(query_claim_id=query_claim.id, seed=frozenset(), expanded=frozenset())

    retrieved = [doc_id for doc_id, _ in search_topk(claim_index, query_tokens, "dfr", m_claims, c=dfr_c)]

    # widen to whole claim clusters; unclustered claims stand alone
    claim_pool: set[str] = set()
    for cid in retrieved:
        cluster = corpus.claims[cid].cluster_id
        if cluster is None:
            claim_pool.add(cid)
        else:
            claim_pool.update(corpus.claims_in_cluster(cluster))

    seed: set[str] = set()
    for cid in claim_pool:
        seed.update(corpus.premises_for_claim(cid))

    expanded: set[str] = set()
    for pid in sorted(seed):
        premise = corpus.premises[pid]
        hits = search_topk(
            premise_index,
            tokenizer(premise.text),
            "bm25",
            premise_index.doc_count,
            k1=bm25_k1,
            b=bm25_b,
        )
        taken = 0
        for hit_id, _ in hits:
            if hit_id == pid:
                continue
            if same_topic and corpus.premises[hit_id].topic != premise.topic:
                continue
            expanded.add(hit_id)
            taken += 1
            if taken == m_premises:
                break

    return CandidateSet(
        query_claim_id=query_claim.id,
        seed=frozenset(seed),
        expanded=frozenset(expanded),
    )
