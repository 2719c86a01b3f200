"""
The retrieval pipeline, stage by stage
======================================

Candidate generation, relevance filtering, and diversity-aware ranking on a
synthetic corpus.  The biased-coreset ranker is compared with plain top-k to
show how near-duplicate premises are suppressed.
"""

from argon import (
    PipelineConfig,
    RelevanceSource,
    Retriever,
    build_representation,
    coverage_qbar,
    filter_by_threshold,
    generate_fixture,
)
from argon.evaluation import EvalConfig
from argon.fixtures import FixtureScale, synth_scores

# A small corpus whose judged premises come in duplicate groups of three:
# three premises per meaning cluster express the same idea.
scale = FixtureScale(topics=2, claims_per_topic=4, premises_per_claim=10,
                     queries=2, total_judgments=60, meaning_group_size=3)
corpus = generate_fixture(3, scale)
source = RelevanceSource.from_table(synth_scores(corpus, seed=3))
retriever = Retriever(corpus, PipelineConfig(scorer="table"), source=source)

query = corpus.query_claim_ids()[0]
print(f"query claim: {query!r}  text: {corpus.claims[query].text!r}")

# Stage 1: candidate generation.  Claims similar to the query are retrieved
# by InL2, widened to whole claim clusters; their assigned premises seed the
# pool, and each seed premise pulls in its BM25 neighbours.
candidates = retriever.candidates(corpus.claims[query])
print(f"candidates: {len(candidates.seed)} seeded, {len(candidates.expanded)} "
      f"expanded, {len(candidates.all)} total")

# Stage 2: relevance filtering keeps candidates scoring strictly above tau.
filtered = filter_by_threshold(candidates, source, query, tau=0.4)
print(f"{len(filtered)} candidates above tau=0.4; best: {filtered[:3]}")

# Stage 3: ranking.  Top-k keeps the most relevant premises even when they
# repeat an idea; the biased coreset trades relevance against similarity to
# what is already selected (alpha weighs the two terms).
topk = retriever.retrieve_with(EvalConfig("top-k", "claim-sim", "cos", 1.0, 0.4, 5), query)
coreset = retriever.retrieve_with(
    EvalConfig("biased-coreset", "claim-sim", "cos", 0.5, 0.4, 5), query
)
labels = corpus.cluster_labels_for_query(query)
print("top-k   :", [(i.premise_id, labels.get(i.premise_id, "-")) for i in topk.items])
print("coreset :", [(i.premise_id, labels.get(i.premise_id, "-")) for i in coreset.items])

# Coverage of the filtered pool: the minimum over candidates of their best
# similarity to a selected premise.  The coreset selection covers the pool
# better than a pure relevance cut.
rep = build_representation(
    [corpus.premises[p] for p, _ in filtered], "claim-sim", corpus=corpus, source=source
)
pool = [p for p, _ in filtered]
print(f"coverage of pool: top-k {coverage_qbar(topk.premise_ids(), pool, rep, 'cos'):.3f}, "
      f"coreset {coverage_qbar(coreset.premise_ids(), pool, rep, 'cos'):.3f}")
