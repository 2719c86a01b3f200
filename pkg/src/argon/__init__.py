"""Argument retrieval engine.

Given a query claim, the engine produces a short list of relevant,
non-redundant premises in three stages: lexical candidate generation
(divergence-from-randomness claim retrieval plus BM25 premise expansion),
relevance filtering through a pluggable scorer, and diversity-aware ranking
(greedy biased-coreset selection, a k-means baseline, or plain top-k).
Rankings are scored with a duplicate-aware NDCG and tuned by leave-one-out
selection.
"""

from .corpus import (
    Assignment,
    Claim,
    Corpus,
    Judgment,
    MeaningCluster,
    Premise,
    load_corpus,
    load_corpus_dir,
    write_corpus,
)
from .errors import (
    CorpusFormatError,
    DanglingIdError,
    DataError,
    DuplicateIdError,
    MissingEmbeddingError,
    MissingScoreError,
    UnknownDocumentError,
)
from .evaluation import (
    EvalConfig,
    EvalConfigGrid,
    EvalReport,
    evaluate_run,
    loo_select,
    loo_sweep,
    modified_ndcg,
)
from .fixtures import FixtureScale, generate_fixture, synth_embeddings, synth_scores
from .index import (
    InvertedIndex,
    bm25_score,
    build_index,
    dfr_score,
    read_index,
    search_topk,
    tokenize,
    write_index,
)
from .pipeline import PipelineConfig, Retriever, retrieve
from .prefilter import CandidateSet, prefilter
from .ranker import (
    RankedItem,
    RankedResult,
    RankerConfig,
    biased_coreset,
    coverage_q,
    coverage_qbar,
    greedy_biased_selection,
    kmeans_ranker,
    top_k_ranker,
)
from .relevance import (
    RelevanceSource,
    TrainingPair,
    filter_by_threshold,
    generate_training_pairs,
    load_scores,
    write_scores,
)
from .represent import (
    EmbeddingStore,
    Representation,
    build_representation,
    claim_sim_vector,
    load_embeddings,
    similarity,
    write_embeddings,
)

__version__ = "0.1.0"
