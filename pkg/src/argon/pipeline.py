"""End-to-end retrieval: candidate generation, threshold filtering, ranking.

Stages communicate by explicit value passing, so each one stays independently
testable.  :class:`Retriever` holds the immutable corpus, indexes, and score
sources, and caches candidate sets and representation vectors so sweeping
many ranker settings over the same queries stays cheap.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .corpus import Claim, Corpus
from .errors import CorpusFormatError, DanglingIdError, DataError
from .evaluation import EvalConfig
from .index import InvertedIndex, index_claims, index_premises
from .prefilter import CandidateSet, prefilter
from .ranker import (
    RANKER_KINDS,
    RankedResult,
    RankerConfig,
    biased_coreset,
    kmeans_ranker,
    top_k_ranker,
)
from .relevance import RelevanceSource, filter_by_threshold, load_scores
from .represent import EmbeddingStore, Representation, build_representation, load_embeddings

logger = logging.getLogger(__name__)

SCORER_KINDS = ("table", "zero-shot")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one retrieval run depends on; JSON-serializable."""

    m_claims: int = 10
    m_premises: int = 10
    same_topic_expansion: bool = False
    scorer: str = "table"
    scores_path: str | None = None
    embeddings_path: str | None = None
    ranker: str = "biased-coreset"
    ranker_config: RankerConfig = field(default_factory=lambda: RankerConfig(k=5))
    seed: int = 0
    kmeans_representative: str = "centroid"
    normalize_representation: bool = False
    claim_sample: int | None = None
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    dfr_c: float = 1.0

    def __post_init__(self):
        if self.m_claims < 1 or self.m_premises < 1:
            raise ValueError("retrieval cutoffs must be >= 1")
        if self.scorer not in SCORER_KINDS:
            raise ValueError(f"unknown scorer kind '{self.scorer}'")
        if self.ranker not in RANKER_KINDS:
            raise ValueError(f"unknown ranker kind '{self.ranker}'")

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "ranker_config"}
        d["ranker_config"] = {
            "k": self.ranker_config.k,
            "alpha": self.ranker_config.alpha,
            "representation": self.ranker_config.representation,
            "similarity": self.ranker_config.similarity,
            "tau": self.ranker_config.tau,
        }
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        raw = dict(raw)
        rc = raw.pop("ranker_config", {})
        known = {f for f in cls.__dataclass_fields__ if f != "ranker_config"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown pipeline config fields {sorted(unknown)}")
        return cls(ranker_config=RankerConfig(**rc) if rc else RankerConfig(k=5), **raw)


def load_pipeline_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"{path}: invalid JSON: {exc.msg}") from exc
    try:
        return PipelineConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise CorpusFormatError(f"{path}: {exc}") from exc


def write_pipeline_config(config: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


class Retriever:
    """Reusable retrieval context over one corpus and one relevance source."""

    def __init__(
        self,
        corpus: Corpus,
        config: PipelineConfig,
        source: RelevanceSource | None = None,
        embeddings: EmbeddingStore | None = None,
        claim_index: InvertedIndex | None = None,
        premise_index: InvertedIndex | None = None,
    ):
        self.corpus = corpus
        self.config = config
        self.claim_index = claim_index or index_claims(corpus.claims.values())
        self.premise_index = premise_index or index_premises(corpus.premises.values())
        self.embeddings = embeddings
        if self.embeddings is None and config.embeddings_path is not None:
            if not Path(config.embeddings_path).exists():
                raise DataError(f"embeddings file not found: {config.embeddings_path}")
            self.embeddings = load_embeddings(config.embeddings_path)
        if source is not None:
            self.source = source
        elif config.scorer == "table":
            if config.scores_path is None:
                raise DataError("table scorer requires a scores file")
            if not Path(config.scores_path).exists():
                raise DataError(f"scores file not found: {config.scores_path}")
            self.source = RelevanceSource.from_table(load_scores(config.scores_path))
        else:
            if self.embeddings is None:
                raise DataError("zero-shot scorer requires an embeddings file")
            self.source = RelevanceSource.from_embeddings(self.embeddings)
        self._candidate_cache: dict[str, CandidateSet] = {}
        self._vector_cache: dict[str, dict] = {"bert": {}, "claim-sim": {}}
        self._topic_cache: dict[str, dict] = {"bert": {}, "claim-sim": {}}

    # -- stages -----------------------------------------------------------

    def resolve_query(self, query: str | Claim) -> Claim:
        if isinstance(query, Claim):
            return query
        try:
            return self.corpus.claims[query]
        except KeyError:
            raise DanglingIdError(f"query claim '{query}' is not in the corpus") from None

    def candidates(self, claim: Claim) -> CandidateSet:
        cached = self._candidate_cache.get(claim.id)
        if cached is None:
            cached = prefilter(
                self.corpus,
                self.claim_index,
                self.premise_index,
                claim,
                m_claims=self.config.m_claims,
                m_premises=self.config.m_premises,
                same_topic=self.config.same_topic_expansion,
                dfr_c=self.config.dfr_c,
                bm25_k1=self.config.bm25_k1,
                bm25_b=self.config.bm25_b,
            )
            self._candidate_cache[claim.id] = cached
        return cached

    def representation(self, kind: str, premise_ids: Sequence[str]) -> Representation:
        cache = self._vector_cache[kind]
        topics = self._topic_cache[kind]
        missing = [pid for pid in premise_ids if pid not in cache]
        if missing:
            built = build_representation(
                [self.corpus.premises[pid] for pid in missing],
                kind,
                embeddings=self.embeddings,
                corpus=self.corpus,
                source=self.source,
                normalize=self.config.normalize_representation,
                claim_sample=self.config.claim_sample,
                seed=self.config.seed,
            )
            cache.update(built.vectors)
            topics.update(built.topics)
        return Representation(
            kind=kind,
            vectors={pid: cache[pid] for pid in premise_ids},
            topics={pid: topics[pid] for pid in premise_ids},
        )

    # -- retrieval --------------------------------------------------------

    def retrieve(self, query: str | Claim) -> RankedResult:
        rc = self.config.ranker_config
        cfg = EvalConfig(
            ranker=self.config.ranker,
            representation=rc.representation,
            similarity=rc.similarity,
            alpha=rc.alpha,
            tau=rc.tau,
            k=rc.k,
        )
        return self.retrieve_with(cfg, query)

    def retrieve_with(self, cfg: EvalConfig, query: str | Claim) -> RankedResult:
        claim = self.resolve_query(query)
        snapshot = RankerConfig(
            k=cfg.k,
            alpha=cfg.alpha,
            representation=cfg.representation,
            similarity=cfg.similarity,
            tau=cfg.tau,
        )
        candidate_set = self.candidates(claim)
        filtered = filter_by_threshold(candidate_set, self.source, claim.id, cfg.tau)
        if not filtered:
            logger.warning(
                "query '%s': no candidate passed the relevance threshold %.3f "
                "(candidate set had %d premises)",
                claim.id,
                cfg.tau,
                len(candidate_set),
            )
            return RankedResult(query_claim_id=claim.id, items=(), config=snapshot)
        if cfg.ranker == "top-k":
            return top_k_ranker(claim.id, filtered, cfg.k, config=snapshot)
        repr_ = self.representation(cfg.representation, [pid for pid, _ in filtered])
        if cfg.ranker == "biased-coreset":
            return biased_coreset(
                claim.id, filtered, repr_, cfg.similarity, cfg.k, cfg.alpha, config=snapshot
            )
        return kmeans_ranker(
            claim.id,
            filtered,
            repr_,
            cfg.k,
            seed=self.config.seed,
            representative=self.config.kmeans_representative,
            config=snapshot,
        )

    def pipeline_fn(self):
        """Adapter for the leave-one-out harness: (config, query) -> ranked ids."""

        def run(cfg: EvalConfig, query_claim_id: str) -> list[str]:
            return self.retrieve_with(cfg, query_claim_id).premise_ids()

        return run


def retrieve(
    corpus: Corpus,
    config: PipelineConfig,
    query_claim: str | Claim,
    source: RelevanceSource | None = None,
    embeddings: EmbeddingStore | None = None,
    claim_index: InvertedIndex | None = None,
    premise_index: InvertedIndex | None = None,
) -> RankedResult:
    """One-shot retrieval; builds a throwaway :class:`Retriever`."""
    retriever = Retriever(
        corpus,
        config,
        source=source,
        embeddings=embeddings,
        claim_index=claim_index,
        premise_index=premise_index,
    )
    return retriever.retrieve(query_claim)


def config_with(config: PipelineConfig, **ranker_fields) -> PipelineConfig:
    """Copy a config with updated ranker settings (k, alpha, tau, ...)."""
    return replace(config, ranker_config=replace(config.ranker_config, **ranker_fields))
