"""Command-line entry point.

Subcommands: ``fixture``, ``index``, ``retrieve``, ``gen-pairs``,
``evaluate``, ``sweep``.  Exit codes: 0 success, 1 usage error, 2 data error.
Progress goes to stderr; machine output goes to files or stdout.  The
environment variable ``ARGON_THREADS`` caps internal parallelism.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import evaluation, fixtures, ranker, relevance, represent
from .corpus import Claim, load_corpus_dir, write_corpus
from .errors import DataError
from .index import index_claims, index_premises, write_index
from .pipeline import PipelineConfig, Retriever, load_pipeline_config

logger = logging.getLogger("argon")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract is exit 1
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="argon", description="Argument retrieval engine.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixture", help="generate a synthetic corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--paper-scale", action="store_true", help="mirror the published dataset statistics")
    p.add_argument("--topics", type=int)
    p.add_argument("--claims-per-topic", type=int)
    p.add_argument("--premises-per-claim", type=int)
    p.add_argument("--claim-cluster-size", type=int)
    p.add_argument("--queries", type=int)
    p.add_argument("--judgments", type=int)
    p.add_argument("--grade-counts", help="exact counts, e.g. 389,139,667")
    p.add_argument("--grade-fractions", help="proportions, e.g. 0.33,0.12,0.55")
    p.add_argument("--group-size", type=int, help="meaning-cluster (duplicate) group size")
    p.add_argument("--with-scores", action="store_true", help="also emit a synthetic scores.jsonl")
    p.add_argument("--score-noise", type=float, default=0.03)
    p.add_argument("--with-embeddings", action="store_true", help="also emit embeddings.bin")
    p.add_argument("--dim", type=int, default=16)

    p = sub.add_parser("index", help="build and serialize an inverted index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--what", choices=["claims", "premises"], required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("retrieve", help="run the retrieval pipeline for one query")
    p.add_argument("--corpus", required=True)
    p.add_argument("--query-claim", help="id of a claim in the corpus")
    p.add_argument("--query-text", help="raw query claim text (with --query-topic)")
    p.add_argument("--query-topic")
    p.add_argument("--query-id", default="query")
    p.add_argument("--config", help="pipeline config JSON; flags override its fields")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--ranker", choices=list(ranker.RANKER_KINDS))
    p.add_argument("--repr", dest="representation", choices=list(represent.REPRESENTATION_KINDS))
    p.add_argument("--sim", choices=["cos", "l1", "l2", "neg-l1", "neg-l2"])
    p.add_argument("--scores", help="scores.jsonl for the table scorer")
    p.add_argument("--embeddings", help="embedding file (binary or JSON lines)")
    _add_pipeline_flags(p)
    p.add_argument("--out", default="-", help="results.jsonl path, or - for stdout")

    p = sub.add_parser("gen-pairs", help="emit training pairs with mined negatives")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("-L", "--negatives-per-positive", type=int, required=True, dest="l_negatives")
    p.add_argument("--negatives", choices=list(relevance.NEGATIVE_MODES), default="global")
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="score a results file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", default="-", help="report.json path, or - for stdout")

    p = sub.add_parser("sweep", help="leave-one-out hyperparameter sweep")
    p.add_argument("--corpus", required=True)
    p.add_argument("--grid", required=True, help="grid JSON file")
    p.add_argument("--k", type=int, help="restrict the sweep to one k")
    p.add_argument("--scores")
    p.add_argument("--embeddings")
    _add_pipeline_flags(p)
    p.add_argument("--out", default="-", help="report.json path, or - for stdout")
    p.add_argument("--csv", help="also write the config-by-query score matrix")
    return parser


def _add_pipeline_flags(p) -> None:
    """Flags mirroring the remaining pipeline-config fields."""
    p.add_argument("--scorer", choices=["table", "zero-shot"])
    p.add_argument("--m-claims", type=int)
    p.add_argument("--m-premises", type=int)
    p.add_argument("--same-topic-expansion", action="store_true", default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--claim-sample", type=int, help="random claim subset size for claim-sim")
    p.add_argument("--normalize-repr", action="store_true", default=None)
    p.add_argument("--kmeans-representative", choices=["centroid", "relevant"])
    p.add_argument("--bm25-k1", type=float)
    p.add_argument("--bm25-b", type=float)
    p.add_argument("--dfr-c", type=float)


def _parse_triple(text: str, cast):
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated values, got '{text}'")
    try:
        return tuple(cast(x) for x in parts)
    except ValueError:
        raise UsageError(f"could not parse '{text}'") from None


def _cmd_fixture(args) -> int:
    if args.paper_scale:
        scale = fixtures.FixtureScale.paper()
    else:
        kwargs = {}
        mapping = {
            "topics": args.topics,
            "claims_per_topic": args.claims_per_topic,
            "premises_per_claim": args.premises_per_claim,
            "claim_cluster_size": args.claim_cluster_size,
            "queries": args.queries,
            "total_judgments": args.judgments,
            "meaning_group_size": args.group_size,
        }
        kwargs.update({k: v for k, v in mapping.items() if v is not None})
        if args.grade_counts:
            kwargs["grade_counts"] = _parse_triple(args.grade_counts, int)
        if args.grade_fractions:
            kwargs["grade_fractions"] = _parse_triple(args.grade_fractions, float)
        scale = fixtures.FixtureScale(**kwargs)
    try:
        corpus = fixtures.generate_fixture(args.seed, scale)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out)
    write_corpus(corpus, out)
    logger.info(
        "fixture: %d claims, %d premises, %d judgments, %d meaning clusters -> %s",
        len(corpus.claims),
        len(corpus.premises),
        len(corpus.judgments),
        len(corpus.meaning_clusters),
        out,
    )
    if args.with_scores:
        table = fixtures.synth_scores(corpus, seed=args.seed, noise=args.score_noise)
        relevance.write_scores(table, out / "scores.jsonl")
        logger.info("fixture: wrote %d scores to %s", len(table), out / "scores.jsonl")
    if args.with_embeddings:
        store = fixtures.synth_embeddings(corpus, dim=args.dim, seed=args.seed)
        represent.write_embeddings(store, out / "embeddings.bin")
        logger.info("fixture: wrote %d embeddings to %s", len(store), out / "embeddings.bin")
    return 0


def _cmd_index(args) -> int:
    corpus = load_corpus_dir(args.corpus)
    if args.what == "claims":
        idx = index_claims(corpus.claims.values())
    else:
        idx = index_premises(corpus.premises.values())
    write_index(idx, args.out)
    logger.info("indexed %d %s (%d terms) -> %s", idx.doc_count, args.what, len(idx.postings), args.out)
    return 0


def _pipeline_config(args) -> PipelineConfig:
    config = load_pipeline_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    overrides = {}
    for flag, fld in (
        ("scorer", "scorer"),
        ("m_claims", "m_claims"),
        ("m_premises", "m_premises"),
        ("same_topic_expansion", "same_topic_expansion"),
        ("seed", "seed"),
        ("claim_sample", "claim_sample"),
        ("normalize_repr", "normalize_representation"),
        ("kmeans_representative", "kmeans_representative"),
        ("bm25_k1", "bm25_k1"),
        ("bm25_b", "bm25_b"),
        ("dfr_c", "dfr_c"),
        ("scores", "scores_path"),
        ("embeddings", "embeddings_path"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[fld] = value
    if overrides.get("scores_path") or (config.scores_path and "scores_path" not in overrides):
        overrides.setdefault("scorer", "table")
    elif overrides.get("embeddings_path") or config.embeddings_path:
        overrides.setdefault("scorer", "zero-shot")
    rc_overrides = {}
    for flag, fld in (
        ("k", "k"),
        ("alpha", "alpha"),
        ("tau", "tau"),
        ("representation", "representation"),
        ("sim", "similarity"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            rc_overrides[fld] = value
    if getattr(args, "ranker", None) is not None:
        overrides["ranker"] = args.ranker
    try:
        config = replace(config, **overrides)
        if rc_overrides:
            config = replace(config, ranker_config=replace(config.ranker_config, **rc_overrides))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return config


def _open_out(out: str):
    if out == "-":
        return sys.stdout, False
    return open(out, "w", encoding="utf-8"), True


def _cmd_retrieve(args) -> int:
    corpus = load_corpus_dir(args.corpus)
    config = _pipeline_config(args)
    if args.query_claim:
        query: str | Claim = args.query_claim
    elif args.query_text:
        if not args.query_topic:
            raise UsageError("--query-text requires --query-topic")
        query = Claim(id=args.query_id, text=args.query_text, topic=args.query_topic)
    else:
        raise UsageError("one of --query-claim or --query-text is required")
    retriever = Retriever(corpus, config)
    result = retriever.retrieve(query)
    fh, close = _open_out(args.out)
    try:
        ranker.write_results([result], fh)
    finally:
        if close:
            fh.close()
    logger.info("retrieved %d premises for query '%s'", len(result.items), result.query_claim_id)
    return 0


def _cmd_gen_pairs(args) -> int:
    corpus = load_corpus_dir(args.corpus)
    store = represent.load_embeddings(args.embeddings)
    if args.l_negatives < 0:
        raise UsageError("-L must be >= 0")
    pairs = relevance.generate_training_pairs(
        corpus, store, args.l_negatives, negatives=args.negatives
    )
    relevance.write_training_pairs(pairs, args.out)
    positives = sum(1 for p in pairs if p.label == 1)
    logger.info(
        "wrote %d pairs (%d positive, %d negative) -> %s",
        len(pairs),
        positives,
        len(pairs) - positives,
        args.out,
    )
    return 0


def _cmd_evaluate(args) -> int:
    corpus = load_corpus_dir(args.corpus)
    results = ranker.load_results(args.results)
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    report = evaluation.evaluate_run(results, corpus, args.k)
    payload = evaluation.report_to_json([report])
    fh, close = _open_out(args.out)
    try:
        fh.write(payload)
    finally:
        if close:
            fh.close()
    logger.info("mean modified NDCG@%d over %d queries: %.5f", args.k, len(report.per_query), report.mean_ndcg)
    return 0


def _cmd_sweep(args) -> int:
    corpus = load_corpus_dir(args.corpus)
    grid = evaluation.load_grid(args.grid)
    if args.k is not None:
        if args.k < 1:
            raise UsageError("--k must be >= 1")
        grid = replace(grid, ks=(args.k,))
    config = _pipeline_config(args)
    retriever = Retriever(corpus, config)
    try:
        result = evaluation.loo_sweep(corpus, grid, retriever.pipeline_fn())
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    payload = evaluation.report_to_json(list(result.reports))
    fh, close = _open_out(args.out)
    try:
        fh.write(payload)
    finally:
        if close:
            fh.close()
    if args.csv:
        evaluation.write_sweep_csv(result, args.csv)
        logger.info("wrote sweep matrix -> %s", args.csv)
    for report in result.reports:
        logger.info("held-out mean modified NDCG@%d: %.5f", report.k, report.mean_ndcg)
    return 0


_COMMANDS = {
    "fixture": _cmd_fixture,
    "index": _cmd_index,
    "retrieve": _cmd_retrieve,
    "gen-pairs": _cmd_gen_pairs,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
}


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
