"""Tokenization and an inverted index with BM25 and InL2 scoring.

The index is immutable once built and safe for concurrent queries.  The two
scorers share the same statistics:

* BM25 with parameters ``k1``, ``b`` and idf ``ln((N - df + 0.5)/(df + 0.5) + 1)``
* InL2 from the divergence-from-randomness family:
  ``tfn = tf * log2(1 + c * avglen / len)`` and per-term contribution
  ``qtf * tfn/(tfn + 1) * log2((N + 1)/(df + 0.5))``
"""

from __future__ import annotations

import io
import math
import re
import struct
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorpusFormatError, DuplicateIdError, UnknownDocumentError

DEFAULT_BM25_K1 = 1.2
DEFAULT_BM25_B = 0.75
DEFAULT_DFR_C = 1.0

SCORER_KINDS = ("bm25", "dfr")

# split on every non-alphanumeric codepoint (\W keeps underscores, so add them)
_SPLIT = re.compile(r"[\W_]+", re.UNICODE)

INDEX_MAGIC = b"AIDX"
INDEX_VERSION = 1


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric codepoint."""
    return [t for t in _SPLIT.split(text.lower()) if t]


@dataclass(frozen=True)
class InvertedIndex:
    doc_count: int
    avg_doc_len: float
    doc_lengths: dict[str, int]
    postings: dict[str, list[tuple[str, int]]]
    doc_freq: dict[str, int] = field(default_factory=dict)
    _tf_map: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.doc_freq:
            object.__setattr__(self, "doc_freq", {t: len(p) for t, p in self.postings.items()})
        object.__setattr__(self, "_tf_map", {t: dict(p) for t, p in self.postings.items()})

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.doc_lengths


def build_index(docs: Sequence[tuple[str, str]], tokenizer=tokenize) -> InvertedIndex:
    """Index (id, text) pairs; ids must be unique and the list non-empty.

    ``tokenizer`` is a hook for stemming or stopword handling; queries must
    then be tokenized the same way.
    """
    if len(docs) == 0:
        raise ValueError("cannot build an index over zero documents")
    doc_lengths: dict[str, int] = {}
    term_tf: dict[str, dict[str, int]] = {}
    for doc_id, text in docs:
        if doc_id in doc_lengths:
            raise DuplicateIdError(f"duplicate document id '{doc_id}'")
        tokens = tokenizer(text)
        doc_lengths[doc_id] = len(tokens)
        for term, tf in Counter(tokens).items():
            term_tf.setdefault(term, {})[doc_id] = tf
    postings = {
        term: sorted(by_doc.items()) for term, by_doc in sorted(term_tf.items())
    }
    return InvertedIndex(
        doc_count=len(doc_lengths),
        avg_doc_len=sum(doc_lengths.values()) / len(doc_lengths),
        doc_lengths=doc_lengths,
        postings=postings,
    )


def _check_doc(index: InvertedIndex, doc_id: str) -> None:
    if doc_id not in index.doc_lengths:
        raise UnknownDocumentError(f"document '{doc_id}' is not in the index")


def _tf(index: InvertedIndex, term: str, doc_id: str) -> int:
    return index._tf_map.get(term, {}).get(doc_id, 0)


def bm25_score(
    index: InvertedIndex,
    query_tokens: Sequence[str],
    doc_id: str,
    k1: float = DEFAULT_BM25_K1,
    b: float = DEFAULT_BM25_B,
) -> float:
    """BM25 for one document; query terms absent from the index contribute 0."""
    _check_doc(index, doc_id)
    length = index.doc_lengths[doc_id]
    if index.avg_doc_len == 0.0:
        return 0.0
    score = 0.0
    for term in query_tokens:
        df = index.doc_freq.get(term, 0)
        if df == 0:
            continue
        tf = _tf(index, term, doc_id)
        if tf == 0:
            continue
        idf = math.log((index.doc_count - df + 0.5) / (df + 0.5) + 1.0)
        norm = tf + k1 * (1.0 - b + b * length / index.avg_doc_len)
        score += idf * tf * (k1 + 1.0) / norm
    return score


def dfr_score(
    index: InvertedIndex,
    query_tokens: Sequence[str],
    doc_id: str,
    c: float = DEFAULT_DFR_C,
) -> float:
    """InL2 divergence-from-randomness score for one document.

    Query term multiplicity enters linearly through qtf.
    """
    _check_doc(index, doc_id)
    length = index.doc_lengths[doc_id]
    score = 0.0
    for term, qtf in Counter(query_tokens).items():
        tf = _tf(index, term, doc_id)
        if tf == 0:
            continue
        df = index.doc_freq[term]
        tfn = tf * math.log2(1.0 + c * index.avg_doc_len / length)
        score += qtf * (tfn / (tfn + 1.0)) * math.log2((index.doc_count + 1.0) / (df + 0.5))
    return score


def _scorer(kind: str):
    if kind == "bm25":
        return bm25_score
    if kind == "dfr":
        return dfr_score
    raise ValueError(f"unknown scorer kind '{kind}', expected one of {SCORER_KINDS}")


def search_topk(
    index: InvertedIndex,
    query_tokens: Sequence[str],
    scorer_kind: str,
    m: int,
    **scorer_params,
) -> list[tuple[str, float]]:
    """Top-m documents by score, descending; ties broken by ascending doc id.

    Only documents with a positive score are returned, so fewer than ``m``
    results are possible.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    score_fn = _scorer(scorer_kind)
    candidates: set[str] = set()
    for term in set(query_tokens):
        for doc_id, _ in index.postings.get(term, ()):
            candidates.add(doc_id)
    scored = [(doc_id, score_fn(index, query_tokens, doc_id, **scorer_params)) for doc_id in candidates]
    scored = [(doc_id, s) for doc_id, s in scored if s > 0.0]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:m]


# ---------------------------------------------------------------------------
# on-disk form: little-endian, sorted ids and terms, so rebuilding an index
# from the same documents always serializes to identical bytes


def write_index(index: InvertedIndex, path: str | Path) -> None:
    buf = io.BytesIO()
    buf.write(INDEX_MAGIC)
    buf.write(struct.pack("<I", INDEX_VERSION))
    doc_ids = sorted(index.doc_lengths)
    doc_pos = {doc_id: i for i, doc_id in enumerate(doc_ids)}
    buf.write(struct.pack("<I", len(doc_ids)))
    for doc_id in doc_ids:
        raw = doc_id.encode("utf-8")
        buf.write(struct.pack("<I", len(raw)))
        buf.write(raw)
        buf.write(struct.pack("<I", index.doc_lengths[doc_id]))
    terms = sorted(index.postings)
    buf.write(struct.pack("<I", len(terms)))
    for term in terms:
        raw = term.encode("utf-8")
        buf.write(struct.pack("<I", len(raw)))
        buf.write(raw)
        plist = sorted(index.postings[term])
        buf.write(struct.pack("<I", len(plist)))
        for doc_id, tf in plist:
            buf.write(struct.pack("<II", doc_pos[doc_id], tf))
    Path(path).write_bytes(buf.getvalue())


def read_index(path: str | Path) -> InvertedIndex:
    data = Path(path).read_bytes()
    view = io.BytesIO(data)
    if view.read(4) != INDEX_MAGIC:
        raise CorpusFormatError(f"{path}: not an index file")
    (version,) = struct.unpack("<I", view.read(4))
    if version != INDEX_VERSION:
        raise CorpusFormatError(f"{path}: unsupported index version {version}")

    def read_u32() -> int:
        return struct.unpack("<I", view.read(4))[0]

    def read_str() -> str:
        return view.read(read_u32()).decode("utf-8")

    doc_ids: list[str] = []
    doc_lengths: dict[str, int] = {}
    for _ in range(read_u32()):
        doc_id = read_str()
        doc_ids.append(doc_id)
        doc_lengths[doc_id] = read_u32()
    postings: dict[str, list[tuple[str, int]]] = {}
    for _ in range(read_u32()):
        term = read_str()
        plist = []
        for _ in range(read_u32()):
            pos, tf = struct.unpack("<II", view.read(8))
            plist.append((doc_ids[pos], tf))
        postings[term] = plist
    if not doc_lengths:
        raise CorpusFormatError(f"{path}: index holds no documents")
    return InvertedIndex(
        doc_count=len(doc_lengths),
        avg_doc_len=sum(doc_lengths.values()) / len(doc_lengths),
        doc_lengths=doc_lengths,
        postings=postings,
    )


def index_claims(claims: Iterable, tokenizer=tokenize) -> InvertedIndex:
    """Convenience: index Claim records by id and text."""
    return build_index([(c.id, c.text) for c in claims], tokenizer=tokenizer)


def index_premises(premises: Iterable, tokenizer=tokenize) -> InvertedIndex:
    """Convenience: index Premise records by id and text."""
    return build_index([(p.id, p.text) for p in premises], tokenizer=tokenizer)
