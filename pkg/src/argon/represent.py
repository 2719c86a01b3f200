"""Premise representations and the similarity functions computed on them.

Two representation kinds are supported:

* ``bert``       dense encoder vectors read from an :class:`EmbeddingStore`
* ``claim-sim``  a premise's vector of relevance scores against the claims of
                 its topic, stacked in ascending claim-id order

Every similarity kind follows a "larger is more similar" contract: ``cos``
returns the cosine, ``neg-l1``/``neg-l2`` return negated Manhattan/Euclidean
distances.
"""

from __future__ import annotations

import io
import json
import random
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Claim, Corpus, Premise
from .errors import CorpusFormatError, DuplicateIdError, MissingEmbeddingError

SIMILARITY_KINDS = ("cos", "neg-l1", "neg-l2")
REPRESENTATION_KINDS = ("bert", "claim-sim")

EMBEDDING_MAGIC = b"EMBV"
EMBEDDING_VERSION = 1


def normalize_similarity_kind(kind: str) -> str:
    """Accept the short CLI spellings l1/l2 as aliases."""
    aliases = {"l1": "neg-l1", "l2": "neg-l2"}
    kind = aliases.get(kind, kind)
    if kind not in SIMILARITY_KINDS:
        raise ValueError(f"unknown similarity kind '{kind}', expected one of {SIMILARITY_KINDS}")
    return kind


class EmbeddingStore:
    """id -> dense vector, all of one dimension, finite entries only."""

    def __init__(self, dim: int, vectors: Mapping[str, np.ndarray] | Mapping[str, Sequence[float]]):
        if dim < 1:
            raise ValueError("embedding dimension must be >= 1")
        self.dim = int(dim)
        self.vectors: dict[str, np.ndarray] = {}
        for key, value in vectors.items():
            arr = np.asarray(value, dtype=np.float64)
            if arr.shape != (self.dim,):
                raise ValueError(
                    f"embedding for '{key}' has shape {arr.shape}, expected ({self.dim},)"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"embedding for '{key}' contains non-finite values")
            self.vectors[key] = arr

    def __contains__(self, key: str) -> bool:
        return key in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def __getitem__(self, key: str) -> np.ndarray:
        try:
            return self.vectors[key]
        except KeyError:
            raise MissingEmbeddingError(f"no embedding for id '{key}'") from None

    def ids(self) -> list[str]:
        return sorted(self.vectors)


def write_embeddings(store: EmbeddingStore, path: str | Path, fmt: str = "binary") -> None:
    """Serialize a store; ``fmt`` is ``binary`` (default) or ``jsonl``.

    Binary layout, little-endian: magic ``EMBV``, u32 version, u32 dim,
    u32 count, then per record u32 id length, UTF-8 id bytes, dim float32.
    Records are sorted by id.
    """
    path = Path(path)
    if fmt == "binary":
        buf = io.BytesIO()
        buf.write(EMBEDDING_MAGIC)
        buf.write(struct.pack("<III", EMBEDDING_VERSION, store.dim, len(store.vectors)))
        for key in store.ids():
            raw = key.encode("utf-8")
            buf.write(struct.pack("<I", len(raw)))
            buf.write(raw)
            buf.write(store.vectors[key].astype("<f4").tobytes())
        path.write_bytes(buf.getvalue())
    elif fmt == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for key in store.ids():
                rec = {"id": key, "vector": [float(x) for x in store.vectors[key]]}
                fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
    else:
        raise ValueError(f"unknown embedding format '{fmt}'")


def load_embeddings(path: str | Path) -> EmbeddingStore:
    """Load a store, sniffing binary vs JSON-lines by the file magic."""
    path = Path(path)
    head = path.open("rb").read(4)
    if head == EMBEDDING_MAGIC:
        return _load_binary(path)
    return _load_jsonl(path)


def _load_binary(path: Path) -> EmbeddingStore:
    data = path.read_bytes()
    if len(data) < 16:
        raise CorpusFormatError(f"{path}: truncated embedding file")
    version, dim, count = struct.unpack_from("<III", data, 4)
    if version != EMBEDDING_VERSION:
        raise CorpusFormatError(f"{path}: unsupported embedding file version {version}")
    offset = 16
    vectors: dict[str, np.ndarray] = {}
    for _ in range(count):
        if offset + 4 > len(data):
            raise CorpusFormatError(f"{path}: truncated embedding record")
        (id_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        key = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        end = offset + 4 * dim
        if end > len(data):
            raise CorpusFormatError(f"{path}: truncated vector for id '{key}'")
        vec = np.frombuffer(data[offset:end], dtype="<f4").astype(np.float64)
        offset = end
        if key in vectors:
            raise DuplicateIdError(f"{path}: duplicate embedding id '{key}'")
        vectors[key] = vec
    try:
        return EmbeddingStore(dim=dim, vectors=vectors)
    except ValueError as exc:
        raise CorpusFormatError(f"{path}: {exc}") from exc


def _load_jsonl(path: Path) -> EmbeddingStore:
    vectors: dict[str, list[float]] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            if "id" not in rec or "vector" not in rec:
                raise CorpusFormatError(f"{path}:{lineno}: expected fields 'id' and 'vector'")
            key, vec = rec["id"], rec["vector"]
            if key in vectors:
                raise DuplicateIdError(f"{path}:{lineno}: duplicate embedding id '{key}'")
            if dim is None:
                dim = len(vec)
            vectors[key] = vec
    if dim is None:
        raise CorpusFormatError(f"{path}: no embedding records found")
    try:
        return EmbeddingStore(dim=dim, vectors=vectors)
    except ValueError as exc:
        raise CorpusFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# similarities


def similarity(u: np.ndarray, v: np.ndarray, kind: str = "cos") -> float:
    """Pairwise similarity; larger means more similar for every kind."""
    kind = normalize_similarity_kind(kind)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if kind == "cos":
        nu = float(np.linalg.norm(u))
        nv = float(np.linalg.norm(v))
        if nu == 0.0 or nv == 0.0:
            raise ValueError("cosine similarity is undefined for a zero vector")
        return float(np.dot(u, v)) / (nu * nv)
    if kind == "neg-l1":
        return -float(np.sum(np.abs(u - v)))
    return -float(np.linalg.norm(u - v))


def claim_sim_vector(
    premise: Premise | str,
    topic_claims: Sequence[Claim | str],
    source,
) -> np.ndarray:
    """Stack relevance scores of one premise against an ordered claim list."""
    if len(topic_claims) == 0:
        raise ValueError("claim-sim representation needs at least one claim")
    pid = premise.id if isinstance(premise, Premise) else premise
    claim_ids = [c.id if isinstance(c, Claim) else c for c in topic_claims]
    return np.array([source.score(cid, pid) for cid in claim_ids], dtype=np.float64)


@dataclass
class Representation:
    """Premise vectors of one kind, with topics kept for comparability checks."""

    kind: str
    vectors: dict[str, np.ndarray]
    topics: dict[str, str]

    def vector(self, premise_id: str) -> np.ndarray:
        try:
            return self.vectors[premise_id]
        except KeyError:
            raise MissingEmbeddingError(
                f"no {self.kind} representation for premise '{premise_id}'"
            ) from None

    def check_comparable(self, a: str, b: str) -> None:
        if self.kind == "claim-sim" and self.topics.get(a) != self.topics.get(b):
            raise ValueError(
                f"premises '{a}' and '{b}' belong to different topics; their stacked-score "
                "vectors are not comparable"
            )
        if self.vector(a).shape != self.vector(b).shape:
            raise ValueError(f"representation dimension mismatch between '{a}' and '{b}'")

    def sim(self, a: str, b: str, kind: str = "cos") -> float:
        self.check_comparable(a, b)
        return similarity(self.vector(a), self.vector(b), kind)

    def pairwise_matrix(self, ids: Sequence[str], kind: str = "cos") -> np.ndarray:
        """Full psim matrix over ``ids``; validates that all ids are comparable."""
        kind = normalize_similarity_kind(kind)
        for other in ids[1:]:
            self.check_comparable(ids[0], other)
        mat = np.stack([self.vector(i) for i in ids])
        if kind == "cos":
            norms = np.linalg.norm(mat, axis=1)
            if np.any(norms == 0.0):
                zero = ids[int(np.argmin(norms))]
                raise ValueError(f"cosine similarity is undefined for zero vector of '{zero}'")
            unit = mat / norms[:, None]
            return unit @ unit.T
        if kind == "neg-l1":
            return -np.sum(np.abs(mat[:, None, :] - mat[None, :, :]), axis=-1)
        diff = mat[:, None, :] - mat[None, :, :]
        return -np.sqrt(np.sum(diff * diff, axis=-1))


def build_representation(
    premises: Iterable[Premise | str],
    kind: str,
    embeddings: EmbeddingStore | None = None,
    corpus: Corpus | None = None,
    source=None,
    normalize: bool = False,
    claim_sample: int | None = None,
    seed: int = 0,
) -> Representation:
    """Build vectors of the requested kind for the given premises.

    ``bert`` copies vectors from ``embeddings``.  ``claim-sim`` stacks
    relevance scores against every claim of the premise's topic (ascending
    claim id); ``claim_sample`` caps that to a seeded random subset per topic.
    """
    if kind not in REPRESENTATION_KINDS:
        raise ValueError(f"unknown representation kind '{kind}', expected one of {REPRESENTATION_KINDS}")

    def as_premise(p) -> Premise:
        if isinstance(p, Premise):
            return p
        if corpus is None:
            raise ValueError("premise ids require a corpus to resolve")
        return corpus.premises[p]

    resolved = [as_premise(p) for p in premises]
    vectors: dict[str, np.ndarray] = {}
    topics: dict[str, str] = {}

    if kind == "bert":
        if embeddings is None:
            raise ValueError("bert representation requires an embedding store")
        for p in resolved:
            vectors[p.id] = embeddings[p.id].copy()
            topics[p.id] = p.topic
    else:
        if corpus is None or source is None:
            raise ValueError("claim-sim representation requires a corpus and a relevance source")
        claims_for_topic: dict[str, list[str]] = {}
        for p in resolved:
            if p.topic not in claims_for_topic:
                claim_ids = corpus.claims_by_topic(p.topic)
                if not claim_ids:
                    raise ValueError(f"topic '{p.topic}' has no claims to stack scores against")
                if claim_sample is not None and claim_sample < len(claim_ids):
                    rng = random.Random(f"{seed}:{p.topic}")
                    claim_ids = sorted(rng.sample(claim_ids, claim_sample))
                claims_for_topic[p.topic] = claim_ids
            vectors[p.id] = claim_sim_vector(p, claims_for_topic[p.topic], source)
            topics[p.id] = p.topic

    if normalize:
        for pid, vec in vectors.items():
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise ValueError(f"cannot normalize zero vector for premise '{pid}'")
            vectors[pid] = vec / norm
    return Representation(kind=kind, vectors=vectors, topics=topics)
