"""Data model: claims, premises, assignments, judgments, meaning clusters.

Corpora are interchanged as JSON-lines files (one record per line):

* ``claims.jsonl``            ``{"id", "text", "topic", "cluster_id"?}``
* ``premises.jsonl``          ``{"id", "text", "topic"}``
* ``assignments.jsonl``       ``{"claim_id", "premise_id"}``
* ``judgments.jsonl``         ``{"query_claim_id", "result_claim_id", "premise_id", "grade"}``
* ``meaning_clusters.jsonl``  ``{"query_claim_id", "label", "premise_ids": [...]}``

A loaded :class:`Corpus` is immutable and safe for concurrent reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import CorpusFormatError, DanglingIdError, DuplicateIdError

GRADE_VERY_RELEVANT = 2
GRADE_RELEVANT = 1
GRADE_NOT_RELEVANT = 0
VALID_GRADES = (0, 1, 2)

CORPUS_FILES = {
    "claims": "claims.jsonl",
    "premises": "premises.jsonl",
    "assignments": "assignments.jsonl",
    "judgments": "judgments.jsonl",
    "meaning_clusters": "meaning_clusters.jsonl",
}


@dataclass(frozen=True)
class Claim:
    id: str
    text: str
    topic: str
    cluster_id: str | None = None


@dataclass(frozen=True)
class Premise:
    id: str
    text: str
    topic: str


@dataclass(frozen=True)
class Assignment:
    claim_id: str
    premise_id: str


@dataclass(frozen=True)
class Judgment:
    query_claim_id: str
    result_claim_id: str
    premise_id: str
    grade: int


@dataclass(frozen=True)
class MeaningCluster:
    query_claim_id: str
    label: str
    premise_ids: tuple[str, ...]


@dataclass(frozen=True)
class Corpus:
    """Validated, immutable view of one dataset."""

    claims: Mapping[str, Claim]
    premises: Mapping[str, Premise]
    assignments: tuple[Assignment, ...] = ()
    judgments: tuple[Judgment, ...] = ()
    meaning_clusters: tuple[MeaningCluster, ...] = ()

    # derived lookup tables, filled in __post_init__
    _premises_by_claim: dict = field(default_factory=dict, repr=False, compare=False)
    _claims_by_cluster: dict = field(default_factory=dict, repr=False, compare=False)
    _claims_by_topic: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        by_claim: dict[str, list[str]] = {}
        for a in self.assignments:
            by_claim.setdefault(a.claim_id, []).append(a.premise_id)
        by_cluster: dict[str, list[str]] = {}
        by_topic: dict[str, list[str]] = {}
        for c in self.claims.values():
            if c.cluster_id is not None:
                by_cluster.setdefault(c.cluster_id, []).append(c.id)
            by_topic.setdefault(c.topic, []).append(c.id)
        object.__setattr__(self, "_premises_by_claim", by_claim)
        object.__setattr__(self, "_claims_by_cluster", by_cluster)
        object.__setattr__(self, "_claims_by_topic", by_topic)

    def premises_for_claim(self, claim_id: str) -> list[str]:
        return list(self._premises_by_claim.get(claim_id, ()))

    def claims_in_cluster(self, cluster_id: str) -> list[str]:
        return list(self._claims_by_cluster.get(cluster_id, ()))

    def claims_by_topic(self, topic: str) -> list[str]:
        """Claim ids of one topic, ascending id order."""
        return sorted(self._claims_by_topic.get(topic, ()))

    def query_claim_ids(self) -> list[str]:
        """Distinct query claims appearing in judgments, ascending id order."""
        return sorted({j.query_claim_id for j in self.judgments})

    def grades_for_query(self, query_claim_id: str) -> dict[str, int]:
        """premise id -> grade for one query (max grade when judged repeatedly)."""
        grades: dict[str, int] = {}
        for j in self.judgments:
            if j.query_claim_id == query_claim_id:
                prev = grades.get(j.premise_id)
                if prev is None or j.grade > prev:
                    grades[j.premise_id] = j.grade
        return grades

    def cluster_labels_for_query(self, query_claim_id: str) -> dict[str, str]:
        """premise id -> meaning-cluster label for one query."""
        labels: dict[str, str] = {}
        for mc in self.meaning_clusters:
            if mc.query_claim_id == query_claim_id:
                for pid in mc.premise_ids:
                    labels[pid] = mc.label
        return labels


# ---------------------------------------------------------------------------
# loading


def _iter_records(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, record


def _require(record: dict, key: str, path: Path, lineno: int):
    if key not in record:
        raise CorpusFormatError(f"{path}:{lineno}: missing required field '{key}'")
    return record[key]


def _require_text(record: dict, key: str, path: Path, lineno: int) -> str:
    value = _require(record, key, path, lineno)
    if not isinstance(value, str) or not value:
        raise CorpusFormatError(f"{path}:{lineno}: field '{key}' must be a non-empty string")
    return value


def load_corpus(
    claims_path: str | Path,
    premises_path: str | Path,
    assignments_path: str | Path | None = None,
    judgments_path: str | Path | None = None,
    meaning_clusters_path: str | Path | None = None,
    default_topic: str | None = None,
) -> Corpus:
    """Load and validate a corpus from JSON-lines files.

    ``default_topic`` is substituted for records that lack a ``topic`` field;
    without it a missing topic is a schema violation.  Raises
    :class:`CorpusFormatError`, :class:`DuplicateIdError` or
    :class:`DanglingIdError` on inconsistent inputs.
    """
    claims_path = Path(claims_path)
    premises_path = Path(premises_path)

    def topic_of(record, path, lineno):
        if "topic" not in record and default_topic is not None:
            return default_topic
        return _require_text(record, "topic", path, lineno)

    claims: dict[str, Claim] = {}
    for lineno, rec in _iter_records(claims_path):
        cid = _require_text(rec, "id", claims_path, lineno)
        if cid in claims:
            raise DuplicateIdError(f"{claims_path}:{lineno}: duplicate claim id '{cid}'")
        cluster = rec.get("cluster_id")
        if cluster is not None and (not isinstance(cluster, str) or not cluster):
            raise CorpusFormatError(
                f"{claims_path}:{lineno}: field 'cluster_id' must be a non-empty string or null"
            )
        claims[cid] = Claim(
            id=cid,
            text=_require_text(rec, "text", claims_path, lineno),
            topic=topic_of(rec, claims_path, lineno),
            cluster_id=cluster,
        )

    premises: dict[str, Premise] = {}
    for lineno, rec in _iter_records(premises_path):
        pid = _require_text(rec, "id", premises_path, lineno)
        if pid in premises:
            raise DuplicateIdError(f"{premises_path}:{lineno}: duplicate premise id '{pid}'")
        premises[pid] = Premise(
            id=pid,
            text=_require_text(rec, "text", premises_path, lineno),
            topic=topic_of(rec, premises_path, lineno),
        )

    assignments: list[Assignment] = []
    if assignments_path is not None:
        assignments_path = Path(assignments_path)
        for lineno, rec in _iter_records(assignments_path):
            a = Assignment(
                claim_id=_require_text(rec, "claim_id", assignments_path, lineno),
                premise_id=_require_text(rec, "premise_id", assignments_path, lineno),
            )
            if a.claim_id not in claims:
                raise DanglingIdError(
                    f"{assignments_path}:{lineno}: assignment references unknown claim '{a.claim_id}'"
                )
            if a.premise_id not in premises:
                raise DanglingIdError(
                    f"{assignments_path}:{lineno}: assignment references unknown premise '{a.premise_id}'"
                )
            assignments.append(a)

    judgments: list[Judgment] = []
    if judgments_path is not None:
        judgments_path = Path(judgments_path)
        for lineno, rec in _iter_records(judgments_path):
            grade = _require(rec, "grade", judgments_path, lineno)
            if not isinstance(grade, int) or grade not in VALID_GRADES:
                raise CorpusFormatError(
                    f"{judgments_path}:{lineno}: grade must be an integer in {{0, 1, 2}}"
                )
            j = Judgment(
                query_claim_id=_require_text(rec, "query_claim_id", judgments_path, lineno),
                result_claim_id=_require_text(rec, "result_claim_id", judgments_path, lineno),
                premise_id=_require_text(rec, "premise_id", judgments_path, lineno),
                grade=grade,
            )
            if j.query_claim_id not in claims:
                raise DanglingIdError(
                    f"{judgments_path}:{lineno}: judgment references unknown query claim "
                    f"'{j.query_claim_id}'"
                )
            # grade-0 judgments may carry a result claim that is not in the
            # database; for graded-relevant rows the reference must resolve.
            if j.grade > 0 and j.result_claim_id not in claims:
                raise DanglingIdError(
                    f"{judgments_path}:{lineno}: judgment references unknown result claim "
                    f"'{j.result_claim_id}'"
                )
            if j.premise_id not in premises:
                raise DanglingIdError(
                    f"{judgments_path}:{lineno}: judgment references unknown premise "
                    f"'{j.premise_id}'"
                )
            judgments.append(j)

    clusters: list[MeaningCluster] = []
    if meaning_clusters_path is not None:
        meaning_clusters_path = Path(meaning_clusters_path)
        for lineno, rec in _iter_records(meaning_clusters_path):
            pids = _require(rec, "premise_ids", meaning_clusters_path, lineno)
            if not isinstance(pids, list) or not pids:
                raise CorpusFormatError(
                    f"{meaning_clusters_path}:{lineno}: 'premise_ids' must be a non-empty list"
                )
            mc = MeaningCluster(
                query_claim_id=_require_text(rec, "query_claim_id", meaning_clusters_path, lineno),
                label=_require_text(rec, "label", meaning_clusters_path, lineno),
                premise_ids=tuple(pids),
            )
            if mc.query_claim_id not in claims:
                raise DanglingIdError(
                    f"{meaning_clusters_path}:{lineno}: meaning cluster references unknown "
                    f"query claim '{mc.query_claim_id}'"
                )
            for pid in mc.premise_ids:
                if pid not in premises:
                    raise DanglingIdError(
                        f"{meaning_clusters_path}:{lineno}: meaning cluster references unknown "
                        f"premise '{pid}'"
                    )
            clusters.append(mc)

    corpus = Corpus(
        claims=claims,
        premises=premises,
        assignments=tuple(assignments),
        judgments=tuple(judgments),
        meaning_clusters=tuple(clusters),
    )
    _validate_clusters(corpus)
    return corpus


def load_corpus_dir(directory: str | Path, default_topic: str | None = None) -> Corpus:
    """Load a corpus from a directory using the conventional file names.

    ``claims.jsonl`` and ``premises.jsonl`` are required; the other files are
    optional and default to empty.
    """
    directory = Path(directory)

    def optional(name: str) -> Path | None:
        p = directory / CORPUS_FILES[name]
        return p if p.exists() else None

    for required in ("claims", "premises"):
        if not (directory / CORPUS_FILES[required]).exists():
            raise CorpusFormatError(f"{directory / CORPUS_FILES[required]}: file not found")
    return load_corpus(
        claims_path=directory / CORPUS_FILES["claims"],
        premises_path=directory / CORPUS_FILES["premises"],
        assignments_path=optional("assignments"),
        judgments_path=optional("judgments"),
        meaning_clusters_path=optional("meaning_clusters"),
        default_topic=default_topic,
    )


def _validate_clusters(corpus: Corpus) -> None:
    """A premise sits in at most one cluster per query, and is judged grade>=1."""
    grades_cache: dict[str, dict[str, int]] = {}
    seen: dict[tuple[str, str], str] = {}
    for mc in corpus.meaning_clusters:
        grades = grades_cache.setdefault(mc.query_claim_id, corpus.grades_for_query(mc.query_claim_id))
        for pid in mc.premise_ids:
            key = (mc.query_claim_id, pid)
            if key in seen and seen[key] != mc.label:
                raise CorpusFormatError(
                    f"premise '{pid}' appears in two meaning clusters "
                    f"('{seen[key]}', '{mc.label}') for query '{mc.query_claim_id}'"
                )
            seen[key] = mc.label
            if grades.get(pid, 0) < 1:
                raise CorpusFormatError(
                    f"premise '{pid}' in meaning cluster '{mc.label}' has no grade >= 1 "
                    f"judgment for query '{mc.query_claim_id}'"
                )


# ---------------------------------------------------------------------------
# writing


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_corpus(corpus: Corpus, directory: str | Path) -> None:
    """Write all corpus files to ``directory`` in a canonical order.

    Records are sorted by their natural keys, so equal corpora produce
    byte-identical files.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    def write(name: str, lines: Iterable[str]) -> None:
        with open(directory / CORPUS_FILES[name], "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")

    write(
        "claims",
        (
            _dump({"id": c.id, "text": c.text, "topic": c.topic, "cluster_id": c.cluster_id})
            for c in sorted(corpus.claims.values(), key=lambda c: c.id)
        ),
    )
    write(
        "premises",
        (
            _dump({"id": p.id, "text": p.text, "topic": p.topic})
            for p in sorted(corpus.premises.values(), key=lambda p: p.id)
        ),
    )
    write(
        "assignments",
        (
            _dump({"claim_id": a.claim_id, "premise_id": a.premise_id})
            for a in sorted(corpus.assignments, key=lambda a: (a.claim_id, a.premise_id))
        ),
    )
    write(
        "judgments",
        (
            _dump(
                {
                    "query_claim_id": j.query_claim_id,
                    "result_claim_id": j.result_claim_id,
                    "premise_id": j.premise_id,
                    "grade": j.grade,
                }
            )
            for j in sorted(
                corpus.judgments,
                key=lambda j: (j.query_claim_id, j.result_claim_id, j.premise_id),
            )
        ),
    )
    write(
        "meaning_clusters",
        (
            _dump(
                {
                    "query_claim_id": mc.query_claim_id,
                    "label": mc.label,
                    "premise_ids": list(mc.premise_ids),
                }
            )
            for mc in sorted(corpus.meaning_clusters, key=lambda mc: (mc.query_claim_id, mc.label))
        ),
    )


def semantically_equal(a: Corpus, b: Corpus) -> bool:
    """Order-insensitive record equality of two corpora."""
    return (
        a.claims == b.claims
        and a.premises == b.premises
        and sorted(a.assignments, key=lambda x: (x.claim_id, x.premise_id))
        == sorted(b.assignments, key=lambda x: (x.claim_id, x.premise_id))
        and sorted(a.judgments, key=lambda x: (x.query_claim_id, x.result_claim_id, x.premise_id))
        == sorted(b.judgments, key=lambda x: (x.query_claim_id, x.result_claim_id, x.premise_id))
        and sorted(a.meaning_clusters, key=lambda x: (x.query_claim_id, x.label))
        == sorted(b.meaning_clusters, key=lambda x: (x.query_claim_id, x.label))
    )
