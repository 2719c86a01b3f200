import json

import pytest

from argon.corpus import Assignment, Claim, Corpus, Judgment, MeaningCluster, Premise


def make_corpus(claims, premises, assignments=(), judgments=(), clusters=()):
    """Build a Corpus from plain tuples.

    claims: (id, text, topic, cluster_id or None)
    premises: (id, text, topic)
    assignments: (claim_id, premise_id)
    judgments: (query_claim_id, result_claim_id, premise_id, grade)
    clusters: (query_claim_id, label, [premise_ids])
    """
    return Corpus(
        claims={c[0]: Claim(id=c[0], text=c[1], topic=c[2], cluster_id=c[3]) for c in claims},
        premises={p[0]: Premise(id=p[0], text=p[1], topic=p[2]) for p in premises},
        assignments=tuple(Assignment(claim_id=a[0], premise_id=a[1]) for a in assignments),
        judgments=tuple(
            Judgment(query_claim_id=j[0], result_claim_id=j[1], premise_id=j[2], grade=j[3])
            for j in judgments
        ),
        meaning_clusters=tuple(
            MeaningCluster(query_claim_id=m[0], label=m[1], premise_ids=tuple(m[2]))
            for m in clusters
        ),
    )


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


@pytest.fixture
def trace_corpus():
    """Small corpus with hand-traceable prefilter behavior.

    One topic; claims c1/c2 share cluster g1, c3 sits in g2, c4 is
    unclustered.  Premises p7/p8 are unassigned.
    """
    return make_corpus(
        claims=[
            ("c1", "alpha beta", "t", "g1"),
            ("c2", "alpha gamma", "t", "g1"),
            ("c3", "delta beta", "t", "g2"),
            ("c4", "epsilon zeta", "t", None),
        ],
        premises=[
            ("p1", "alpha one", "t"),
            ("p2", "beta two", "t"),
            ("p3", "gamma three", "t"),
            ("p4", "delta four", "t"),
            ("p5", "beta five", "t"),
            ("p6", "epsilon six", "t"),
            ("p7", "alpha seven", "t"),
            ("p8", "two three", "t"),
        ],
        assignments=[
            ("c1", "p1"),
            ("c1", "p2"),
            ("c2", "p3"),
            ("c3", "p4"),
            ("c3", "p5"),
            ("c4", "p6"),
        ],
    )
