"""
Lexical indexing and ranked retrieval
=====================================

Walk through the inverted index: tokenization, index statistics, BM25 and
divergence-from-randomness (InL2) scoring, and top-k search.
"""

from argon import build_index, bm25_score, dfr_score, search_topk, tokenize

# Tokenization lowercases and splits on every non-alphanumeric codepoint.
print(tokenize("We should abandon Nuclear Energy!"))
# -> ['we', 'should', 'abandon', 'nuclear', 'energy']

docs = [
    ("d1", "accidents caused by nuclear energy have longstanding impacts"),
    ("d2", "nuclear energy is a low carbon source of energy"),
    ("d3", "wind and solar are intermittent energy sources"),
    ("d4", "nuclear waste storage remains unsolved"),
    ("d5", "school uniforms reduce bullying"),
]
index = build_index(docs)
print(f"{index.doc_count} documents, average length {index.avg_doc_len:.2f} tokens")
print(f"'energy' appears in {index.doc_freq['energy']} documents")

# Both scorers consume the same statistics.  BM25 uses k1/b term-frequency
# saturation; InL2 normalizes term frequency by document length and weighs
# terms by their rarity in the collection.
query = tokenize("nuclear energy")
for doc_id, _ in docs:
    print(
        f"{doc_id}: bm25={bm25_score(index, query, doc_id):6.3f}  "
        f"inl2={dfr_score(index, query, doc_id):6.3f}"
    )

# search_topk returns matches in descending score order (ties by ascending
# id) and drops zero-score documents, so d5 never shows up.
print(search_topk(index, query, "bm25", 3))
print(search_topk(index, query, "dfr", 3))
