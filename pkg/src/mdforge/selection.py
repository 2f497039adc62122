"""Candidate ranking, document-minimizing selection, and target ordering.

Inside each topic cluster, the candidate pool (the members closest to the
centroid, capped for NLI cost) is ranked twice — by centroid distance and
by mean positive-entailment against the rest of the pool — and the two
rankings are fused with an unweighted Borda count. One candidate per
topic is then chosen so the chosen set touches as few distinct source
documents as possible, and the chosen sentences are ordered by a priority
topological sort that never reorders sentences of the same document.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .clustering import TopicCluster
from .corpus import Sentence

__all__ = [
    "RankedCandidate",
    "TargetSelection",
    "fuse_borda",
    "rank_candidates",
    "select_cover",
    "avg_topic_position",
    "order_targets",
    "EXACT_COVER_LIMIT",
]

# exhaustive enumeration bound; the defaults (8 topics x 2 candidates)
# give 256 combinations, far below it
EXACT_COVER_LIMIT = 4096

# Ranking scores are compared at this resolution. Mathematically tied
# values (a 2-member pool is always equidistant from its centroid) must
# fall to the documented tie-breaks on every platform, not to last-ulp
# noise that varies with the summation path.
SCORE_DECIMALS = 12


@dataclass(frozen=True)
class RankedCandidate:
    index: int  # flat sentence index within the cluster
    sentence: Sentence
    centrality_rank: int
    entailment_rank: int
    borda_score: int


@dataclass(frozen=True)
class TargetSelection:
    """One chosen candidate per topic, in topic order."""

    chosen: tuple[tuple[int, RankedCandidate], ...]
    source_doc_count: int
    method: str  # "exact" or "greedy"
    combinations: int | None  # enumeration size when exact


def fuse_borda(
    distances: Sequence[float],
    entail_scores: Sequence[float],
    tie_keys: Sequence[int],
) -> list[tuple[int, int, int, int]]:
    """Fuse a distance ranking and an entailment ranking by Borda count.

    tie_keys carry document order (smaller wins every tie). Returns
    (pool_index, centrality_rank, entailment_rank, borda_score) tuples in
    final output order: borda descending, then centrality rank, then
    document order. Only ranks enter the score, so any strictly monotone
    transform of either input leaves the output unchanged.
    """
    m = len(distances)
    if not (m == len(entail_scores) == len(tie_keys)):
        raise ValueError("inputs must have equal length")
    by_centrality = sorted(range(m), key=lambda i: (distances[i], tie_keys[i]))
    crank = [0] * m
    for pos, i in enumerate(by_centrality):
        crank[i] = pos
    by_entailment = sorted(
        range(m), key=lambda i: (-entail_scores[i], crank[i], tie_keys[i])
    )
    erank = [0] * m
    for pos, i in enumerate(by_entailment):
        erank[i] = pos
    borda = [(m - 1 - crank[i]) + (m - 1 - erank[i]) for i in range(m)]
    final = sorted(range(m), key=lambda i: (-borda[i], crank[i], tie_keys[i]))
    return [(i, crank[i], erank[i], borda[i]) for i in final]


def rank_candidates(
    cluster: TopicCluster,
    embeddings: np.ndarray,
    sentences: Sequence[Sentence],
    provider,
    nli_cap: int = 5,
    direction: str = "supported",
) -> list[RankedCandidate]:
    """Rank a cluster's most central members by fused Borda score.

    The pool is the min(nli_cap, size) members closest to the centroid.
    Entailment scores average the positive-entailment probability of
    (premise=other pool member, hypothesis=candidate) pairs; direction
    "both" averages the two orientations of each pair.
    """
    if cluster.size < 2:
        raise ValueError("rank_candidates requires a cluster of size >= 2")
    if nli_cap < 2:
        raise ValueError("nli_cap must be >= 2")
    if direction not in ("supported", "both"):
        raise ValueError(f"unknown entailment direction: {direction!r}")

    members = np.asarray(cluster.members, dtype=np.int64)
    # elementwise multiply + reduce instead of a BLAS matvec: the reduce
    # order is fixed by numpy, so quantized distances are machine-stable
    dists = np.round(
        1.0 - np.sum(embeddings[members] * cluster.centroid, axis=1), SCORE_DECIMALS
    )
    pool_order = sorted(range(len(members)), key=lambda i: (dists[i], members[i]))
    pool_order = pool_order[: min(nli_cap, len(members))]
    pool = [int(members[i]) for i in pool_order]
    pool_dists = [float(dists[i]) for i in pool_order]

    # every ordered pair is needed: each pool member is both a candidate
    # and a comparison premise for the others
    pairs = [
        (sentences[y].text, sentences[x].text) for x in pool for y in pool if y != x
    ]
    probs = provider.entail_batch(pairs)
    m = len(pool)
    forward = np.asarray(probs, dtype=np.float64).reshape(m, m - 1)
    scores = forward.mean(axis=1)
    if direction == "both":
        scores = _bidirectional_scores(pool, probs)
    scores = np.round(scores, SCORE_DECIMALS)

    fused = fuse_borda(pool_dists, scores.tolist(), pool)
    return [
        RankedCandidate(pool[i], sentences[pool[i]], cr, er, score)
        for i, cr, er, score in fused
    ]


def _bidirectional_scores(pool: list[int], probs) -> np.ndarray:
    by_pair = {}
    pos = 0
    for x in pool:
        for y in pool:
            if y != x:
                by_pair[(y, x)] = probs[pos]
                pos += 1
    return np.array(
        [
            np.mean([(by_pair[(y, x)] + by_pair[(x, y)]) / 2.0 for y in pool if y != x])
            for x in pool
        ]
    )


def _combo_key(combo: Sequence[tuple[int, RankedCandidate]]):
    docs = {cand.sentence.doc_index for _, cand in combo}
    rank_sum = sum(rank for rank, _ in combo)
    lex = tuple((c.sentence.doc_index, c.sentence.sent_index) for _, c in combo)
    return (len(docs), rank_sum, lex)


def select_cover(
    pools: Sequence[Sequence[RankedCandidate]],
    exact_limit: int = EXACT_COVER_LIMIT,
) -> TargetSelection:
    """Choose one candidate per topic touching the fewest distinct documents.

    Exhaustive (optimal) when the combination count fits exact_limit,
    greedy document cover otherwise. Ties break on the lower total sum of
    within-pool borda ranks, then lexicographically by (doc, sent) per
    topic, so the result is deterministic.
    """
    if not pools or any(len(p) == 0 for p in pools):
        raise ValueError("every topic pool must be non-empty")
    combos = 1
    for p in pools:
        combos *= len(p)
    if combos <= exact_limit:
        best = min(
            itertools.product(*(list(enumerate(p)) for p in pools)), key=_combo_key
        )
        chosen = tuple((topic, cand) for topic, (_, cand) in enumerate(best))
        docs = {cand.sentence.doc_index for _, cand in chosen}
        return TargetSelection(chosen, len(docs), "exact", combos)

    # greedy: repeatedly take the document covering the most uncovered topics
    uncovered = set(range(len(pools)))
    chosen_docs: set[int] = set()
    while uncovered:
        coverage: dict[int, list[int]] = {}
        for topic in uncovered:
            best_rank: dict[int, int] = {}
            for rank, cand in enumerate(pools[topic]):
                doc = cand.sentence.doc_index
                if doc not in best_rank:
                    best_rank[doc] = rank
            for doc, rank in best_rank.items():
                coverage.setdefault(doc, []).append(rank)
        doc = min(
            coverage,
            key=lambda d: (-len(coverage[d]), sum(coverage[d]), d),
        )
        chosen_docs.add(doc)
        uncovered = {
            t
            for t in uncovered
            if all(c.sentence.doc_index != doc for c in pools[t])
        }
    chosen_list: list[tuple[int, RankedCandidate]] = []
    for topic, pool in enumerate(pools):
        eligible = [
            (rank, cand)
            for rank, cand in enumerate(pool)
            if cand.sentence.doc_index in chosen_docs
        ]
        rank, cand = min(
            eligible,
            key=lambda rc: (rc[0], rc[1].sentence.doc_index, rc[1].sentence.sent_index),
        )
        chosen_list.append((topic, cand))
    docs = {cand.sentence.doc_index for _, cand in chosen_list}
    return TargetSelection(tuple(chosen_list), len(docs), "greedy", None)


def avg_topic_position(
    cluster: TopicCluster,
    sentences: Sequence[Sentence],
    doc_lengths: Sequence[int],
) -> float:
    """Mean normalized in-document position of the cluster's members.

    Position is sent_index / (doc_sentence_count - 1); single-sentence
    documents contribute 0. Result lies in [0, 1].
    """
    if cluster.size == 0:
        raise ValueError("cluster has no members")
    total = 0.0
    for m in cluster.members:
        sent = sentences[m]
        total += sent.sent_index / max(1, doc_lengths[sent.doc_index] - 1)
    return total / cluster.size


def order_targets(
    chosen: Sequence[tuple[int, RankedCandidate]],
    topic_positions: Sequence[float],
) -> list[tuple[int, RankedCandidate]]:
    """Order chosen sentences for the target string.

    Same-document sentences keep their original relative order
    (precedence 1); among currently-ready sentences the smallest topic
    position is emitted first (ties: smaller sent_index, then smaller
    doc_index). The constraint graph is a union of per-document chains,
    so this priority topological sort always terminates.
    """
    if not chosen:
        raise ValueError("nothing to order")
    by_doc: dict[int, list[tuple[int, RankedCandidate]]] = {}
    for topic, cand in chosen:
        by_doc.setdefault(cand.sentence.doc_index, []).append((topic, cand))
    for chain in by_doc.values():
        chain.sort(key=lambda tc: tc[1].sentence.sent_index)

    heap: list[tuple[float, int, int, int]] = []
    cursors = {doc: 0 for doc in by_doc}
    for doc, chain in by_doc.items():
        topic, cand = chain[0]
        heapq.heappush(
            heap, (topic_positions[topic], cand.sentence.sent_index, doc, topic)
        )
    ordered: list[tuple[int, RankedCandidate]] = []
    while heap:
        _, _, doc, topic = heapq.heappop(heap)
        chain = by_doc[doc]
        ordered.append(chain[cursors[doc]])
        cursors[doc] += 1
        if cursors[doc] < len(chain):
            ntopic, ncand = chain[cursors[doc]]
            heapq.heappush(
                heap,
                (topic_positions[ntopic], ncand.sentence.sent_index, doc, ntopic),
            )
    return ordered
