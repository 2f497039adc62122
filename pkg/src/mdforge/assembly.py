"""Final pre-training pair construction.

Runs embed -> cluster -> top-k -> rank -> cover -> order for one document
cluster, then removes the chosen target sentences from the input, applies
the equal-budget truncation, inserts document separators, and optionally
prepends a length-control prefix. Everything downstream of the provider
is a deterministic function of (cluster, config, seed): the per-cluster
RNG is derived by keyed hashing so results never depend on worker count
or scheduling.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from typing import Sequence, Union

from .clustering import community_cluster, top_k_clusters
from .corpus import DocumentCluster, Sentence, Skip
from .selection import avg_topic_position, order_targets, rank_candidates, select_cover

__all__ = [
    "LengthBin",
    "LENGTH_BINS",
    "bin_label",
    "PretrainExample",
    "derive_rng",
    "sample_k",
    "build_target",
    "build_input",
    "remove_sentences",
    "truncate_equal",
    "assemble_example",
]


@dataclass(frozen=True)
class LengthBin:
    label: str
    k_range: tuple[int, int]  # inclusive


# the five bins partition [1, 14]
LENGTH_BINS = (
    LengthBin("short", (1, 2)),
    LengthBin("short-medium", (3, 5)),
    LengthBin("medium", (6, 8)),
    LengthBin("medium-long", (9, 11)),
    LengthBin("long", (12, 14)),
)


def bin_label(k: int) -> Union[str, None]:
    for b in LENGTH_BINS:
        if b.k_range[0] <= k <= b.k_range[1]:
            return b.label
    return None


@dataclass(frozen=True)
class PretrainExample:
    cluster_id: str
    input_text: str
    target_text: str
    length_prefix: Union[str, None]
    k_requested: int
    k_effective: int
    source_doc_count: int
    selected: tuple[tuple[int, int], ...]  # (doc_index, sent_index) in target order

    def to_json(self) -> str:
        record = {
            "cluster_id": self.cluster_id,
            "input": self.input_text,
            "target": self.target_text,
            "length_prefix": self.length_prefix,
            "k_requested": self.k_requested,
            "k_effective": self.k_effective,
            "source_doc_count": self.source_doc_count,
            "selected": [list(ref) for ref in self.selected],
        }
        return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def derive_rng(seed: int, cluster_id: str) -> random.Random:
    """Per-cluster RNG keyed on (global seed, cluster id)."""
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in u64")
    digest = hashlib.blake2b(
        cluster_id.encode("utf-8"), digest_size=8, key=seed.to_bytes(8, "little")
    ).digest()
    return random.Random(int.from_bytes(digest, "little"))


def sample_k(rng: random.Random, config) -> tuple[int, Union[str, None]]:
    """Draw the topic count and, for the sampled branch, its length prefix.

    With probability (1 - length_control_fraction) returns the fixed
    default with no prefix; otherwise rounds a Normal(mean, std) draw,
    clamps it into k_clamp, and labels it with its length bin.
    """
    if rng.random() < config.length_control_fraction:
        lo, hi = config.k_clamp
        k = round(rng.gauss(config.normal_mean, config.normal_std))
        k = max(lo, min(hi, k))
        return k, bin_label(k)
    return config.k_default, None


def build_target(sentences: Sequence[Sentence]) -> str:
    if not sentences:
        raise ValueError("build_target requires at least one sentence")
    return " ".join(s.text for s in sentences)


def remove_sentences(
    cluster: DocumentCluster, removed: set[tuple[int, int]]
) -> DocumentCluster:
    """Drop the referenced sentences; emptied documents are kept."""
    docs = tuple(
        (
            doc_id,
            tuple(s for s in sents if (s.doc_index, s.sent_index) not in removed),
        )
        for doc_id, sents in cluster.documents
    )
    return DocumentCluster(cluster.cluster_id, docs, cluster.line_no)


def build_input(cluster: DocumentCluster, separator: str = "<doc-sep>") -> str:
    """Join remaining sentences, appending the separator after every document.

    Documents emptied by removal still contribute their separator so
    document indexing stays stable downstream.
    """
    parts: list[str] = []
    for _, sents in cluster.documents:
        parts.extend(s.text for s in sents)
        parts.append(separator)
    return " ".join(parts)


def truncate_equal(cluster: DocumentCluster, budget: int) -> DocumentCluster:
    """Distribute a token budget equally across documents, truncating ends.

    Each document gets floor(budget / n_docs) tokens (+1 for the first
    budget mod n_docs documents) and keeps its longest whole-sentence
    prefix within that allotment. No-op when already within budget.
    """
    n = len(cluster.documents)
    if budget < n:
        raise ValueError(f"budget {budget} cannot cover {n} documents")
    total = sum(s.token_count for _, sents in cluster.documents for s in sents)
    if total <= budget:
        return cluster
    base, rem = divmod(budget, n)
    docs: list[tuple[str, tuple[Sentence, ...]]] = []
    for i, (doc_id, sents) in enumerate(cluster.documents):
        allotment = base + (1 if i < rem else 0)
        kept: list[Sentence] = []
        used = 0
        for s in sents:
            if used + s.token_count > allotment:
                break
            kept.append(s)
            used += s.token_count
        docs.append((doc_id, tuple(kept)))
    return DocumentCluster(cluster.cluster_id, tuple(docs), cluster.line_no)


def assemble_example(
    cluster: DocumentCluster,
    config,
    provider,
    rng: Union[random.Random, None] = None,
) -> Union[PretrainExample, Skip]:
    """Run the full per-cluster pipeline and return the pre-training pair.

    Returns Skip("no_topic_clusters") when no community reaches the
    minimum size, and Skip("budget_too_small") when the token budget
    cannot cover one token per document after removal.
    """
    if rng is None:
        rng = derive_rng(config.seed, cluster.cluster_id)
    sentences = cluster.sentences()
    embeddings = provider.embed_batch([s.text for s in sentences])
    threshold = (
        1.0 - config.similarity_threshold
        if config.threshold_is_distance
        else config.similarity_threshold
    )
    communities = community_cluster(embeddings, threshold, config.min_community_size)
    if not communities:
        return Skip(cluster.cluster_id, "no_topic_clusters", cluster.line_no)

    k, prefix = sample_k(rng, config)
    top = top_k_clusters(communities, k)
    k_effective = len(top)

    pools = []
    for tc in top:
        ranked = rank_candidates(
            tc,
            embeddings,
            sentences,
            provider,
            nli_cap=config.nli_cap,
            direction=config.entail_direction,
        )
        pools.append(ranked[: config.c])
    cover = select_cover(pools)

    doc_lengths = [len(sents) for _, sents in cluster.documents]
    positions = [avg_topic_position(tc, sentences, doc_lengths) for tc in top]
    ordered = order_targets(cover.chosen, positions)
    target_text = build_target([cand.sentence for _, cand in ordered])

    removed = {
        (cand.sentence.doc_index, cand.sentence.sent_index)
        for _, cand in cover.chosen
    }
    remaining = remove_sentences(cluster, removed)
    # separators (one per document) and the prefix token must fit the budget
    sentence_budget = (
        config.token_budget - len(cluster.documents) - (1 if prefix else 0)
    )
    try:
        truncated = truncate_equal(remaining, sentence_budget)
    except ValueError:
        return Skip(cluster.cluster_id, "budget_too_small", cluster.line_no)
    input_text = build_input(truncated, config.separator)
    if prefix is not None:
        input_text = config.prefix_template.format(label=prefix) + input_text

    return PretrainExample(
        cluster_id=cluster.cluster_id,
        input_text=input_text,
        target_text=target_text,
        length_prefix=prefix,
        k_requested=k,
        k_effective=k_effective,
        source_doc_count=cover.source_doc_count,
        selected=tuple(
            (cand.sentence.doc_index, cand.sentence.sent_index) for _, cand in ordered
        ),
    )
