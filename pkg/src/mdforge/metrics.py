"""Faithfulness (multi-document entailment consistency) and abstractiveness.

The consistency score treats each input document separately: per summary
sentence, take the maximum entailment probability against any sentence of
that document, average over summary sentences (zero-shot consistency),
then average over documents. Abstractiveness is the mean novel-n-gram
fraction for n in {1, 2, 3}, over n-gram types.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "MetricReport",
    "summac_zs",
    "per_document_summac",
    "mdsummac",
    "ngram_novelty",
]


@dataclass(frozen=True)
class MetricReport:
    mdsummac: float
    ngram_novelty: float
    per_document_summac: tuple[float, ...]


def summac_zs(
    doc_sentences: Sequence[str],
    summary_sentences: Sequence[str],
    provider,
) -> float:
    """Mean over summary sentences of the max entailment by any doc sentence.

    Premise = document sentence, hypothesis = summary sentence.
    """
    if not doc_sentences:
        raise ValueError("document has no sentences")
    if not summary_sentences:
        raise ValueError("summary has no sentences")
    pairs = [(d, s) for s in summary_sentences for d in doc_sentences]
    probs = np.asarray(provider.entail_batch(pairs), dtype=np.float64)
    grid = probs.reshape(len(summary_sentences), len(doc_sentences))
    return float(grid.max(axis=1).mean())


def per_document_summac(
    documents: Sequence[Sequence[str]],
    summary_sentences: Sequence[str],
    provider,
) -> list[float]:
    if not documents:
        raise ValueError("need at least one document")
    return [summac_zs(doc, summary_sentences, provider) for doc in documents]


def mdsummac(
    documents: Sequence[Sequence[str]],
    summary_sentences: Sequence[str],
    provider,
) -> float:
    """Average per-document zero-shot consistency over all input documents."""
    scores = per_document_summac(documents, summary_sentences, provider)
    # fsum keeps the mean exactly invariant under document permutation
    return math.fsum(scores) / len(scores)


def _metric_tokens(text: str) -> list[str]:
    # lowercase, whitespace-split, strip leading/trailing punctuation
    out = []
    for tok in text.lower().split():
        tok = tok.strip(string.punctuation)
        if tok:
            out.append(tok)
    return out


def _ngram_set(tokens: Sequence[str], n: int) -> set[tuple[str, ...]]:
    return {tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)}


def ngram_novelty(input_text: str, summary_text: str) -> float:
    """Mean fraction of summary n-gram types absent from the input, n in 1..3.

    Orders with fewer summary tokens than n are excluded from the mean.
    """
    summary_tokens = _metric_tokens(summary_text)
    if not summary_tokens:
        raise ValueError("summary has no tokens")
    input_tokens = _metric_tokens(input_text)
    parts = []
    for n in (1, 2, 3):
        summary_grams = _ngram_set(summary_tokens, n)
        if not summary_grams:
            continue
        input_grams = _ngram_set(input_tokens, n)
        parts.append(len(summary_grams - input_grams) / len(summary_grams))
    return sum(parts) / len(parts)
