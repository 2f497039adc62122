"""Shared fixtures and cluster-building helpers."""

from __future__ import annotations

import json
import random

import pytest

from mdforge.config import PipelineConfig
from mdforge.corpus import DocumentCluster, RawCluster, Sentence, filter_cluster
from mdforge.providers import StubProvider


# acceptance verdicts collected here and echoed after the test summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def stub():
    return StubProvider()


@pytest.fixture
def config():
    return PipelineConfig()


def make_cluster(cluster_id: str, doc_texts: list[str], line_no: int = 0) -> DocumentCluster:
    """Segment plain texts into a DocumentCluster, bypassing noise filters."""
    raw = RawCluster(
        cluster_id,
        tuple((f"d{i}", t) for i, t in enumerate(doc_texts)),
        line_no,
    )
    result = filter_cluster(raw, PipelineConfig(min_doc_tokens=0))
    assert isinstance(result, DocumentCluster), result
    return result


def make_sentences(refs: list[tuple[int, int]], texts: list[str] | None = None) -> list[Sentence]:
    """Sentences straight from (doc, sent) refs, for selection-level tests."""
    return [
        Sentence(d, s, texts[i] if texts else f"sentence {d} {s}.", 3)
        for i, (d, s) in enumerate(refs)
    ]


_WORDS = (
    "alpha bravo charlie delta echo foxtrot golf hotel india juliet kilo lima "
    "mike november oscar papa quebec romeo sierra tango uniform victor whiskey "
    "xray yankee zulu ember quartz violet marble copper".split()
)


def random_sentence(rng: random.Random, n_tokens: int = 8) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(n_tokens)).capitalize() + "."


def paraphrase(rng: random.Random, base: str, n_swaps: int = 1) -> str:
    """Replace a few tokens so stub-embedding cosine stays high but below 1."""
    toks = base.rstrip(".").split()
    for _ in range(n_swaps):
        toks[rng.randrange(len(toks))] = rng.choice(_WORDS)
    return " ".join(toks) + "."


def cluster_line(cluster_id: str, doc_texts: list[str]) -> str:
    return json.dumps(
        {
            "cluster_id": cluster_id,
            "documents": [{"doc_id": f"d{i}", "text": t} for i, t in enumerate(doc_texts)],
        },
        ensure_ascii=False,
    )


def clusterable_line(rng: random.Random, cluster_id: str, n_docs: int = 3) -> str:
    """A cluster guaranteed to contain at least one cross-document topic."""
    shared = random_sentence(rng, 10)
    docs = []
    for _ in range(n_docs):
        extra = random_sentence(rng, rng.randint(8, 12))
        docs.append(paraphrase(rng, shared) + " " + extra)
    return cluster_line(cluster_id, docs)


def unclusterable_line(rng: random.Random, cluster_id: str) -> str:
    """Every sentence lexically disjoint from every other: no communities."""
    pool = [f"tok{cluster_id}x{i}" for i in range(60)]
    docs = []
    for d in range(2):
        toks = [pool.pop() for _ in range(12)]
        docs.append(" ".join(toks) + ".")
    return cluster_line(cluster_id, docs)
