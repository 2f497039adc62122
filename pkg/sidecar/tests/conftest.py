"""Shared fixtures: small local models built on the fly.

The suite must run without network access, so instead of downloading
checkpoints it constructs a little BERT from a handwritten vocabulary:
a randomly initialized encoder for embeddings, and a classifier briefly
trained so that token-overlapping pairs score as entailment and
disjoint pairs as contradiction. Everything is seeded; the artifacts
are deterministic for a given torch/transformers install.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

import pytest
import torch
from transformers import (
    BertConfig,
    BertForSequenceClassification,
    BertModel,
    BertTokenizer,
)

from inference_sidecar import ModelBundle, SidecarConfig, create_app

WORDS = [
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
    "hotel", "india", "juliet", "kilo", "lima", "mike", "november",
    "oscar", "papa", "quebec", "romeo", "sierra", "tango", "uniform",
    "victor", "whiskey", "xray", "yankee", "zulu",
    "river", "stone", "cloud", "ember", "frost", "grove", "harbor",
    "island", "jungle", "kettle", "lantern", "meadow", "nickel",
    "orchard", "pebble", "quarry", "ridge", "saddle", "timber",
    "valley", "willow", "zephyr", "anchor", "beacon", "canyon",
    "drift", "estuary", "fjord", "glacier", "heath", "inlet",
]

LABELS = {"contradiction": 0, "neutral": 1, "entailment": 2}

# acceptance verdicts collected here and echoed after the test summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def build_tokenizer() -> BertTokenizer:
    vocab = {t: i for i, t in enumerate(
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", *WORDS]
    )}
    return BertTokenizer(vocab=vocab, do_lower_case=True)


def build_embedder(out_dir: Path) -> None:
    """Randomly initialized encoder; good enough for geometry contracts."""
    tokenizer = build_tokenizer()
    config = BertConfig(
        vocab_size=tokenizer.vocab_size,
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    torch.manual_seed(7)
    model = BertModel(config)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)


def overlap_pair(rng: random.Random, kind: str) -> tuple[str, str]:
    # hypothesis length is drawn identically for both classes so the
    # model can only separate them by token overlap
    n = rng.randint(4, 7)
    m = rng.randint(3, n)
    words = rng.sample(WORDS, n + m)
    premise_words = words[:n]
    premise = " ".join(premise_words)
    if kind == "entail":
        if m == n and rng.random() < 0.5:
            return premise, premise
        return premise, " ".join(rng.sample(premise_words, m))
    return premise, " ".join(words[n : n + m])


def build_nli(out_dir: Path) -> None:
    """Train a small classifier to score token overlap as entailment."""
    tokenizer = build_tokenizer()
    config = BertConfig(
        vocab_size=tokenizer.vocab_size,
        hidden_size=64,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=128,
        max_position_embeddings=64,
        num_labels=3,
        id2label={v: k for k, v in LABELS.items()},
        label2id=dict(LABELS),
    )
    torch.manual_seed(13)
    model = BertForSequenceClassification(config)

    rng = random.Random(99)
    data = []
    for _ in range(512):
        for kind, label in (("entail", 2), ("contradiction", 0)):
            data.append((*overlap_pair(rng, kind), label))
    rng.shuffle(data)

    def encode(batch):
        enc = tokenizer(
            [p for p, _, _ in batch],
            [h for _, h, _ in batch],
            padding=True,
            truncation=True,
            max_length=32,
            return_tensors="pt",
        )
        return enc, torch.tensor([label for _, _, label in batch])

    optimizer = torch.optim.Adam(model.parameters(), lr=1e-3)
    model.train()
    for _ in range(60):
        for start in range(0, len(data), 64):
            enc, labels = encode(data[start : start + 64])
            loss = model(**enc, labels=labels).loss
            loss.backward()
            optimizer.step()
            optimizer.zero_grad()

    # fail loudly here rather than mysteriously in the contract tests
    model.eval()
    sentences = [" ".join(rng.sample(WORDS, 6)) for _ in range(10)]
    rotated = sentences[1:] + sentences[:1]
    with torch.no_grad():
        def mean_entail(premises, hypotheses):
            enc = tokenizer(premises, hypotheses, padding=True,
                            truncation=True, max_length=32, return_tensors="pt")
            probs = torch.softmax(model(**enc).logits.double(), dim=1)
            return probs[:, LABELS["entailment"]].mean().item()
        same = mean_entail(sentences, sentences)
        cross = mean_entail(sentences, rotated)
    assert same - cross > 0.3, f"overlap training failed: {same:.3f} vs {cross:.3f}"

    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)


@dataclass(frozen=True)
class TinyModels:
    embed_dir: str
    nli_dir: str


@pytest.fixture(scope="session")
def tiny_models(tmp_path_factory) -> TinyModels:
    root = tmp_path_factory.mktemp("tiny-models")
    embed_dir = root / "embedder"
    nli_dir = root / "nli"
    build_embedder(embed_dir)
    build_nli(nli_dir)
    return TinyModels(embed_dir=str(embed_dir), nli_dir=str(nli_dir))


@pytest.fixture(scope="session")
def sidecar_config(tiny_models: TinyModels) -> SidecarConfig:
    return SidecarConfig(
        embed_model=tiny_models.embed_dir,
        nli_model=tiny_models.nli_dir,
        max_batch=8,
        max_seq_len=32,
    )


@pytest.fixture(scope="session")
def bundle(sidecar_config: SidecarConfig) -> ModelBundle:
    return ModelBundle(sidecar_config)


@pytest.fixture(scope="session")
def client(bundle: ModelBundle, sidecar_config: SidecarConfig):
    from fastapi.testclient import TestClient

    return TestClient(create_app(bundle, sidecar_config))


@pytest.fixture()
def loading_client(sidecar_config: SidecarConfig):
    from fastapi.testclient import TestClient

    return TestClient(create_app(None, sidecar_config))
