"""Model loading and batched inference.

The embedder is any transformer encoder: token states are mean-pooled
under the attention mask and L2-normalized, so clients can feed the
vectors straight into cosine math. The NLI model is any sequence
classifier whose labels include an entailment class; only that class's
softmax probability is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from transformers import (
    AutoModel,
    AutoModelForSequenceClassification,
    AutoTokenizer,
)

__all__ = ["SidecarConfig", "ModelBundle", "resolve_entailment_index"]


@dataclass
class SidecarConfig:
    embed_model: str = "sentence-transformers/all-mpnet-base-v2"
    nli_model: str = "tals/albert-base-vitaminc"
    port: int = 8080
    max_batch: int = 256
    max_seq_len: int = 128

    def validate(self) -> "SidecarConfig":
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        if self.max_seq_len < 8:
            raise ValueError("max_seq_len must be >= 8")
        if not 0 < self.port < 65536:
            raise ValueError("port must be in 1..65535")
        return self


def resolve_entailment_index(config) -> int:
    """Index of the entailment class in the classifier's label map."""
    label2id = getattr(config, "label2id", None) or {}
    for label, idx in label2id.items():
        if "entail" in str(label).lower():
            return int(idx)
    raise ValueError(
        f"no entailment label among {sorted(map(str, label2id))!r}; "
        "the NLI model must declare one"
    )


class ModelBundle:
    """Both models plus their tokenizers, loaded eagerly and kept in eval mode."""

    def __init__(self, config: SidecarConfig):
        self.config = config.validate()
        self.embed_tokenizer = AutoTokenizer.from_pretrained(config.embed_model)
        self.embed_model = AutoModel.from_pretrained(config.embed_model).eval()
        self.nli_tokenizer = AutoTokenizer.from_pretrained(config.nli_model)
        self.nli_model = AutoModelForSequenceClassification.from_pretrained(
            config.nli_model
        ).eval()
        self.entailment_index = resolve_entailment_index(self.nli_model.config)
        self.dim = int(self.embed_model.config.hidden_size)

    def _would_truncate(self, tokenizer, *text_args) -> bool:
        lengths = [len(ids) for ids in tokenizer(*text_args)["input_ids"]]
        return any(n > self.config.max_seq_len for n in lengths)

    @torch.no_grad()
    def embed(self, texts: list[str]) -> tuple[list[list[float]], bool]:
        truncated = self._would_truncate(self.embed_tokenizer, texts)
        enc = self.embed_tokenizer(
            texts,
            padding=True,
            truncation=True,
            max_length=self.config.max_seq_len,
            return_tensors="pt",
        )
        states = self.embed_model(**enc).last_hidden_state
        mask = enc["attention_mask"].unsqueeze(-1).to(states.dtype)
        pooled = (states * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
        vectors = torch.nn.functional.normalize(pooled, p=2, dim=1)
        return vectors.double().tolist(), truncated

    @torch.no_grad()
    def entail(self, pairs: list[tuple[str, str]]) -> tuple[list[float], bool]:
        premises = [p for p, _ in pairs]
        hypotheses = [h for _, h in pairs]
        truncated = self._would_truncate(self.nli_tokenizer, premises, hypotheses)
        enc = self.nli_tokenizer(
            premises,
            hypotheses,
            padding=True,
            truncation=True,
            max_length=self.config.max_seq_len,
            return_tensors="pt",
        )
        logits = self.nli_model(**enc).logits
        probs = torch.softmax(logits.double(), dim=1)[:, self.entailment_index]
        return probs.tolist(), truncated
