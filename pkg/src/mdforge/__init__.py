"""Self-supervised pre-training pairs from multi-document clusters.

The pipeline turns each cluster of related documents into one
(input, target) pair: it finds sentence communities across the
documents, picks the most representative and best-supported sentence
per topic from as few documents as possible, orders them, and removes
them from the input so the target is never copyable.
"""

from .assembly import PretrainExample, assemble_example, derive_rng, sample_k
from .clustering import TopicCluster, community_backend, community_cluster, top_k_clusters
from .config import ConfigError, PipelineConfig, build_config, load_config_file
from .corpus import (
    DocumentCluster,
    ParseError,
    RawCluster,
    Sentence,
    Skip,
    count_tokens,
    filter_cluster,
    parse_cluster_file,
    segment,
)
from .metrics import MetricReport, mdsummac, ngram_novelty, per_document_summac, summac_zs
from .providers import (
    HttpProvider,
    ProviderError,
    ProviderProtocolError,
    ProviderUnavailableError,
    StubProvider,
    make_provider,
)
from .runner import RunStats, run_forge, run_metrics
from .selection import RankedCandidate, TargetSelection, order_targets, rank_candidates, select_cover

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DocumentCluster",
    "HttpProvider",
    "MetricReport",
    "ParseError",
    "PipelineConfig",
    "PretrainExample",
    "ProviderError",
    "ProviderProtocolError",
    "ProviderUnavailableError",
    "RankedCandidate",
    "RawCluster",
    "RunStats",
    "Sentence",
    "Skip",
    "StubProvider",
    "TargetSelection",
    "TopicCluster",
    "assemble_example",
    "build_config",
    "community_backend",
    "community_cluster",
    "count_tokens",
    "derive_rng",
    "filter_cluster",
    "load_config_file",
    "make_provider",
    "mdsummac",
    "ngram_novelty",
    "order_targets",
    "parse_cluster_file",
    "per_document_summac",
    "rank_candidates",
    "run_forge",
    "run_metrics",
    "sample_k",
    "segment",
    "select_cover",
    "summac_zs",
    "top_k_clusters",
    "__version__",
]
