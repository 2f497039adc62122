"""Streaming orchestration: one reader, N workers, one ordered writer.

Input lines are read lazily in fixed-size batches, processed by stateless
workers, and written back strictly in input order. In-flight work is
capped at REORDER_DEPTH x workers batches, so peak memory is bounded by
batch size and cluster size, never by file size. Because per-cluster
randomness is derived from (seed, cluster_id), output bytes are identical
for any worker count.
"""

from __future__ import annotations

import json
import math
import sys
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .assembly import PretrainExample, assemble_example
from .config import PipelineConfig
from .corpus import ParseError, RawCluster, Skip, filter_cluster, parse_cluster_line, segment
from .metrics import ngram_novelty, per_document_summac
from .providers import ProviderError, make_provider

__all__ = ["RunStats", "run_forge", "run_metrics", "skips_path"]

BATCH_LINES = 64
REORDER_DEPTH = 4  # in-flight batches per worker
PROGRESS_EVERY = 10_000


@dataclass
class RunStats:
    clusters_in: int = 0
    examples_out: int = 0
    skips_by_reason: dict = field(default_factory=dict)
    parse_errors: int = 0
    mean_k_effective: float = 0.0
    wall_time: float = 0.0
    clusters_per_second: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "clusters_in": self.clusters_in,
                "examples_out": self.examples_out,
                "skips_by_reason": dict(sorted(self.skips_by_reason.items())),
                "parse_errors": self.parse_errors,
                "mean_k_effective": self.mean_k_effective,
                "wall_time": self.wall_time,
                "clusters_per_second": self.clusters_per_second,
            },
            sort_keys=False,
        )


def skips_path(output_path: str) -> str:
    p = str(output_path)
    if p.endswith(".jsonl"):
        p = p[: -len(".jsonl")]
    return p + ".skips.jsonl"


def _skip_record(cluster_id, line_no: int, reason: str) -> str:
    return json.dumps(
        {"cluster_id": cluster_id, "line": line_no, "reason": reason},
        ensure_ascii=False,
        separators=(",", ":"),
    )


def _process_line(line_no: int, raw: bytes, config: PipelineConfig, provider):
    """Returns (tag, json_line, extra): tag in example|skip|parse_error|blank."""
    parsed = parse_cluster_line(raw, line_no)
    if parsed is None:
        return ("blank", "", None)
    if isinstance(parsed, ParseError):
        return (
            "parse_error",
            _skip_record(None, parsed.line_no, f"parse_error: {parsed.reason}"),
            None,
        )
    filtered = filter_cluster(parsed, config)
    if isinstance(filtered, Skip):
        return ("skip", _skip_record(filtered.cluster_id, filtered.line_no, filtered.reason), filtered.reason)
    try:
        result = assemble_example(filtered, config, provider)
    except ProviderError as exc:
        raise type(exc)(f"cluster {parsed.cluster_id!r} (line {line_no}): {exc}") from exc
    if isinstance(result, Skip):
        return ("skip", _skip_record(result.cluster_id, result.line_no, result.reason), result.reason)
    return ("example", result.to_json(), result.k_effective)


# per-process state for pool workers
_WORKER_CONFIG: PipelineConfig | None = None
_WORKER_PROVIDER = None


def _worker_init(config: PipelineConfig) -> None:
    global _WORKER_CONFIG, _WORKER_PROVIDER
    _WORKER_CONFIG = config
    _WORKER_PROVIDER = make_provider(config.provider, config.provider_url or None, config.stub_dim)


def _worker_run(batch: list[tuple[int, bytes]]) -> list[tuple]:
    return [_process_line(line_no, raw, _WORKER_CONFIG, _WORKER_PROVIDER) for line_no, raw in batch]


def _read_batches(stream: IO[bytes], batch_lines: int) -> Iterator[list[tuple[int, bytes]]]:
    batch: list[tuple[int, bytes]] = []
    for line_no, raw in enumerate(stream, start=1):
        batch.append((line_no, raw))
        if len(batch) >= batch_lines:
            yield batch
            batch = []
    if batch:
        yield batch


class _StatsTracker:
    def __init__(self, progress_stream):
        self.stats = RunStats()
        self._k_sum = 0
        self._progress_stream = progress_stream
        self._next_progress = PROGRESS_EVERY

    def record(self, tag: str, extra) -> None:
        if tag == "blank":
            return
        if tag == "parse_error":
            self.stats.parse_errors += 1
            return
        self.stats.clusters_in += 1
        if tag == "example":
            self.stats.examples_out += 1
            self._k_sum += extra
        else:
            self.stats.skips_by_reason[extra] = self.stats.skips_by_reason.get(extra, 0) + 1
        if self.stats.clusters_in >= self._next_progress:
            self._next_progress += PROGRESS_EVERY
            if self._progress_stream is not None:
                print(self.stats.to_json(), file=self._progress_stream, flush=True)

    def finish(self, wall_time: float) -> RunStats:
        s = self.stats
        s.mean_k_effective = self._k_sum / s.examples_out if s.examples_out else 0.0
        s.wall_time = wall_time
        s.clusters_per_second = s.clusters_in / wall_time if wall_time > 0 else 0.0
        return s


def run_forge(
    config: PipelineConfig,
    input_path: str,
    output_path: str,
    progress_stream=None,
) -> RunStats:
    """Stream clusters through the pipeline; output order == input order."""
    start = time.perf_counter()
    tracker = _StatsTracker(progress_stream)
    with open(input_path, "rb") as instream, open(
        output_path, "w", encoding="utf-8", newline="\n"
    ) as out, open(
        skips_path(output_path), "w", encoding="utf-8", newline="\n"
    ) as skips_out:

        def write(results: Iterable[tuple]) -> None:
            for tag, line, extra in results:
                if tag == "example":
                    out.write(line + "\n")
                elif tag in ("skip", "parse_error"):
                    skips_out.write(line + "\n")
                tracker.record(tag, extra)

        if config.workers <= 1:
            provider = make_provider(
                config.provider, config.provider_url or None, config.stub_dim
            )
            for batch in _read_batches(instream, BATCH_LINES):
                write(
                    _process_line(line_no, raw, config, provider)
                    for line_no, raw in batch
                )
        else:
            max_inflight = REORDER_DEPTH * config.workers
            with ProcessPoolExecutor(
                max_workers=config.workers,
                initializer=_worker_init,
                initargs=(config,),
            ) as pool:
                pending: deque = deque()
                try:
                    for batch in _read_batches(instream, BATCH_LINES):
                        if len(pending) >= max_inflight:
                            write(pending.popleft().result())
                        pending.append(pool.submit(_worker_run, batch))
                    while pending:
                        write(pending.popleft().result())
                except Exception:
                    for fut in pending:
                        fut.cancel()
                    raise
    return tracker.finish(time.perf_counter() - start)


def _metrics_row(obj: object, provider) -> dict:
    if not isinstance(obj, dict):
        raise ValueError("row must be a JSON object")
    documents = obj.get("documents")
    summary = obj.get("summary")
    if not isinstance(documents, list) or not documents:
        raise ValueError("missing or empty field documents")
    if not all(isinstance(d, str) for d in documents):
        raise ValueError("documents must be strings")
    if not isinstance(summary, str) or not summary.strip():
        raise ValueError("missing or empty field summary")
    doc_sentences = [segment(d) for d in documents]
    if any(not sents for sents in doc_sentences):
        raise ValueError("a document has no sentences")
    summary_sentences = segment(summary)
    if not summary_sentences:
        raise ValueError("summary has no sentences")
    per_doc = per_document_summac(doc_sentences, summary_sentences, provider)
    return {
        "mdsummac": math.fsum(per_doc) / len(per_doc),
        "ngram_novelty": ngram_novelty(" ".join(documents), summary),
        "per_document_summac": per_doc,
    }


def run_metrics(config: PipelineConfig, predictions_path: str, out=None) -> int:
    """Score a predictions file row by row; returns the process exit code.

    Writes one report line per row plus a final corpus-mean line. Rows
    with schema violations produce error records; the exit code is
    nonzero only when every row failed.
    """
    out = out if out is not None else sys.stdout
    provider = make_provider(config.provider, config.provider_url or None, config.stub_dim)
    scored = 0
    failed = 0
    sums = {"mdsummac": 0.0, "ngram_novelty": 0.0}
    with open(predictions_path, "rb") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw.decode("utf-8"))
                report = _metrics_row(obj, provider)
            except ProviderError:
                raise
            except (ValueError, UnicodeDecodeError) as exc:
                failed += 1
                print(
                    json.dumps({"row": line_no, "error": str(exc)}, ensure_ascii=False),
                    file=out,
                )
                continue
            scored += 1
            sums["mdsummac"] += report["mdsummac"]
            sums["ngram_novelty"] += report["ngram_novelty"]
            print(json.dumps({"row": line_no, **report}, ensure_ascii=False), file=out)
    if scored:
        print(
            json.dumps(
                {
                    "corpus_mean": {
                        "mdsummac": sums["mdsummac"] / scored,
                        "ngram_novelty": sums["ngram_novelty"] / scored,
                    },
                    "rows_scored": scored,
                    "rows_failed": failed,
                }
            ),
            file=out,
        )
        return 0
    if failed:
        print("error: every prediction row failed schema validation", file=sys.stderr)
        return 2
    print("warning: empty predictions file, nothing to score", file=sys.stderr)
    return 0
