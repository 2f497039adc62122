"""Cluster stream parsing, sentence segmentation, and document noise filters."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Union

__all__ = [
    "RawCluster",
    "Sentence",
    "DocumentCluster",
    "ParseError",
    "Skip",
    "parse_cluster_line",
    "parse_cluster_stream",
    "parse_cluster_file",
    "segment",
    "count_tokens",
    "filter_cluster",
]


@dataclass(frozen=True)
class RawCluster:
    """One input cluster exactly as read: ordered (doc_id, text) pairs."""

    cluster_id: str
    documents: tuple[tuple[str, str], ...]
    line_no: int = 0


@dataclass(frozen=True)
class Sentence:
    doc_index: int
    sent_index: int
    text: str
    token_count: int


@dataclass(frozen=True)
class DocumentCluster:
    """A parsed, filtered cluster: every surviving document has >= 1 sentence."""

    cluster_id: str
    documents: tuple[tuple[str, tuple[Sentence, ...]], ...]
    line_no: int = 0

    def sentences(self) -> list[Sentence]:
        """All sentences flattened in document order."""
        return [s for _, sents in self.documents for s in sents]


@dataclass(frozen=True)
class ParseError:
    line_no: int
    reason: str


@dataclass(frozen=True)
class Skip:
    """A cluster dropped by the pipeline, with a machine-readable reason."""

    cluster_id: str
    reason: str
    line_no: int = 0


def parse_cluster_line(
    raw: Union[bytes, str], line_no: int = 0
) -> Union[RawCluster, ParseError, None]:
    """Parse one JSONL line; None for blank lines."""
    if not raw.strip():
        return None
    try:
        text = raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw
    except UnicodeDecodeError as exc:
        return ParseError(line_no, f"invalid utf-8: {exc.reason}")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        return ParseError(line_no, f"invalid json: {exc.msg}")
    return _validate_cluster(obj, line_no)


def parse_cluster_stream(
    stream: Union[IO[bytes], Iterable[bytes]],
) -> Iterator[Union[RawCluster, ParseError]]:
    """Parse newline-delimited JSON clusters from a byte stream.

    Yields RawCluster for well-formed lines and ParseError for malformed
    ones, in stream order; one bad line never aborts the stream. Blank
    lines are skipped. Unknown JSON fields are ignored.
    """
    for line_no, raw in enumerate(stream, start=1):
        result = parse_cluster_line(raw, line_no)
        if result is not None:
            yield result


def parse_cluster_file(path: str) -> Iterator[Union[RawCluster, ParseError]]:
    with open(path, "rb") as fh:
        yield from parse_cluster_stream(fh)


def _validate_cluster(obj: object, line_no: int) -> Union[RawCluster, ParseError]:
    if not isinstance(obj, dict):
        return ParseError(line_no, "cluster must be a JSON object")
    cluster_id = obj.get("cluster_id")
    if cluster_id is None:
        return ParseError(line_no, "missing field cluster_id")
    if not isinstance(cluster_id, str) or not cluster_id:
        return ParseError(line_no, "cluster_id must be a non-empty string")
    documents = obj.get("documents")
    if documents is None:
        return ParseError(line_no, "missing field documents")
    if not isinstance(documents, list):
        return ParseError(line_no, "documents must be a list")
    if not documents:
        return ParseError(line_no, "empty documents")
    parsed: list[tuple[str, str]] = []
    for pos, doc in enumerate(documents):
        if not isinstance(doc, dict):
            return ParseError(line_no, f"document {pos} must be an object")
        doc_id = doc.get("doc_id")
        if doc_id is None:
            return ParseError(line_no, f"document {pos}: missing field doc_id")
        if not isinstance(doc_id, str):
            return ParseError(line_no, f"document {pos}: doc_id must be a string")
        text = doc.get("text")
        if text is None:
            return ParseError(line_no, f"document {pos}: missing field text")
        if not isinstance(text, str):
            return ParseError(line_no, f"document {pos}: text must be a string")
        parsed.append((doc_id, text))
    return RawCluster(cluster_id, tuple(parsed), line_no)


# Final '.' is not a boundary after these (case-insensitive). '!' and '?'
# always split. Single-letter initials intentionally not guarded.
_ABBREVIATIONS = frozenset(
    {
        "dr", "mr", "mrs", "ms", "prof", "rev", "gen", "sen", "rep", "sgt",
        "jr", "sr", "st", "vs", "etc", "e.g", "i.e", "cf", "al", "fig",
        "inc", "ltd", "co", "corp", "dept", "no", "vol", "pp", "approx",
    }
)

_BOUNDARY = re.compile(r"[.!?]+(?=\s|$)")


def segment(text: str) -> list[str]:
    """Split text into sentences on ., !, ? followed by whitespace or end.

    Deterministic and total: an abbreviation guard suppresses splits after
    common abbreviations, output is whitespace-normalized, and joining the
    result with single spaces preserves every non-whitespace character in
    order. Empty input yields an empty list.
    """
    sentences: list[str] = []
    start = 0
    for match in _BOUNDARY.finditer(text):
        end = match.end()
        if match.group() == "." and _is_abbreviation(text, match.start()):
            continue
        piece = " ".join(text[start:end].split())
        if piece:
            sentences.append(piece)
        start = end
    tail = " ".join(text[start:].split())
    if tail:
        sentences.append(tail)
    return sentences


def _is_abbreviation(text: str, dot_pos: int) -> bool:
    word_start = dot_pos
    while word_start > 0 and not text[word_start - 1].isspace():
        word_start -= 1
    return text[word_start:dot_pos].lower() in _ABBREVIATIONS


def count_tokens(text: str) -> int:
    """Whitespace token count — the default token definition everywhere."""
    return len(text.split())


_ENTITY = re.compile(r"&#?[0-9a-zA-Z]+;")


def _is_html_marker(token: str) -> bool:
    lowered = token.lower()
    return "<" in token or ">" in token or "href" in lowered or bool(_ENTITY.search(token))


def _html_density(tokens: list[str]) -> float:
    if not tokens:
        return 0.0
    return sum(1 for t in tokens if _is_html_marker(t)) / len(tokens)


def filter_cluster(cluster: RawCluster, config) -> Union[DocumentCluster, Skip]:
    """Drop short or HTML-noisy documents, then segment the survivors.

    A document is dropped when its whitespace token count is below
    config.min_doc_tokens or when the fraction of tokens carrying HTML
    markers (angle brackets, entities, href) exceeds config.html_noise_max.
    Returns Skip("all_docs_filtered") when nothing survives. Idempotent.
    """
    kept: list[tuple[str, tuple[Sentence, ...]]] = []
    for doc_id, text in cluster.documents:
        tokens = text.split()
        if len(tokens) < config.min_doc_tokens:
            continue
        if _html_density(tokens) > config.html_noise_max:
            continue
        pieces = segment(text)
        if not pieces:
            continue
        doc_index = len(kept)
        sents = tuple(
            Sentence(doc_index, i, piece, count_tokens(piece))
            for i, piece in enumerate(pieces)
        )
        kept.append((doc_id, sents))
    if not kept:
        return Skip(cluster.cluster_id, "all_docs_filtered", cluster.line_no)
    return DocumentCluster(cluster.cluster_id, tuple(kept), cluster.line_no)
