"""Cluster parsing, sentence segmentation, and noise filtering."""

from __future__ import annotations

import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdforge.config import PipelineConfig
from mdforge.corpus import (
    DocumentCluster,
    ParseError,
    RawCluster,
    Skip,
    count_tokens,
    filter_cluster,
    parse_cluster_line,
    parse_cluster_stream,
    segment,
)


def parse_lines(*lines: str):
    return list(parse_cluster_stream(io.BytesIO("\n".join(lines).encode("utf-8"))))


class TestParsing:
    def test_minimal_line(self):
        got = parse_lines('{"cluster_id":"c1","documents":[{"doc_id":"d1","text":"A. B."}]}')
        assert got == [RawCluster("c1", (("d1", "A. B."),), 1)]

    def test_missing_documents_is_recoverable(self):
        got = parse_lines('{"cluster_id":"c1"}', '{"cluster_id":"c2","documents":[{"doc_id":"d","text":"hi"}]}')
        assert got[0] == ParseError(1, "missing field documents")
        assert isinstance(got[1], RawCluster) and got[1].line_no == 2

    def test_malformed_middle_line_preserves_order(self):
        ok1 = '{"cluster_id":"a","documents":[{"doc_id":"d","text":"x"}]}'
        ok2 = '{"cluster_id":"b","documents":[{"doc_id":"d","text":"y"}]}'
        got = parse_lines(ok1, "{nope", ok2)
        assert [type(g) for g in got] == [RawCluster, ParseError, RawCluster]
        assert [g.line_no for g in got] == [1, 2, 3]
        assert got[0].cluster_id == "a" and got[2].cluster_id == "b"

    def test_blank_lines_skipped_but_numbering_kept(self):
        got = parse_lines("", '{"cluster_id":"z","documents":[{"doc_id":"d","text":"x"}]}')
        assert len(got) == 1 and got[0].line_no == 2

    @pytest.mark.parametrize(
        "line,reason",
        [
            ("[1,2]", "cluster must be a JSON object"),
            ('{"documents":[]}', "missing field cluster_id"),
            ('{"cluster_id":"","documents":[]}', "cluster_id must be a non-empty string"),
            ('{"cluster_id":"c","documents":[]}', "empty documents"),
            ('{"cluster_id":"c","documents":"x"}', "documents must be a list"),
            ('{"cluster_id":"c","documents":["x"]}', "document 0 must be an object"),
            ('{"cluster_id":"c","documents":[{"text":"x"}]}', "document 0: missing field doc_id"),
            ('{"cluster_id":"c","documents":[{"doc_id":"d"}]}', "document 0: missing field text"),
        ],
    )
    def test_schema_violations(self, line, reason):
        (got,) = parse_lines(line)
        assert got == ParseError(1, reason)

    def test_invalid_utf8(self):
        got = parse_cluster_line(b'{"cluster_id":"\xff"}', 3)
        assert isinstance(got, ParseError) and got.line_no == 3

    def test_unknown_fields_ignored(self):
        (got,) = parse_lines('{"cluster_id":"c","documents":[{"doc_id":"d","text":"x","meta":1}],"extra":2}')
        assert isinstance(got, RawCluster)

    def test_document_order_preserved(self):
        docs = [{"doc_id": f"d{i}", "text": f"t{i}"} for i in range(5)]
        (got,) = parse_lines(json.dumps({"cluster_id": "c", "documents": docs}))
        assert [d[0] for d in got.documents] == [f"d{i}" for i in range(5)]


class TestSegment:
    def test_two_terminators(self):
        assert segment("Good movie. Loved it!") == ["Good movie.", "Loved it!"]

    def test_empty(self):
        assert segment("") == []

    def test_abbreviation_guard(self):
        assert segment("Dr. Smith arrived. He left.") == ["Dr. Smith arrived.", "He left."]

    def test_question_and_runs(self):
        assert segment("Really?! Yes... sure. Ok") == ["Really?!", "Yes...", "sure.", "Ok"]

    def test_whitespace_normalized(self):
        assert segment("A  b\tc.\n\nNext   one.") == ["A b c.", "Next one."]

    def test_abbreviation_midsentence(self):
        assert segment("See Fig. 3 for details. Then stop.") == [
            "See Fig. 3 for details.",
            "Then stop.",
        ]

    @given(st.text(max_size=300))
    @settings(max_examples=200)
    def test_join_preserves_nonspace_characters(self, text):
        joined = " ".join(segment(text))
        assert "".join(joined.split()) == "".join(text.split())

    @given(st.text(max_size=300))
    @settings(max_examples=100)
    def test_pieces_are_normalized_and_nonempty(self, text):
        for piece in segment(text):
            assert piece == " ".join(piece.split())
            assert piece


class TestFilter:
    def cfg(self, **kw):
        return PipelineConfig(**kw)

    def test_short_documents_dropped(self):
        raw = RawCluster("c", (("a", "too short."), ("b", "w " * 10 + "end here now ok.")), 1)
        got = filter_cluster(raw, self.cfg())
        assert isinstance(got, DocumentCluster)
        assert [d[0] for d in got.documents] == ["b"]

    def test_html_heavy_document_dropped(self):
        noisy = "<div> <a href=x> click &amp; here </a> </div> word word word"
        clean = "plain words only here with exactly ten tokens in sum."
        raw = RawCluster("c", (("n", noisy), ("k", clean)), 1)
        got = filter_cluster(raw, self.cfg())
        assert [d[0] for d in got.documents] == ["k"]

    def test_all_docs_filtered_skip(self):
        raw = RawCluster("c", (("a", "tiny."),), 7)
        got = filter_cluster(raw, self.cfg())
        assert got == Skip("c", "all_docs_filtered", 7)

    def test_doc_indices_reassigned_contiguously(self):
        keep = "one two three four five six seven eight nine ten."
        raw = RawCluster("c", (("a", "x."), ("b", keep), ("c", "y."), ("d", keep)), 1)
        got = filter_cluster(raw, self.cfg())
        for want_idx, (_, sents) in enumerate(got.documents):
            assert all(s.doc_index == want_idx for s in sents)
            assert [s.sent_index for s in sents] == list(range(len(sents)))

    def test_sentence_token_counts(self):
        raw = RawCluster("c", (("a", "one two three. four five six seven eight nine ten."),), 1)
        got = filter_cluster(raw, self.cfg())
        sents = got.sentences()
        assert [s.token_count for s in sents] == [3, 7]
        assert count_tokens("a  b\tc") == 3

    def test_zero_min_tokens_keeps_everything_with_sentences(self):
        raw = RawCluster("c", (("a", "Hi."), ("b", "   ")), 1)
        got = filter_cluster(raw, self.cfg(min_doc_tokens=0))
        assert [d[0] for d in got.documents] == ["a"]
