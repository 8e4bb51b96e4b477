"""Tests for the span-reader contract and its three implementations."""

import math
import os

import pytest

from conftest import fake_reader_cmd
from kpqa.errors import MalformedResponse, ReaderUnavailable
from kpqa.readers import (
    ExternalProcessReader,
    LexicalReader,
    OracleReader,
    SpanPrediction,
    external_read_span,
    lexical_read_span,
    validate_prediction,
)


def overlap_ratio(question, sentence):
    """Independent brute-force bigram-overlap oracle."""
    qb = {question[i:i + 2] for i in range(len(question) - 1)}
    sb = {sentence[i:i + 2] for i in range(len(sentence) - 1)}
    return len(qb & sb) / len(qb)


class TestValidatePrediction:
    def test_valid_span(self):
        pred = SpanPrediction("乙丙", 1, 3, 0.9, 0.1)
        assert validate_prediction(pred, "甲乙丙丁") is pred

    def test_slice_mismatch(self):
        with pytest.raises(MalformedResponse):
            validate_prediction(SpanPrediction("乙", 0, 1, 0.9, 0.1), "甲乙")

    def test_empty_with_offsets(self):
        with pytest.raises(MalformedResponse):
            validate_prediction(SpanPrediction("", 0, 1, 0.9, 0.1), "甲乙")

    def test_non_finite_scores(self):
        with pytest.raises(MalformedResponse):
            validate_prediction(SpanPrediction("", None, None, math.nan, 0.0), "甲乙")


class TestLexicalReader:
    QUESTION = "犹豫期是多少天"
    CONTEXT = "本合同犹豫期为15天。其他内容。"

    def test_best_sentence_becomes_span(self):
        pred = lexical_read_span(self.QUESTION, self.CONTEXT)
        assert pred.answer_text == "本合同犹豫期为15天。"
        assert (pred.start, pred.end) == (0, 11)
        # expected score from the independent bigram oracle, frozen: 2/6
        expected = overlap_ratio(self.QUESTION, "本合同犹豫期为15天。")
        assert pred.score == pytest.approx(expected) == pytest.approx(1 / 3)
        assert pred.null_score == pytest.approx(2 / 3)

    def test_zero_overlap_returns_empty(self):
        pred = lexical_read_span("犹豫期是多少天", "完全无关的句子。")
        assert pred.is_null
        assert pred.start is None and pred.end is None
        assert pred.null_score == 1.0

    def test_tie_earlier_sentence_wins(self):
        question = "甲乙丙"
        context = "甲乙零。零甲乙。"
        first, second = "甲乙零。", "零甲乙。"
        assert overlap_ratio(question, first) == overlap_ratio(question, second) > 0
        pred = lexical_read_span(question, context)
        assert pred.answer_text == first

    def test_single_char_question_abstains(self):
        pred = lexical_read_span("甲", "甲乙丙。")
        assert pred.is_null and pred.null_score == 1.0

    def test_determinism(self):
        reader = LexicalReader()
        a = reader.read_span(self.QUESTION, self.CONTEXT)
        b = reader.read_span(self.QUESTION, self.CONTEXT)
        assert a == b

    def test_span_excludes_surrounding_whitespace(self):
        pred = lexical_read_span("甲乙丙", "  甲乙丙丁。\n其他。")
        assert pred.answer_text == "甲乙丙丁。"
        assert pred.start == 2

    def test_blank_inputs_rejected(self):
        with pytest.raises(ValueError):
            lexical_read_span("  ", "ctx")
        with pytest.raises(ValueError):
            lexical_read_span("q", " \n ")


class TestOracleReader:
    def test_planted_answer_found(self):
        reader = OracleReader({"期限是多少": ["2年"]})
        pred = reader.read_span("期限是多少", "本合同期限为2年整。")
        assert pred.answer_text == "2年"
        assert (pred.score, pred.null_score) == (1.0, 0.0)

    def test_context_without_gold_abstains(self):
        reader = OracleReader({"期限是多少": ["2年"]})
        pred = reader.read_span("期限是多少", "这里没有答案。")
        assert pred.is_null and pred.null_score == 1.0

    def test_unknown_question_abstains(self):
        reader = OracleReader({})
        assert reader.read_span("别的问题", "内容。").is_null

    def test_from_gold(self, tiny_corpus):
        reader = OracleReader.from_gold(tiny_corpus.catalog, tiny_corpus.annotations_test)
        ann = tiny_corpus.annotations_test[0]
        question = next(k.question for k in tiny_corpus.catalog if k.kp_id == ann.kp_id)
        pred = reader.read_span(question, tiny_corpus.documents_test[ann.document_id])
        assert pred.answer_text == ann.answer_text


class TestExternalProcessReader:
    def test_round_trip(self):
        with ExternalProcessReader(fake_reader_cmd("--mode", "first-char")) as reader:
            pred = reader.read_span("q问题", "abc")
        assert pred == SpanPrediction("a", 0, 1, 0.8, 0.2)

    def test_out_of_order_responses_reassociated(self):
        pairs = [("q问", "甲甲"), ("q问", "乙乙"), ("q问", "丙丙")]
        with ExternalProcessReader(fake_reader_cmd("--mode", "shuffle", "--batch", "3")) as reader:
            preds = reader.read_spans(pairs)
        assert [p.answer_text for p in preds] == ["甲", "乙", "丙"]

    def test_bad_span_rejected_not_repaired(self):
        with ExternalProcessReader(fake_reader_cmd("--mode", "bad-span")) as reader:
            with pytest.raises(MalformedResponse):
                reader.read_span("q问", "甲乙丙")

    def test_bad_json_rejected(self):
        with ExternalProcessReader(fake_reader_cmd("--mode", "bad-json")) as reader:
            with pytest.raises(MalformedResponse):
                reader.read_span("q问", "甲乙丙")

    def test_wrong_id_rejected(self):
        with ExternalProcessReader(fake_reader_cmd("--mode", "wrong-id")) as reader:
            with pytest.raises(MalformedResponse):
                reader.read_span("q问", "甲乙丙")

    def test_immediate_exit_is_unavailable(self):
        with ExternalProcessReader(fake_reader_cmd("--mode", "exit")) as reader:
            with pytest.raises(ReaderUnavailable):
                reader.read_span("q问", "甲乙丙")

    def test_unspawnable_command_is_unavailable(self):
        with pytest.raises(ReaderUnavailable):
            ExternalProcessReader("/no/such/binary-zzz")

    def test_one_shot_helper(self):
        pred = external_read_span(fake_reader_cmd("--mode", "first-char"), "q问", "xyz")
        assert pred.answer_text == "x"


def _reader_params():
    params = ["lexical", "oracle", "external"]
    # lets an out-of-tree reader (e.g. a trained model server) run the same
    # conformance suite: KPQA_EXTRA_READER_CMD="cmd to spawn"
    if os.environ.get("KPQA_EXTRA_READER_CMD"):
        params.append("extra-external")
    return params


@pytest.fixture(params=_reader_params())
def any_reader(request):
    """The conformance suite runs identically against all readers."""
    if request.param == "lexical":
        yield LexicalReader()
    elif request.param == "oracle":
        yield OracleReader({"犹豫期是多少天": ["犹豫期为15天"]})
    else:
        if request.param == "extra-external":
            command = os.environ["KPQA_EXTRA_READER_CMD"]
        else:
            command = fake_reader_cmd("--mode", "lexical")
        reader = ExternalProcessReader(command)
        yield reader
        reader.close()


class TestReaderContract:
    CASES = [
        ("犹豫期是多少天", "本合同犹豫期为15天。其他内容。"),
        ("犹豫期是多少天", "完全无关的句子。"),
        ("金额是多少", "金额为5万元。金额另行约定。"),
    ]

    def test_predictions_satisfy_contract(self, any_reader):
        for question, context in self.CASES:
            pred = any_reader.read_span(question, context)
            assert isinstance(pred, SpanPrediction)
            validate_prediction(pred, context)
            assert math.isfinite(pred.score) and math.isfinite(pred.null_score)

    def test_determinism(self, any_reader):
        for question, context in self.CASES:
            assert any_reader.read_span(question, context) == any_reader.read_span(
                question, context
            )

    def test_batch_matches_single(self, any_reader):
        singles = [any_reader.read_span(q, c) for q, c in self.CASES]
        assert any_reader.read_spans(self.CASES) == singles
