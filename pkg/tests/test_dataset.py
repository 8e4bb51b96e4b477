"""Tests for QA dataset construction and SQuAD serialization."""

import hashlib
import json

import pytest

from kpqa.chunking import chunk
from kpqa.dataset import (
    Annotation,
    KnowledgePoint,
    QADatasetBuilder,
    QAExample,
    SamplingPolicy,
    build_segment_dataset,
    build_tree_dataset,
    read_squad_json,
    write_squad_json,
)
from kpqa.errors import MissingDocument, UnknownKnowledgePoint
from kpqa.textnorm import NormalizedView

CATALOG = [
    KnowledgePoint("kp-a", "期限是多少"),
    KnowledgePoint("kp-b", "金额是多少"),
]


class TestQAExampleInvariants:
    def test_positive_must_reslice(self):
        with pytest.raises(ValueError):
            QAExample("x", "q", "甲乙丙", answer_text="乙丙", answer_start=0)
        ok = QAExample("x", "q", "甲乙丙", answer_text="乙丙", answer_start=1)
        assert ok.context[ok.answer_start:ok.answer_start + len(ok.answer_text)] == "乙丙"

    def test_impossible_must_be_empty(self):
        with pytest.raises(ValueError):
            QAExample("x", "q", "ctx", answer_text="a", answer_start=0, is_impossible=True)
        with pytest.raises(ValueError):
            QAExample("x", "q", "ctx")  # answerable but empty


class TestBuildTreeDataset:
    def test_single_match(self):
        docs = {"d1": "# T\n期限为2年整。"}
        anns = [Annotation("d1", "kp-a", "2年")]
        (ex,) = build_tree_dataset(docs, CATALOG, anns)
        assert ex.example_id == "d1:kp-a:tree"
        assert ex.context == "期限为2年整。"
        assert ex.answer_text == "2年"
        assert ex.answer_start == 3
        assert not ex.is_impossible

    def test_unfound_answer_skipped_with_warning(self, caplog):
        docs = {"d1": "# T\n这里没有。"}
        anns = [Annotation("d1", "kp-a", "找不到")]
        with caplog.at_level("WARNING"):
            examples = build_tree_dataset(docs, CATALOG, anns)
        assert examples == []
        assert any("skipping" in rec.message for rec in caplog.records)

    def test_two_annotations_sharing_one_leaf(self):
        docs = {"d1": "# T\n期限为2年，金额为5万元。"}
        anns = [Annotation("d1", "kp-a", "2年"), Annotation("d1", "kp-b", "5万元")]
        first, second = build_tree_dataset(docs, CATALOG, anns)
        assert first.context == second.context
        assert {first.question, second.question} == {"期限是多少", "金额是多少"}
        assert first.example_id != second.example_id

    def test_full_width_answer_maps_back_to_original_offsets(self):
        docs = {"d1": "# T\n期限为２年整。"}
        anns = [Annotation("d1", "kp-a", "2年")]
        (ex,) = build_tree_dataset(docs, CATALOG, anns)
        # answer_text is the original full-width slice so it re-slices exactly
        assert ex.answer_text == "２年"
        assert ex.context[ex.answer_start:ex.answer_start + 2] == "２年"

    def test_unknown_kp_rejected(self):
        with pytest.raises(UnknownKnowledgePoint):
            build_tree_dataset({"d1": "x。"}, CATALOG, [Annotation("d1", "kp-z", "x")])

    def test_unknown_document_rejected(self):
        with pytest.raises(MissingDocument):
            build_tree_dataset({"d1": "x。"}, CATALOG, [Annotation("d2", "kp-a", "x")])

    def test_duplicate_annotation_rejected(self):
        anns = [Annotation("d1", "kp-a", "x"), Annotation("d1", "kp-a", "y")]
        with pytest.raises(ValueError):
            build_tree_dataset({"d1": "x。"}, CATALOG, anns)


def four_segment_doc():
    """Document whose chunking at limit 30 yields exactly four segments.

    The title line packs with the first body sentence into segment 0; the
    answer sentence fills segment 1.
    """
    sentences = [
        "甲" * 25 + "。",
        "答案写在这里共三十个字" + "乙" * 18 + "。",
        "丙" * 29 + "。",
        "丁" * 29 + "。",
    ]
    text = "# T\n" + "".join(sentences)
    assert len(chunk(text, 30)) == 4
    return text, "答案写在这里"


class TestBuildSegmentDataset:
    def test_degenerate_probability_enumeration(self):
        text, answer = four_segment_doc()
        docs = {"d1": text}
        anns = [Annotation("d1", "kp-a", answer)]
        policy = SamplingPolicy(p_absent=0.0, p_present_miss=1.0, seed=3)
        examples = build_segment_dataset(docs, [CATALOG[0]], anns, policy, limit=30)
        tree = [e for e in examples if e.example_id.endswith(":tree")]
        positives = [e for e in examples if not e.is_impossible and ":seg" in e.example_id]
        negatives = [e for e in examples if e.is_impossible]
        assert len(tree) == 1 and not tree[0].is_impossible
        assert len(positives) == 1
        assert positives[0].example_id == "d1:kp-a:seg1"
        assert len(negatives) == 3

    def test_absent_kp_zero_probability(self):
        text, answer = four_segment_doc()
        docs = {"d1": text}
        anns = [Annotation("d1", "kp-a", answer)]
        policy = SamplingPolicy(p_absent=0.0, p_present_miss=1.0, seed=3)
        examples = build_segment_dataset(docs, CATALOG, anns, policy, limit=30)
        assert not any("kp-b" in e.example_id for e in examples)

    def test_positive_completeness(self):
        # every segment containing the answer yields exactly one positive
        text = "# T\n" + ("前缀答案是42天结尾。" + "乙" * 20 + "。") * 3
        docs = {"d1": text}
        anns = [Annotation("d1", "kp-a", "42天")]
        policy = SamplingPolicy(p_absent=0.0, p_present_miss=0.0, seed=3)
        examples = build_segment_dataset(docs, [CATALOG[0]], anns, policy, limit=32)
        segments = chunk(text, 32)
        containing = [s.index for s in segments if NormalizedView(s.text).contains("42天")]
        seg_positives = [e for e in examples if ":seg" in e.example_id]
        assert sorted(int(e.example_id.rsplit("seg", 1)[1]) for e in seg_positives) == containing
        assert len(containing) >= 2

    def test_seed_determinism_and_variation(self):
        text, answer = four_segment_doc()
        docs = {"d1": text, "d2": text.replace("答案写在这里", "别的答案在此共")}
        anns = [Annotation("d1", "kp-a", answer)]
        policy = SamplingPolicy(seed=7)
        a = build_segment_dataset(docs, CATALOG, anns, policy, limit=30)
        b = build_segment_dataset(docs, CATALOG, anns, policy, limit=30)
        assert a == b
        c = build_segment_dataset(docs, CATALOG, anns, SamplingPolicy(seed=8), limit=30)
        positives = lambda xs: [e for e in xs if not e.is_impossible]
        assert positives(a) == positives(c)
        assert a != c

    def test_containment_of_tree_dataset(self):
        text, answer = four_segment_doc()
        docs = {"d1": text}
        anns = [Annotation("d1", "kp-a", answer)]
        tree = build_tree_dataset(docs, CATALOG, anns)
        segment = build_segment_dataset(docs, CATALOG, anns, SamplingPolicy(seed=1), limit=30)
        for ex in tree:
            assert ex in segment

    def test_no_tree_contexts_flag(self):
        text, answer = four_segment_doc()
        docs = {"d1": text}
        anns = [Annotation("d1", "kp-a", answer)]
        out = build_segment_dataset(
            docs, CATALOG, anns, SamplingPolicy(seed=1), limit=30, include_tree_contexts=False
        )
        assert not any(e.example_id.endswith(":tree") for e in out)

    def test_empirical_rates_track_policy(self):
        # keyed Bernoulli stream: inclusion frequency approximates p
        docs = {
            f"d{i}": "# T\n" + "".join(chr(0x4E00 + 40 * i + j) * 29 + "。" for j in range(30))
            for i in range(4)
        }
        policy = SamplingPolicy(p_absent=0.10, p_present_miss=0.5, seed=5)
        examples = build_segment_dataset(docs, CATALOG, [], policy, limit=30)
        eligible = 4 * 30 * len(CATALOG)
        rate = len(examples) / eligible
        assert 0.06 <= rate <= 0.14

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            SamplingPolicy(p_absent=1.5)


class TestSquadJson:
    def make_examples(self):
        return [
            QAExample("d1:kp-a:tree", "期限是多少", "期限为2年整。", "2年", 3),
            QAExample("d1:kp-b:seg0", "金额是多少", "这里没有金额。", is_impossible=True),
            QAExample("d2:kp-a:seg1", "期限是多少", "第二份期限为3年。", "3年", 6),
        ]

    def test_schema_shape(self, tmp_path):
        path = tmp_path / "out.json"
        write_squad_json(self.make_examples(), "train", path)
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert set(payload) == {"version", "data"}
        assert payload["version"] == "v2.0"
        assert [a["title"] for a in payload["data"]] == ["d1", "d2"]
        qa = payload["data"][0]["paragraphs"][0]["qas"][0]
        assert set(qa) == {"id", "question", "is_impossible", "answers"}
        answer = qa["answers"][0]
        context = payload["data"][0]["paragraphs"][0]["context"]
        assert context[answer["answer_start"]:][:len(answer["text"])] == answer["text"]

    def test_negative_schema(self, tmp_path):
        path = tmp_path / "out.json"
        write_squad_json(self.make_examples(), "train", path)
        payload = json.loads(path.read_text(encoding="utf-8"))
        neg = payload["data"][0]["paragraphs"][1]["qas"][0]
        assert neg["is_impossible"] is True
        assert neg["answers"] == []

    def test_round_trip(self, tmp_path):
        path = tmp_path / "out.json"
        examples = self.make_examples()
        write_squad_json(examples, "train", path)
        assert read_squad_json(path) == examples

    def test_utf8_no_bom(self, tmp_path):
        path = tmp_path / "out.json"
        write_squad_json(self.make_examples(), "train", path)
        raw = path.read_bytes()
        assert not raw.startswith(b"\xef\xbb\xbf")
        raw.decode("utf-8")

    def test_reject_non_squad_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"version": "v1.1"}', encoding="utf-8")
        with pytest.raises(ValueError):
            read_squad_json(path)


class TestBuilderEstimator:
    def test_regimes_and_params(self, tiny_corpus):
        builder = QADatasetBuilder(regime="tree")
        tree = builder.build(tiny_corpus.documents_train, tiny_corpus.catalog, tiny_corpus.annotations_train)
        assert tree and all(not e.is_impossible for e in tree)
        seg_builder = QADatasetBuilder(regime="segment", seed=3)
        assert seg_builder.get_params()["seed"] == 3
        segment = seg_builder.build(
            tiny_corpus.documents_train, tiny_corpus.catalog, tiny_corpus.annotations_train
        )
        assert set(e.example_id for e in tree) <= set(e.example_id for e in segment)

    def test_byte_identical_files_for_fixed_seed(self, tiny_corpus, tmp_path):
        digests = []
        for name in ("a.json", "b.json"):
            path = tmp_path / name
            examples = QADatasetBuilder(regime="segment", seed=9).build(
                tiny_corpus.documents_train, tiny_corpus.catalog, tiny_corpus.annotations_train
            )
            write_squad_json(examples, "train", path)
            digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
        assert digests[0] == digests[1]

    def test_bad_regime(self):
        with pytest.raises(ValueError):
            QADatasetBuilder(regime="mixed").build({}, [], [])
