"""Tests for synthetic corpus generation."""

import pytest

from kpqa.corpus import MAX_CATALOG_SIZE, CorpusSpec, generate_corpus, make_catalog
from kpqa.doctree import locate_answer_context, parse_document
from kpqa.errors import TemplateExhaustion
from kpqa.textnorm import NormalizedView

SMALL = CorpusSpec(n_train_docs=5, n_test_docs=5, catalog_size=20, avg_kps_per_doc=5, seed=1)


class TestCorpusSpec:
    def test_defaults_mirror_study_corpus(self):
        spec = CorpusSpec()
        assert spec.n_train_docs == 251
        assert spec.n_test_docs == 98
        assert spec.catalog_size == 309
        assert spec.avg_kps_per_doc == 45

    def test_validation(self):
        with pytest.raises(ValueError):
            CorpusSpec(n_train_docs=0)
        with pytest.raises(ValueError):
            CorpusSpec(catalog_size=10, avg_kps_per_doc=11)
        with pytest.raises(ValueError):
            CorpusSpec(distractor_density=-1)


class TestGenerateCorpus:
    def test_determinism(self):
        a = generate_corpus(SMALL)
        b = generate_corpus(SMALL)
        assert a.documents == b.documents
        assert a.annotations_train == b.annotations_train
        assert a.annotations_test == b.annotations_test
        assert a.catalog == b.catalog

    def test_count_bookkeeping(self):
        corpus = generate_corpus(SMALL)
        assert len(corpus.documents) == 10
        assert len(corpus.catalog) == 20
        total = len(corpus.annotations_train) + len(corpus.annotations_test)
        # 10 docs x 20 kps sampled at p=0.25: expect 50, allow wide binomial slack
        assert 20 <= total <= 80
        assert corpus.manifest["n_train_annotations"] == len(corpus.annotations_train)
        assert corpus.manifest["n_test_annotations"] == len(corpus.annotations_test)
        assert corpus.manifest["n_train_documents"] == 5

    def test_every_annotation_locatable_in_exactly_one_leaf(self):
        corpus = generate_corpus(SMALL)
        documents = corpus.documents
        for ann in corpus.annotations_train + corpus.annotations_test:
            tree = parse_document(documents[ann.document_id], source_id=ann.document_id)
            hits = [
                leaf for leaf in tree.leaves()
                if NormalizedView(leaf.leaf_text).contains(ann.answer_text)
            ]
            assert len(hits) == 1
            assert locate_answer_context(tree, ann.answer_text) == hits[0]

    def test_planted_answer_unique_in_document(self):
        corpus = generate_corpus(SMALL)
        documents = corpus.documents
        for ann in corpus.annotations_train + corpus.annotations_test:
            assert documents[ann.document_id].count(ann.answer_text) == 1

    def test_split_document_ids_disjoint(self):
        corpus = generate_corpus(SMALL)
        assert not set(corpus.documents_train) & set(corpus.documents_test)

    def test_every_document_annotated(self):
        corpus = generate_corpus(SMALL)
        annotated = {a.document_id for a in corpus.annotations_train + corpus.annotations_test}
        assert annotated == set(corpus.documents)

    def test_distractors_share_vocabulary_but_never_answers(self):
        corpus = generate_corpus(SMALL)
        answers = {a.answer_text for a in corpus.annotations_train + corpus.annotations_test}
        for document_id, text in corpus.documents.items():
            doc_answers = {
                a.answer_text
                for a in corpus.annotations_train + corpus.annotations_test
                if a.document_id == document_id
            }
            for answer in answers - doc_answers:
                assert answer not in text

    def test_catalog_questions_unique(self):
        catalog = make_catalog(309)
        assert len({kp.question for kp in catalog}) == 309
        assert len({kp.kp_id for kp in catalog}) == 309

    def test_template_exhaustion(self):
        with pytest.raises(TemplateExhaustion):
            make_catalog(MAX_CATALOG_SIZE + 1)

    def test_answer_values_differ_across_documents(self):
        corpus = generate_corpus(SMALL)
        by_kp = {}
        for ann in corpus.annotations_train + corpus.annotations_test:
            by_kp.setdefault(ann.kp_id, set()).add(ann.answer_text)
        # same knowledge point gets distinct planted values in distinct docs
        for kp_id, values in by_kp.items():
            docs = [
                a.document_id
                for a in corpus.annotations_train + corpus.annotations_test
                if a.kp_id == kp_id
            ]
            assert len(values) == len(docs)
