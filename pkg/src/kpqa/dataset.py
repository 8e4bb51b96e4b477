"""QA dataset construction under the tree and segment training regimes.

The tree regime turns every annotation into one positive example whose
context is the leaf the answer was located in. The segment regime keeps the
tree examples and adds, for every (document, knowledge point, segment)
triple, either a positive (the segment contains the answer) or a stochastic
negative: probability ``p_present_miss`` when the document holds the answer
somewhere else, ``p_absent`` when the document does not hold it at all.

Negative sampling uses a keyed Bernoulli stream: each draw is a pure
function of (seed, document_id, kp_id, segment index), so datasets are
byte-identical across runs and insertion orders.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from sklearn.base import BaseEstimator

from .chunking import DEFAULT_SEGMENT_LIMIT, chunk
from .doctree import MARKDOWN, locate_answer_context, parse_document
from .errors import MissingDocument, UnknownKnowledgePoint
from .textnorm import NormalizedView

logger = logging.getLogger(__name__)

DEFAULT_P_ABSENT = 0.10
DEFAULT_P_PRESENT_MISS = 0.50


@dataclass(frozen=True)
class KnowledgePoint:
    """A catalog entry: stable id plus its natural-language question."""

    kp_id: str
    question: str


@dataclass(frozen=True)
class Annotation:
    """A gold answer for one knowledge point in one document."""

    document_id: str
    kp_id: str
    answer_text: str


@dataclass(frozen=True)
class SamplingPolicy:
    """Negative-sampling probabilities and the stream seed."""

    p_absent: float = DEFAULT_P_ABSENT
    p_present_miss: float = DEFAULT_P_PRESENT_MISS
    seed: int = 0

    def __post_init__(self):
        for name in ("p_absent", "p_present_miss"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


@dataclass
class QAExample:
    """One (question, context, answer) training triple.

    ``is_impossible`` examples have an empty answer and no offset; answerable
    examples re-slice exactly: context[answer_start:][:len(answer_text)] ==
    answer_text.
    """

    example_id: str
    question: str
    context: str
    answer_text: str = ""
    answer_start: int | None = None
    is_impossible: bool = False

    def __post_init__(self):
        if self.is_impossible:
            if self.answer_text or self.answer_start is not None:
                raise ValueError(f"{self.example_id}: impossible example carries an answer")
        else:
            if not self.answer_text or self.answer_start is None:
                raise ValueError(f"{self.example_id}: answerable example missing answer or offset")
            end = self.answer_start + len(self.answer_text)
            if self.context[self.answer_start:end] != self.answer_text:
                raise ValueError(f"{self.example_id}: answer_start does not re-slice to answer_text")


def _keyed_uniform(seed: int, document_id: str, kp_id: str, segment_index: int) -> float:
    """Deterministic uniform draw in [0, 1) keyed on the triple."""
    payload = f"{seed}\x1f{document_id}\x1f{kp_id}\x1f{segment_index}".encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "big") / 2**64


def _check_inputs(
    documents: Mapping[str, str],
    catalog: Sequence[KnowledgePoint],
    annotations: Sequence[Annotation],
) -> dict[tuple[str, str], Annotation]:
    known = {kp.kp_id for kp in catalog}
    if len(known) != len(catalog):
        raise ValueError("catalog contains duplicate kp_ids")
    for kp_id in known:
        if ":" in kp_id:
            raise ValueError(f"kp_id may not contain ':': {kp_id!r}")
    by_key: dict[tuple[str, str], Annotation] = {}
    for ann in annotations:
        if ann.kp_id not in known:
            raise UnknownKnowledgePoint(f"annotation references unknown kp_id {ann.kp_id!r}")
        if ann.document_id not in documents:
            raise MissingDocument(f"annotation references unknown document {ann.document_id!r}")
        key = (ann.document_id, ann.kp_id)
        if key in by_key:
            raise ValueError(f"duplicate annotation for {key}")
        by_key[key] = ann
    return by_key


def build_tree_dataset(
    documents: Mapping[str, str],
    catalog: Sequence[KnowledgePoint],
    annotations: Sequence[Annotation],
    heading_format: str = MARKDOWN,
) -> list[QAExample]:
    """Positive examples whose contexts are tree-located leaves.

    Annotations whose answer cannot be found in any leaf are skipped with a
    logged warning. No negatives are produced.
    """
    by_key = _check_inputs(documents, catalog, annotations)
    questions = {kp.kp_id: kp.question for kp in catalog}
    trees = {}
    examples: list[QAExample] = []
    for (document_id, kp_id), ann in sorted(by_key.items()):
        if document_id not in trees:
            trees[document_id] = parse_document(
                documents[document_id], heading_format, source_id=document_id
            )
        leaf = locate_answer_context(trees[document_id], ann.answer_text)
        if leaf is None:
            logger.warning(
                "answer for kp %r not found in any leaf of document %r; skipping",
                kp_id, document_id,
            )
            continue
        span = NormalizedView(leaf.leaf_text).find(ann.answer_text)
        assert span is not None  # the leaf was located by the same match
        start, end = span
        examples.append(
            QAExample(
                example_id=f"{document_id}:{kp_id}:tree",
                question=questions[kp_id],
                context=leaf.leaf_text,
                answer_text=leaf.leaf_text[start:end],
                answer_start=start,
            )
        )
    return examples


def build_segment_dataset(
    documents: Mapping[str, str],
    catalog: Sequence[KnowledgePoint],
    annotations: Sequence[Annotation],
    policy: SamplingPolicy,
    limit: int = DEFAULT_SEGMENT_LIMIT,
    include_tree_contexts: bool = True,
    heading_format: str = MARKDOWN,
) -> list[QAExample]:
    """Tree examples plus segment positives and sampled negatives.

    Output order is canonical: tree examples first, then segment examples by
    (document_id, kp_id, segment index), independent of input order.
    """
    by_key = _check_inputs(documents, catalog, annotations)
    examples: list[QAExample] = []
    if include_tree_contexts:
        examples.extend(build_tree_dataset(documents, catalog, annotations, heading_format))

    kps = sorted(catalog, key=lambda kp: kp.kp_id)
    for document_id in sorted(documents):
        segments = chunk(documents[document_id], limit)
        views = [NormalizedView(seg.text) for seg in segments]
        for kp in kps:
            ann = by_key.get((document_id, kp.kp_id))
            for seg, view in zip(segments, views):
                span = view.find(ann.answer_text) if ann else None
                if span is not None:
                    start, end = span
                    examples.append(
                        QAExample(
                            example_id=f"{document_id}:{kp.kp_id}:seg{seg.index}",
                            question=kp.question,
                            context=seg.text,
                            answer_text=seg.text[start:end],
                            answer_start=start,
                        )
                    )
                    continue
                p = policy.p_present_miss if ann else policy.p_absent
                if _keyed_uniform(policy.seed, document_id, kp.kp_id, seg.index) < p:
                    examples.append(
                        QAExample(
                            example_id=f"{document_id}:{kp.kp_id}:seg{seg.index}",
                            question=kp.question,
                            context=seg.text,
                            is_impossible=True,
                        )
                    )
    return examples


def write_squad_json(examples: Sequence[QAExample], split_name: str, path: str | Path) -> None:
    """Write examples as SQuAD v2 JSON (UTF-8, no BOM).

    Consecutive examples that share an example-id document prefix are grouped
    under one title; each example gets its own paragraph so the file
    round-trips to the identical example list.
    """
    data: list[dict] = []
    for ex in examples:
        # example ids are "<document_id>:<kp_id>:<tree|segN>"; kp ids may not
        # contain ':' so the document id survives even if it does
        title = ex.example_id.rsplit(":", 2)[0]
        if not data or data[-1]["title"] != title:
            data.append({"title": title, "paragraphs": []})
        answers = []
        if not ex.is_impossible:
            answers.append({"text": ex.answer_text, "answer_start": ex.answer_start})
        data[-1]["paragraphs"].append(
            {
                "context": ex.context,
                "qas": [
                    {
                        "id": ex.example_id,
                        "question": ex.question,
                        "is_impossible": ex.is_impossible,
                        "answers": answers,
                    }
                ],
            }
        )
    payload = {"version": "v2.0", "data": data}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, separators=(",", ":"))
    logger.info("wrote %d %s examples to %s", len(examples), split_name, path)


def read_squad_json(path: str | Path) -> list[QAExample]:
    """Read a SQuAD v2 JSON file back into examples."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("version") != "v2.0" or "data" not in payload:
        raise ValueError(f"{path}: not a SQuAD v2 file")
    examples: list[QAExample] = []
    for article in payload["data"]:
        for paragraph in article["paragraphs"]:
            context = paragraph["context"]
            for qa in paragraph["qas"]:
                answers = qa.get("answers") or []
                examples.append(
                    QAExample(
                        example_id=qa["id"],
                        question=qa["question"],
                        context=context,
                        answer_text=answers[0]["text"] if answers else "",
                        answer_start=answers[0]["answer_start"] if answers else None,
                        is_impossible=qa["is_impossible"],
                    )
                )
    return examples


def load_catalog(path: str | Path) -> list[KnowledgePoint]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return [KnowledgePoint(kp_id=item["kp_id"], question=item["question"]) for item in raw]


def save_catalog(catalog: Sequence[KnowledgePoint], path: str | Path) -> None:
    raw = [{"kp_id": kp.kp_id, "question": kp.question} for kp in catalog]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(raw, fh, ensure_ascii=False, indent=1)


def load_annotations(path: str | Path) -> list[Annotation]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return [
        Annotation(
            document_id=item["document_id"],
            kp_id=item["kp_id"],
            answer_text=item["answer_text"],
        )
        for item in raw
    ]


def save_annotations(annotations: Sequence[Annotation], path: str | Path) -> None:
    raw = [
        {"document_id": a.document_id, "kp_id": a.kp_id, "answer_text": a.answer_text}
        for a in annotations
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(raw, fh, ensure_ascii=False, indent=1)


class QADatasetBuilder(BaseEstimator):
    """Configured dataset builder exposing both regimes behind one call."""

    def __init__(
        self,
        regime: str = "segment",
        limit: int = DEFAULT_SEGMENT_LIMIT,
        p_absent: float = DEFAULT_P_ABSENT,
        p_present_miss: float = DEFAULT_P_PRESENT_MISS,
        seed: int = 0,
        include_tree_contexts: bool = True,
        heading_format: str = MARKDOWN,
    ):
        self.regime = regime
        self.limit = limit
        self.p_absent = p_absent
        self.p_present_miss = p_present_miss
        self.seed = seed
        self.include_tree_contexts = include_tree_contexts
        self.heading_format = heading_format

    def fit(self, X=None, y=None):
        return self

    def build(
        self,
        documents: Mapping[str, str],
        catalog: Sequence[KnowledgePoint],
        annotations: Sequence[Annotation],
    ) -> list[QAExample]:
        if self.regime == "tree":
            return build_tree_dataset(documents, catalog, annotations, self.heading_format)
        if self.regime == "segment":
            policy = SamplingPolicy(self.p_absent, self.p_present_miss, self.seed)
            return build_segment_dataset(
                documents,
                catalog,
                annotations,
                policy,
                limit=self.limit,
                include_tree_contexts=self.include_tree_contexts,
                heading_format=self.heading_format,
            )
        raise ValueError(f"regime must be 'tree' or 'segment', got {self.regime!r}")
