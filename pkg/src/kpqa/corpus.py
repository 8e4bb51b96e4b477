"""Synthetic clause-like corpora with planted knowledge points.

Stands in for the proprietary corpus: each generated document is a
heading-structured markdown file in which every sampled knowledge point's
answer sentence is planted in exactly one paragraph, surrounded by filler
and by distractor paragraphs that reuse the catalog vocabulary without ever
containing a planted answer.

Vocabulary is built from disjoint slabs of CJK codepoints, one 4-character
word per slab, so different subjects (and different aspects) share no
character bigrams. That makes the lexical baseline's margins predictable: a
question overlaps its own answer sentence on ~70% of its bigrams but any
other sentence on at most ~30%. Answer "values" are hash-derived digit
strings, so nothing can be solved by memorizing values. The gold answer for
an annotation is the full rendered answer sentence.

Everything is deterministic given the seed; documents use per-document
sub-seeds keyed on (seed, document_id), so generation order does not matter.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import asdict, dataclass, field
from typing import Iterable

from .dataset import Annotation, KnowledgePoint
from .errors import TemplateExhaustion

QUESTION_TEMPLATE = "{topic}是多少"
ANSWER_TEMPLATE = "本合同{topic}为{value}。"
DISTRACTOR_TEMPLATES = (
    "本合同{subject}{extra_aspect}见附录说明。",
    "{extra_subject}{aspect}以公示为准。",
)
FILLER_SENTENCES = (
    "具体内容以附表约定为准。",
    "详见附录及相关说明。",
    "其余事项按照本条款执行。",
    "上述内容自签署之日起生效。",
)
SECTION_HEADING = "## 第{n}部分"
SUBSECTION_HEADING = "### 第{n}.{m}节"
TITLE_TEMPLATE = "# 条款 {document_id}"
VALUE_UNITS = ("天", "个月", "年", "元", "万元", "%")

_WORD_LEN = 4
_N_ASPECTS = 12
_MAX_SUBJECTS = 48
_N_EXTRA = 8

# Characters the fixed templates use; the combinatorial vocabulary must avoid
# them so filler/heading/value text never shares a bigram with a question.
_RESERVED = set(
    QUESTION_TEMPLATE + ANSWER_TEMPLATE + TITLE_TEMPLATE
    + "".join(DISTRACTOR_TEMPLATES) + "".join(FILLER_SENTENCES)
    + SECTION_HEADING + SUBSECTION_HEADING + "".join(VALUE_UNITS)
)


def _build_words(count: int, skip: int = 0) -> list[str]:
    """Carve ``count`` 4-char words out of sequential CJK codepoints."""
    chars: list[str] = []
    needed = (skip + count) * _WORD_LEN
    code = 0x4E00
    while len(chars) < needed:
        ch = chr(code)
        if ch not in _RESERVED:
            chars.append(ch)
        code += 1
    words = [
        "".join(chars[i * _WORD_LEN:(i + 1) * _WORD_LEN])
        for i in range(skip + count)
    ]
    return words[skip:]


_SUBJECTS = _build_words(_MAX_SUBJECTS)
_ASPECTS = _build_words(_N_ASPECTS, skip=_MAX_SUBJECTS)
_EXTRA_SUBJECTS = _build_words(_N_EXTRA, skip=_MAX_SUBJECTS + _N_ASPECTS)
_EXTRA_ASPECTS = _build_words(_N_EXTRA, skip=_MAX_SUBJECTS + _N_ASPECTS + _N_EXTRA)

MAX_CATALOG_SIZE = _MAX_SUBJECTS * _N_ASPECTS


@dataclass(frozen=True)
class CorpusSpec:
    """Shape of the synthetic corpus; count defaults mirror the study setup."""

    n_train_docs: int = 251
    n_test_docs: int = 98
    catalog_size: int = 309
    avg_kps_per_doc: int = 45
    seed: int = 0
    distractor_density: float = 2.0

    def __post_init__(self):
        for name in ("n_train_docs", "n_test_docs", "catalog_size", "avg_kps_per_doc"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.avg_kps_per_doc > self.catalog_size:
            raise ValueError("avg_kps_per_doc must be <= catalog_size")
        if self.distractor_density < 0:
            raise ValueError("distractor_density must be >= 0")


@dataclass
class GeneratedCorpus:
    documents_train: dict[str, str]
    documents_test: dict[str, str]
    catalog: list[KnowledgePoint]
    annotations_train: list[Annotation]
    annotations_test: list[Annotation]
    manifest: dict = field(default_factory=dict)

    @property
    def documents(self) -> dict[str, str]:
        merged = dict(self.documents_train)
        merged.update(self.documents_test)
        return merged


def _keyed_rng(seed: int, *parts: str) -> random.Random:
    payload = "\x1f".join([str(seed), *parts]).encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


def _topic(kp_index: int) -> str:
    subject = _SUBJECTS[kp_index // _N_ASPECTS]
    aspect = _ASPECTS[kp_index % _N_ASPECTS]
    return subject + aspect


def make_catalog(catalog_size: int) -> list[KnowledgePoint]:
    """The knowledge-point catalog backing both splits."""
    if catalog_size > MAX_CATALOG_SIZE:
        raise TemplateExhaustion(
            f"catalog_size {catalog_size} exceeds template capacity {MAX_CATALOG_SIZE}"
        )
    width = max(3, len(str(catalog_size)))
    return [
        KnowledgePoint(
            kp_id=f"kp-{i + 1:0{width}d}",
            question=QUESTION_TEMPLATE.format(topic=_topic(i)),
        )
        for i in range(catalog_size)
    ]


def _answer_value(seed: int, document_id: str, kp_id: str) -> str:
    payload = f"{seed}\x1fvalue\x1f{document_id}\x1f{kp_id}".encode("utf-8")
    number = int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")
    digits = f"{number % 10**10:010d}"
    unit = VALUE_UNITS[(number // 10**10) % len(VALUE_UNITS)]
    return digits + unit


def _make_document(
    spec: CorpusSpec,
    document_id: str,
    catalog: list[KnowledgePoint],
) -> tuple[str, list[Annotation]]:
    rng = _keyed_rng(spec.seed, "doc", document_id)
    p_plant = spec.avg_kps_per_doc / spec.catalog_size
    planted = [i for i in range(len(catalog)) if rng.random() < p_plant]
    if not planted:
        planted = [rng.randrange(len(catalog))]

    annotations: list[Annotation] = []
    paragraphs: list[str] = []
    for kp_index in planted:
        kp = catalog[kp_index]
        value = _answer_value(spec.seed, document_id, kp.kp_id)
        answer = ANSWER_TEMPLATE.format(topic=_topic(kp_index), value=value)
        lead = rng.choice(FILLER_SENTENCES)
        trail = rng.choice(FILLER_SENTENCES)
        paragraphs.append(lead + answer + trail)
        annotations.append(Annotation(document_id, kp.kp_id, answer))

    for _ in range(round(spec.distractor_density * len(planted))):
        if rng.random() < 0.5:
            sentence = DISTRACTOR_TEMPLATES[0].format(
                subject=_SUBJECTS[rng.randrange(_MAX_SUBJECTS)],
                extra_aspect=rng.choice(_EXTRA_ASPECTS),
            )
        else:
            sentence = DISTRACTOR_TEMPLATES[1].format(
                extra_subject=rng.choice(_EXTRA_SUBJECTS),
                aspect=_ASPECTS[rng.randrange(_N_ASPECTS)],
            )
        paragraphs.append(rng.choice(FILLER_SENTENCES) + sentence)

    rng.shuffle(paragraphs)

    blocks = [TITLE_TEMPLATE.format(document_id=document_id)]
    section = 0
    cursor = 0
    while cursor < len(paragraphs):
        section += 1
        blocks.append(SECTION_HEADING.format(n=section))
        take = min(rng.randint(3, 6), len(paragraphs) - cursor)
        body = paragraphs[cursor:cursor + take]
        cursor += take
        if take >= 4 and rng.random() < 0.5:
            half = take // 2
            blocks.extend(body[:half])
            blocks.append(SUBSECTION_HEADING.format(n=section, m=1))
            blocks.extend(body[half:])
        else:
            blocks.extend(body)
    return "\n\n".join(blocks) + "\n", annotations


def generate_corpus(spec: CorpusSpec) -> GeneratedCorpus:
    """Generate documents, catalog, and gold annotations for both splits."""
    catalog = make_catalog(spec.catalog_size)
    splits: dict[str, tuple[dict[str, str], list[Annotation]]] = {}
    for split, n_docs in (("train", spec.n_train_docs), ("test", spec.n_test_docs)):
        width = max(4, len(str(n_docs)))
        documents: dict[str, str] = {}
        annotations: list[Annotation] = []
        for i in range(n_docs):
            document_id = f"{split}-{i + 1:0{width}d}"
            text, doc_annotations = _make_document(spec, document_id, catalog)
            documents[document_id] = text
            annotations.extend(doc_annotations)
        splits[split] = (documents, annotations)

    documents_train, annotations_train = splits["train"]
    documents_test, annotations_test = splits["test"]
    manifest = {
        "spec": asdict(spec),
        "catalog_size": len(catalog),
        "n_train_documents": len(documents_train),
        "n_test_documents": len(documents_test),
        "n_train_annotations": len(annotations_train),
        "n_test_annotations": len(annotations_test),
        "train_document_ids": sorted(documents_train),
        "test_document_ids": sorted(documents_test),
    }
    return GeneratedCorpus(
        documents_train=documents_train,
        documents_test=documents_test,
        catalog=catalog,
        annotations_train=annotations_train,
        annotations_test=annotations_test,
        manifest=manifest,
    )
