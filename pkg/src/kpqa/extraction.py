"""Per-document knowledge-point extraction over chunked segments.

Every catalog question is asked against every segment of the document
(exactly once per pair). Predictions whose span score does not beat the null
score by more than ``tau`` are discarded; among the survivors the
highest-scoring span wins, with ties broken by lowest segment index, then
earliest start offset. A knowledge point with no surviving prediction is
absent from the result — that is the abstention decision.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from sklearn.base import BaseEstimator

from .chunking import DEFAULT_SEGMENT_LIMIT, Segment, chunk
from .dataset import KnowledgePoint
from .errors import ExtractionAborted, ReaderUnavailable
from .readers import SpanReader


@dataclass(frozen=True)
class ExtractedAnswer:
    """The winning span for one knowledge point."""

    answer_text: str
    segment_index: int
    score: float


@dataclass
class ExtractionResult:
    """Answers found in one document, keyed by kp_id; absent means abstained."""

    document_id: str
    answers: dict[str, ExtractedAnswer] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "document_id": self.document_id,
            "answers": {
                kp_id: {
                    "answer_text": ans.answer_text,
                    "segment_index": ans.segment_index,
                    "score": ans.score,
                }
                for kp_id, ans in self.answers.items()
            },
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ExtractionResult":
        return cls(
            document_id=raw["document_id"],
            answers={
                kp_id: ExtractedAnswer(
                    answer_text=entry["answer_text"],
                    segment_index=entry["segment_index"],
                    score=entry["score"],
                )
                for kp_id, entry in raw["answers"].items()
            },
        )


def _best_for_kp(
    kp: KnowledgePoint, segments: Sequence[Segment], reader: SpanReader, tau: float
) -> ExtractedAnswer | None:
    best_key: tuple[float, int, int] | None = None
    best: ExtractedAnswer | None = None
    for segment in segments:
        pred = reader.read_span(kp.question, segment.text)
        # an empty span is the reader's own abstention and can never win
        if pred.is_null or pred.score - pred.null_score <= tau:
            continue
        key = (-pred.score, segment.index, pred.start)
        if best_key is None or key < best_key:
            best_key = key
            best = ExtractedAnswer(pred.answer_text, segment.index, pred.score)
    return best


def extract(
    document_text: str,
    catalog: Sequence[KnowledgePoint],
    reader: SpanReader,
    limit: int = DEFAULT_SEGMENT_LIMIT,
    tau: float = 0.0,
    document_id: str = "",
    n_workers: int = 1,
) -> ExtractionResult:
    """Run every knowledge point against every segment and pick the winners.

    Raises :class:`ExtractionAborted` (carrying the completed knowledge
    points) if the reader becomes unavailable mid-document; a reader failure
    is never silently treated as abstention.
    """
    if not catalog:
        raise ValueError("catalog must be non-empty")
    segments = chunk(document_text, limit)
    result = ExtractionResult(document_id=document_id)

    if n_workers <= 1:
        for kp in catalog:
            try:
                best = _best_for_kp(kp, segments, reader, tau)
            except ReaderUnavailable as exc:
                raise ExtractionAborted(
                    f"reader failed on document {document_id!r} at kp {kp.kp_id!r}",
                    partial=result,
                    cause=exc,
                ) from exc
            if best is not None:
                result.answers[kp.kp_id] = best
        return result

    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        futures = {kp.kp_id: pool.submit(_best_for_kp, kp, segments, reader, tau) for kp in catalog}
        failure: ReaderUnavailable | None = None
        for kp in catalog:
            future = futures[kp.kp_id]
            try:
                best = future.result()
            except ReaderUnavailable as exc:
                failure = failure or exc
                continue
            if best is not None:
                result.answers[kp.kp_id] = best
        if failure is not None:
            raise ExtractionAborted(
                f"reader failed on document {document_id!r}",
                partial=result,
                cause=failure,
            ) from failure
    return result


class KnowledgePointExtractor(BaseEstimator):
    """Estimator facade: configure once, ``predict`` over many documents."""

    def __init__(
        self,
        reader: SpanReader | None = None,
        catalog: Sequence[KnowledgePoint] | None = None,
        limit: int = DEFAULT_SEGMENT_LIMIT,
        tau: float = 0.0,
        n_workers: int = 1,
    ):
        self.reader = reader
        self.catalog = catalog
        self.limit = limit
        self.tau = tau
        self.n_workers = n_workers

    def fit(self, X=None, y=None):
        return self

    def extract_document(self, document_text: str, document_id: str = "") -> ExtractionResult:
        if self.reader is None or not self.catalog:
            raise ValueError("reader and catalog must be set before extraction")
        return extract(
            document_text,
            self.catalog,
            self.reader,
            limit=self.limit,
            tau=self.tau,
            document_id=document_id,
            n_workers=self.n_workers,
        )

    def predict(self, documents: Mapping[str, str]) -> list[ExtractionResult]:
        return [
            self.extract_document(text, document_id)
            for document_id, text in documents.items()
        ]
