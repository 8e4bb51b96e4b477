"""Span readers: the (question, context) -> span/score contract.

Every reader returns a :class:`SpanPrediction` with a best-span score and a
null score. The reader never decides abstention itself; the extractor
compares ``score - null_score`` against its threshold, so scores from one
reader must be comparable across contexts.

Three implementations ship in-tree:

* :class:`LexicalReader` — deterministic character-bigram overlap baseline.
* :class:`OracleReader` — returns the planted gold answer when present;
  used by tests and synthetic-corpus pipelines.
* :class:`ExternalProcessReader` — JSON-lines client for a trained reader
  running as a subprocess (one request/response object per line, matched by
  id, character offsets).
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .chunking import split_sentences
from .dataset import Annotation, KnowledgePoint
from .errors import MalformedResponse, ReaderUnavailable
from .textnorm import NormalizedView


@dataclass(frozen=True)
class SpanPrediction:
    """A reader's answer for one (question, context) pair.

    An empty ``answer_text`` means "no span here"; start/end are then absent.
    ``end`` is exclusive.
    """

    answer_text: str = ""
    start: int | None = None
    end: int | None = None
    score: float = 0.0
    null_score: float = 0.0

    @property
    def is_null(self) -> bool:
        return not self.answer_text


def validate_prediction(pred: SpanPrediction, context: str) -> SpanPrediction:
    """Check the span contract; raise :class:`MalformedResponse` on violation."""
    if not (math.isfinite(pred.score) and math.isfinite(pred.null_score)):
        raise MalformedResponse(f"non-finite scores: {pred.score}, {pred.null_score}")
    if pred.answer_text:
        if pred.start is None or pred.end is None:
            raise MalformedResponse("non-empty answer without offsets")
        if not 0 <= pred.start < pred.end <= len(context):
            raise MalformedResponse(f"offsets out of range: [{pred.start}, {pred.end})")
        if context[pred.start:pred.end] != pred.answer_text:
            raise MalformedResponse(
                f"context[{pred.start}:{pred.end}] != answer_text {pred.answer_text!r}"
            )
    elif pred.start is not None or pred.end is not None:
        raise MalformedResponse("empty answer with offsets")
    return pred


def _check_inputs(question: str, context: str) -> None:
    if not question.strip():
        raise ValueError("question must be non-empty")
    if not context.strip():
        raise ValueError("context must be non-empty")


class SpanReader(ABC):
    """Contract all readers satisfy."""

    @abstractmethod
    def read_span(self, question: str, context: str) -> SpanPrediction:
        """Predict the best span (or null) for the pair."""

    def read_spans(self, pairs: Sequence[tuple[str, str]]) -> list[SpanPrediction]:
        return [self.read_span(q, c) for q, c in pairs]

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@lru_cache(maxsize=4096)
def _bigrams(text: str) -> frozenset[str]:
    return frozenset(text[i:i + 2] for i in range(len(text) - 1))


@lru_cache(maxsize=4096)
def _context_sentences(context: str) -> tuple[tuple[int, int, frozenset[str]], ...]:
    """Sentence spans of a context with their bigram sets, whitespace-trimmed."""
    out = []
    for sentence, offset in split_sentences(context):
        core = sentence.strip()
        if not core:
            continue
        start = offset + (len(sentence) - len(sentence.lstrip()))
        out.append((start, start + len(core), _bigrams(core)))
    return tuple(out)


class LexicalReader(SpanReader):
    """Character-bigram overlap baseline.

    Scores each sentence of the context by the fraction of the question's
    character bigrams it contains; the best sentence is the answer span with
    that ratio as score and ``1 - score`` as null score. Zero overlap yields
    an empty prediction. Character bigrams (not words) keep this robust for
    unsegmented Chinese text.
    """

    def read_span(self, question: str, context: str) -> SpanPrediction:
        _check_inputs(question, context)
        question_bigrams = _bigrams(question.strip())
        if not question_bigrams:
            return SpanPrediction(null_score=1.0)
        best_ratio = 0.0
        best_span: tuple[int, int] | None = None
        for start, end, sentence_bigrams in _context_sentences(context):
            ratio = len(question_bigrams & sentence_bigrams) / len(question_bigrams)
            if ratio > best_ratio:
                best_ratio = ratio
                best_span = (start, end)
        if best_span is None:
            return SpanPrediction(null_score=1.0)
        start, end = best_span
        return SpanPrediction(
            answer_text=context[start:end],
            start=start,
            end=end,
            score=best_ratio,
            null_score=1.0 - best_ratio,
        )


def lexical_read_span(question: str, context: str) -> SpanPrediction:
    """Functional entry point for the lexical baseline."""
    return LexicalReader().read_span(question, context)


class OracleReader(SpanReader):
    """Test reader planted with the gold map.

    Knows, per question, every answer string planted anywhere in the corpus.
    If one of them occurs in the context (NFKC substring) the reader returns
    it with score 1.0; otherwise it abstains with null score 1.0.
    """

    def __init__(self, gold: Mapping[str, Iterable[str]]):
        self._gold = {q: sorted(set(answers)) for q, answers in gold.items()}

    @classmethod
    def from_gold(
        cls, catalog: Sequence[KnowledgePoint], annotations: Sequence[Annotation]
    ) -> "OracleReader":
        questions = {kp.kp_id: kp.question for kp in catalog}
        gold: dict[str, list[str]] = {}
        for ann in annotations:
            question = questions.get(ann.kp_id)
            if question is None:
                continue
            gold.setdefault(question, []).append(ann.answer_text)
        return cls(gold)

    def read_span(self, question: str, context: str) -> SpanPrediction:
        _check_inputs(question, context)
        view = NormalizedView(context)
        for answer in self._gold.get(question, ()):
            span = view.find(answer)
            if span is not None:
                start, end = span
                return SpanPrediction(
                    answer_text=context[start:end],
                    start=start,
                    end=end,
                    score=1.0,
                    null_score=0.0,
                )
        return SpanPrediction(null_score=1.0)


class ExternalProcessReader(SpanReader):
    """Client for a trained reader spoken to over JSON lines.

    Spawns ``command`` and exchanges one JSON object per line on its
    stdin/stdout: request ``{"id", "question", "context"}``, response
    ``{"id", "answer_text", "start", "end", "score", "null_score"}``.
    Responses may arrive out of order; they are re-associated by id.

    A lock serializes writes, so one instance may be shared across worker
    threads; each in-flight batch holds the lock until its responses arrive.
    """

    def __init__(self, command: str | Sequence[str]):
        self.command = command
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ReaderUnavailable(f"cannot spawn reader {argv!r}: {exc}") from exc
        self._lock = threading.Lock()
        self._next_id = 0

    def read_span(self, question: str, context: str) -> SpanPrediction:
        return self.read_spans([(question, context)])[0]

    def read_spans(self, pairs: Sequence[tuple[str, str]]) -> list[SpanPrediction]:
        for question, context in pairs:
            _check_inputs(question, context)
        with self._lock:
            ids: list[str] = []
            contexts: dict[str, str] = {}
            for question, context in pairs:
                request_id = str(self._next_id)
                self._next_id += 1
                ids.append(request_id)
                contexts[request_id] = context
                self._send({"id": request_id, "question": question, "context": context})
            received: dict[str, SpanPrediction] = {}
            while len(received) < len(ids):
                response = self._receive()
                request_id = response.get("id")
                if request_id not in contexts or request_id in received:
                    raise MalformedResponse(f"unexpected response id {request_id!r}")
                received[request_id] = self._to_prediction(response, contexts[request_id])
            return [received[request_id] for request_id in ids]

    def _send(self, obj: dict) -> None:
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(obj, ensure_ascii=False) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ReaderUnavailable(f"reader process closed stdin: {exc}") from exc

    def _receive(self) -> dict:
        assert self._proc.stdout is not None
        line = self._proc.stdout.readline()
        if not line:
            code = self._proc.poll()
            raise ReaderUnavailable(f"reader process ended (exit code {code})")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedResponse(f"response is not valid JSON: {line!r}") from exc
        if not isinstance(obj, dict):
            raise MalformedResponse(f"response is not an object: {line!r}")
        return obj

    @staticmethod
    def _to_prediction(response: dict, context: str) -> SpanPrediction:
        answer_text = response.get("answer_text", "")
        start = response.get("start")
        end = response.get("end")
        if not isinstance(answer_text, str):
            raise MalformedResponse(f"answer_text is not a string: {response!r}")
        if not all(isinstance(v, int) or v is None for v in (start, end)):
            raise MalformedResponse(f"offsets are not integers: {response!r}")
        try:
            pred = SpanPrediction(
                answer_text=answer_text,
                start=start,
                end=end,
                score=float(response.get("score", 0.0)),
                null_score=float(response.get("null_score", 0.0)),
            )
        except (TypeError, ValueError) as exc:
            raise MalformedResponse(f"bad response fields: {response!r}") from exc
        return validate_prediction(pred, context)

    def close(self) -> None:
        proc = getattr(self, "_proc", None)
        if proc is None:
            return
        for stream in (proc.stdin, proc.stdout):
            if stream is not None:
                try:
                    stream.close()
                except OSError:
                    pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


def external_read_span(command: str | Sequence[str], question: str, context: str) -> SpanPrediction:
    """One-shot convenience: spawn, query once, shut down."""
    with ExternalProcessReader(command) as reader:
        return reader.read_span(question, context)
