"""Sentence splitting and size-bounded segmentation.

Prediction-time contexts are built by cutting a document into segments of
roughly ``limit`` characters without ever breaking a sentence: whole sentences
are packed greedily, and a sentence longer than the limit becomes its own
oversize segment. Segments are disjoint and cover the source exactly, so the
concatenation of all segment texts reproduces the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from sklearn.base import BaseEstimator

DEFAULT_SEGMENT_LIMIT = 300

# Sentence terminators (kept with their sentence). Newlines end sentences too,
# so segment boundaries never jump across paragraph breaks mid-sentence.
SENTENCE_TERMINATORS = frozenset("。！？；!?;\n")

# Closing quotes/brackets directly after a terminator attach to the sentence
# they close instead of opening a new one-character sentence.
TRAILING_CLOSERS = frozenset("」』”’》〉）】›\"')]}")


@dataclass(frozen=True)
class Segment:
    """A contiguous slice of the source document."""

    text: str
    start_offset: int
    index: int


def split_sentences(text: str) -> list[tuple[str, int]]:
    """Split ``text`` into sentences, returning (sentence, offset) pairs.

    A sentence runs up to and including a maximal run of terminators plus any
    trailing closing quotes/brackets. Concatenating the sentences reproduces
    ``text`` exactly.
    """
    sentences: list[tuple[str, int]] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in SENTENCE_TERMINATORS:
            j = i + 1
            while j < n and (text[j] in SENTENCE_TERMINATORS or text[j] in TRAILING_CLOSERS):
                j += 1
            sentences.append((text[start:j], start))
            start = j
            i = j
        else:
            i += 1
    if start < n:
        sentences.append((text[start:], start))
    return sentences


def chunk(text: str, limit: int = DEFAULT_SEGMENT_LIMIT) -> list[Segment]:
    """Pack whole sentences into segments of at most ``limit`` characters.

    The limit counts Unicode code points. A sentence that would overflow the
    current segment starts a new one; a single sentence longer than the limit
    is emitted as one oversize segment rather than being split.
    """
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    segments: list[Segment] = []
    seg_start = 0
    seg_len = 0
    for sentence, offset in split_sentences(text):
        if seg_len and seg_len + len(sentence) > limit:
            segments.append(Segment(text[seg_start:offset], seg_start, len(segments)))
            seg_start = offset
            seg_len = 0
        seg_len += len(sentence)
    if seg_len:
        segments.append(Segment(text[seg_start:], seg_start, len(segments)))
    return segments


class SentenceChunker(BaseEstimator):
    """Stateless transformer wrapping :func:`chunk` for pipeline use."""

    def __init__(self, limit: int = DEFAULT_SEGMENT_LIMIT):
        self.limit = limit

    def fit(self, X=None, y=None):
        return self

    def chunk(self, text: str) -> list[Segment]:
        return chunk(text, self.limit)

    def transform(self, X: Iterable[str]) -> list[list[Segment]]:
        return [chunk(text, self.limit) for text in X]
