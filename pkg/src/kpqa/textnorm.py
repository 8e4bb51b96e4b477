"""NFKC-based text matching that maps normalized offsets back to the original.

Clause documents mix full-width and half-width forms (２年 vs 2年), so all
substring matching in the toolkit goes through NFKC normalization. Offsets,
however, must always refer to the original, un-normalized string: a QA example
is only valid if slicing its context at the reported offsets reproduces the
answer text byte for byte.

Normalization is applied character by character. That keeps a stable index
mapping from normalized positions back to original positions even when a
single character expands (e.g. ㎞ -> km), at the cost of ignoring the few
multi-character compositions full-string NFKC would perform. Both sides of
every comparison use the same projection, so matching stays consistent.
"""

from __future__ import annotations

import re
import unicodedata

_WHITESPACE = re.compile(r"\s+")


def nfkc_chars(text: str) -> str:
    """NFKC-normalize ``text`` one character at a time."""
    return "".join(unicodedata.normalize("NFKC", ch) for ch in text)


def fold_answer(text: str) -> str:
    """Canonical form used for answer equality: NFKC plus whitespace removal."""
    return _WHITESPACE.sub("", nfkc_chars(text))


class NormalizedView:
    """A normalized projection of a string that can locate substrings.

    ``find`` searches in normalized space and reports the smallest span of the
    *original* string that covers the match.
    """

    def __init__(self, text: str):
        self.original = text
        parts: list[str] = []
        to_orig: list[int] = []
        for i, ch in enumerate(text):
            norm = unicodedata.normalize("NFKC", ch)
            parts.append(norm)
            to_orig.extend([i] * len(norm))
        self.normalized = "".join(parts)
        self._to_orig = to_orig

    def find(self, needle: str, start: int = 0) -> tuple[int, int] | None:
        """Return the original (start, end) of the first match, or None.

        ``start`` is an offset into the *normalized* projection, used to scan
        for successive occurrences.
        """
        norm_needle = nfkc_chars(needle)
        if not norm_needle:
            return None
        pos = self.normalized.find(norm_needle, start)
        if pos < 0:
            return None
        first = self._to_orig[pos]
        last = self._to_orig[pos + len(norm_needle) - 1]
        return first, last + 1

    def contains(self, needle: str) -> bool:
        return self.find(needle) is not None

    def count(self, needle: str) -> int:
        """Number of non-overlapping occurrences, in normalized space."""
        norm_needle = nfkc_chars(needle)
        if not norm_needle:
            return 0
        count = 0
        pos = self.normalized.find(norm_needle)
        while pos >= 0:
            count += 1
            pos = self.normalized.find(norm_needle, pos + len(norm_needle))
        return count
