"""Document-tree parsing and answer-bearing context location.

A clause document is read as a tree: the main title is the root, every
deeper heading becomes a child of the nearest shallower heading, and each
body line becomes a leaf under the heading currently in scope. Locating the
leaf that contains a gold answer string gives the training context for that
answer.

Two heading conventions are supported:

* ``markdown-headings``: lines starting with 1..6 ``#`` characters followed
  by whitespace and a title.
* ``plain``: numbered-outline prefixes matched against a fixed regex table
  (第x章/第x节/第x条 and dotted numbers such as 1. / 1.1 / 1.1.1). The whole
  line is the heading text.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from sklearn.base import BaseEstimator

from .errors import MalformedHeading
from .textnorm import NormalizedView

logger = logging.getLogger(__name__)

MARKDOWN = "markdown-headings"
PLAIN = "plain"
HEADING_FORMATS = (MARKDOWN, PLAIN)

_MD_HEADING = re.compile(r"^(#{1,6})\s+(.*\S)\s*$")
_MD_MARKER_ONLY = re.compile(r"^#{1,6}\s*$")

_CJK_NUM = "0-9０-９零一二三四五六七八九十百千"
# Fixed rule table for the ``plain`` convention: (level, pattern, text required
# beyond the marker). Deeper dotted forms are listed first so "1.1.1" is not
# consumed by the "1." rule.
_PLAIN_RULES: list[tuple[int, re.Pattern[str], bool]] = [
    (1, re.compile(rf"^第[{_CJK_NUM}]+[章编](?![{_CJK_NUM}])"), False),
    (2, re.compile(rf"^第[{_CJK_NUM}]+节(?![{_CJK_NUM}])"), False),
    (3, re.compile(rf"^第[{_CJK_NUM}]+条(?![{_CJK_NUM}])"), False),
    (6, re.compile(r"^[0-9０-９]{1,3}\.[0-9０-９]{1,3}\.[0-9０-９]{1,3}[.、．]?\s*"), True),
    (5, re.compile(r"^[0-9０-９]{1,3}\.[0-9０-９]{1,3}[、．]?\s*"), True),
    (4, re.compile(r"^[0-9０-９]{1,3}[.、．]\s*"), True),
]


@dataclass
class Node:
    """One tree node: a heading (with children) or a leaf (with text)."""

    kind: str  # "heading" | "leaf"
    text: str
    level: int = 0
    char_offset: int = 0
    children: list["Node"] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return self.kind == "leaf"


@dataclass(frozen=True)
class LeafContext:
    """A leaf's text plus the heading path that scopes it."""

    leaf_text: str
    path: tuple[str, ...]
    char_offset: int


@dataclass
class DocumentTree:
    """Heading-rooted hierarchy of one document."""

    root: Node
    source_id: str = ""
    synthetic_root: bool = False

    def leaves(self) -> Iterator[LeafContext]:
        """Yield all leaves in source order with their heading paths."""

        def walk(node: Node, path: tuple[str, ...]) -> Iterator[LeafContext]:
            for child in node.children:
                if child.is_leaf:
                    yield LeafContext(child.text, path, child.char_offset)
                else:
                    yield from walk(child, path + (child.text,))

        root_path = () if self.synthetic_root else (self.root.text,)
        return walk(self.root, root_path)

    def iter_nodes(self) -> Iterator[Node]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def _match_heading(content: str, fmt: str, line_number: int) -> tuple[int, str] | None:
    """Return (level, title) if the line is a heading, else None."""
    if fmt == MARKDOWN:
        if _MD_MARKER_ONLY.match(content):
            raise MalformedHeading(line_number, content)
        match = _MD_HEADING.match(content)
        if match:
            return len(match.group(1)), match.group(2)
        return None
    for level, pattern, needs_text in _PLAIN_RULES:
        match = pattern.match(content)
        if match:
            if needs_text and not content[match.end():].strip():
                raise MalformedHeading(line_number, content)
            return level, content.strip()
    return None


def parse_document(text: str, format: str = MARKDOWN, source_id: str = "") -> DocumentTree:
    """Parse ``text`` into a :class:`DocumentTree`.

    Every non-blank, non-heading line becomes a leaf (blank lines and heading
    lines are the paragraph boundaries). The first line becomes the root when
    it is a heading strictly shallower than every other heading; otherwise a
    synthetic root is used.
    """
    if format not in HEADING_FORMATS:
        raise ValueError(f"format must be one of {HEADING_FORMATS}, got {format!r}")

    # items: ("h", level, title, offset) or ("p", text, offset)
    items: list[tuple] = []
    offset = 0
    for line_number, line in enumerate(text.splitlines(keepends=True), start=1):
        content = line.rstrip("\r\n")
        if content.strip():
            heading = _match_heading(content, format, line_number)
            if heading is not None:
                items.append(("h", heading[0], heading[1], offset))
            else:
                items.append(("p", content, offset))
        offset += len(line)

    heading_levels = [item[1] for item in items if item[0] == "h"]
    use_first_as_root = bool(
        items
        and items[0][0] == "h"
        and all(level > items[0][1] for level in heading_levels[1:])
    )
    if use_first_as_root:
        _, level, title, root_offset = items[0]
        root = Node("heading", title, level=level, char_offset=root_offset)
        rest = items[1:]
        synthetic = False
    else:
        root = Node("heading", "", level=0)
        rest = items
        synthetic = True

    stack = [root]
    for item in rest:
        if item[0] == "h":
            _, level, title, item_offset = item
            while len(stack) > 1 and stack[-1].level >= level:
                stack.pop()
            node = Node("heading", title, level=level, char_offset=item_offset)
            stack[-1].children.append(node)
            stack.append(node)
        else:
            _, leaf_text, item_offset = item
            stack[-1].children.append(Node("leaf", leaf_text, char_offset=item_offset))

    return DocumentTree(root=root, source_id=source_id, synthetic_root=synthetic)


def locate_answer_context(tree: DocumentTree, answer: str) -> LeafContext | None:
    """Find the first (source-order) leaf containing ``answer``.

    Matching is exact-substring after NFKC normalization of both sides. When
    the answer occurs in more than one place a warning is logged and the
    earliest leaf wins.
    """
    if not answer:
        raise ValueError("answer must be non-empty")
    first_hit: LeafContext | None = None
    total_occurrences = 0
    for leaf in tree.leaves():
        occurrences = NormalizedView(leaf.leaf_text).count(answer)
        if occurrences and first_hit is None:
            first_hit = leaf
        total_occurrences += occurrences
    if total_occurrences > 1:
        logger.warning(
            "answer %r occurs %d times in document %r; keeping the first leaf",
            answer, total_occurrences, tree.source_id,
        )
    return first_hit


class DocumentTreeParser(BaseEstimator):
    """Stateless transformer wrapping :func:`parse_document`."""

    def __init__(self, heading_format: str = MARKDOWN):
        self.heading_format = heading_format

    def fit(self, X=None, y=None):
        return self

    def parse(self, text: str, source_id: str = "") -> DocumentTree:
        return parse_document(text, self.heading_format, source_id)

    def transform(self, X: Iterable[str]) -> list[DocumentTree]:
        return [parse_document(text, self.heading_format) for text in X]
