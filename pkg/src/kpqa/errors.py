"""Exception types shared across the toolkit."""

from __future__ import annotations


class KpqaError(Exception):
    """Base class for all domain errors raised by kpqa."""


class MalformedHeading(KpqaError):
    """A heading marker with no heading text was found while parsing."""

    def __init__(self, line_number: int, line: str):
        super().__init__(f"heading marker with no text at line {line_number}: {line!r}")
        self.line_number = line_number
        self.line = line


class UnknownKnowledgePoint(KpqaError):
    """An annotation references a kp_id that is not in the catalog."""


class MissingDocument(KpqaError):
    """Document ids do not line up between two inputs that must align."""


class ReaderUnavailable(KpqaError):
    """An external reader process or endpoint cannot be reached."""


class MalformedResponse(KpqaError):
    """An external reader sent a response that violates the span contract."""


class ExtractionAborted(KpqaError):
    """A reader failure interrupted extraction.

    Carries the results for the knowledge points that completed before the
    failure, so callers can distinguish "model abstained" from "infrastructure
    died halfway through".
    """

    def __init__(self, message: str, partial, cause: Exception | None = None):
        super().__init__(message)
        self.partial = partial
        self.cause = cause


class TemplateExhaustion(KpqaError):
    """The requested catalog size exceeds what the template bank can produce."""
