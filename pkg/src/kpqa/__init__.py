"""kpqa: knowledge-point extraction from clause documents via extractive QA."""

from .chunking import DEFAULT_SEGMENT_LIMIT, Segment, SentenceChunker, chunk, split_sentences
from .corpus import CorpusSpec, GeneratedCorpus, generate_corpus, make_catalog
from .dataset import (
    Annotation,
    KnowledgePoint,
    QADatasetBuilder,
    QAExample,
    SamplingPolicy,
    build_segment_dataset,
    build_tree_dataset,
    load_annotations,
    load_catalog,
    read_squad_json,
    write_squad_json,
)
from .doctree import (
    DocumentTree,
    DocumentTreeParser,
    LeafContext,
    Node,
    locate_answer_context,
    parse_document,
)
from .errors import (
    ExtractionAborted,
    KpqaError,
    MalformedHeading,
    MalformedResponse,
    MissingDocument,
    ReaderUnavailable,
    TemplateExhaustion,
    UnknownKnowledgePoint,
)
from .evaluation import EvalReport, evaluate, f1, match_answer
from .extraction import ExtractedAnswer, ExtractionResult, KnowledgePointExtractor, extract
from .readers import (
    ExternalProcessReader,
    LexicalReader,
    OracleReader,
    SpanPrediction,
    SpanReader,
    external_read_span,
    lexical_read_span,
    validate_prediction,
)

__version__ = "0.1.0"

__all__ = [
    "Annotation",
    "CorpusSpec",
    "DEFAULT_SEGMENT_LIMIT",
    "DocumentTree",
    "DocumentTreeParser",
    "EvalReport",
    "ExtractedAnswer",
    "ExtractionAborted",
    "ExtractionResult",
    "ExternalProcessReader",
    "GeneratedCorpus",
    "KnowledgePoint",
    "KnowledgePointExtractor",
    "KpqaError",
    "LeafContext",
    "LexicalReader",
    "MalformedHeading",
    "MalformedResponse",
    "MissingDocument",
    "Node",
    "OracleReader",
    "QADatasetBuilder",
    "QAExample",
    "ReaderUnavailable",
    "SamplingPolicy",
    "Segment",
    "SentenceChunker",
    "SpanPrediction",
    "SpanReader",
    "TemplateExhaustion",
    "UnknownKnowledgePoint",
    "build_segment_dataset",
    "build_tree_dataset",
    "chunk",
    "evaluate",
    "external_read_span",
    "extract",
    "f1",
    "generate_corpus",
    "lexical_read_span",
    "load_annotations",
    "load_catalog",
    "locate_answer_context",
    "make_catalog",
    "match_answer",
    "parse_document",
    "read_squad_json",
    "split_sentences",
    "validate_prediction",
    "write_squad_json",
]
