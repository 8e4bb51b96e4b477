"""Precision/recall/F1 over extraction results versus gold annotations.

Counting runs over the full (document, knowledge point) cross product, but a
pair where both gold and prediction are absent contributes to nothing: most
knowledge points simply do not occur in a given clause document and those
correct abstentions are ignored.

* precision — of the non-null predictions, the fraction equal to gold;
* recall — of the gold non-null knowledge points, the fraction recovered;
* f1 — harmonic mean of the two.

Answer equality is exact after NFKC normalization and whitespace removal.
The report carries both pooled (micro) numbers, which the count fields and
the invariants refer to, and the per-document macro averages the headline
table shows. All 0/0 ratios are reported as 0 with an explicit flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .dataset import Annotation, KnowledgePoint
from .errors import MissingDocument, UnknownKnowledgePoint
from .extraction import ExtractionResult
from .textnorm import fold_answer


def match_answer(predicted: str, gold: str) -> bool:
    """Exact match after NFKC normalization and whitespace removal."""
    return fold_answer(predicted) == fold_answer(gold)


def f1(p: float, r: float) -> float:
    """Harmonic mean 2pr/(p+r); 0 when p + r = 0."""
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


@dataclass
class EvalReport:
    """Counts plus derived metrics; micro fields satisfy the count identities."""

    n_predicted_nonnull: int
    n_correct_nonnull: int
    n_gold_nonnull: int
    n_recalled: int
    precision: float
    recall: float
    f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    n_documents: int
    precision_undefined: bool = False
    recall_undefined: bool = False
    f1_undefined: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _ratio(numerator: int, denominator: int) -> tuple[float, bool]:
    if denominator == 0:
        return 0.0, True
    return numerator / denominator, False


def evaluate(
    results: Sequence[ExtractionResult],
    gold: Sequence[Annotation],
    catalog: Sequence[KnowledgePoint],
) -> EvalReport:
    """Score extraction results against gold annotations.

    Document ids must line up exactly between ``results`` and ``gold``;
    a mismatch raises :class:`MissingDocument`.
    """
    known = {kp.kp_id for kp in catalog}
    for ann in gold:
        if ann.kp_id not in known:
            raise UnknownKnowledgePoint(f"gold annotation references unknown kp_id {ann.kp_id!r}")

    result_docs = [r.document_id for r in results]
    if len(set(result_docs)) != len(result_docs):
        raise ValueError("duplicate document_id in results")
    gold_docs = {ann.document_id for ann in gold}
    missing_results = gold_docs - set(result_docs)
    missing_gold = set(result_docs) - gold_docs
    if missing_results or missing_gold:
        raise MissingDocument(
            f"documents without results: {sorted(missing_results)}; "
            f"documents without gold: {sorted(missing_gold)}"
        )

    gold_by_key = {(ann.document_id, ann.kp_id): ann.answer_text for ann in gold}

    totals = [0, 0, 0, 0]  # predicted, correct, gold, recalled
    macro_p: list[float] = []
    macro_r: list[float] = []
    macro_f: list[float] = []
    for result in results:
        counts = [0, 0, 0, 0]
        for kp in catalog:
            predicted = result.answers.get(kp.kp_id)
            gold_answer = gold_by_key.get((result.document_id, kp.kp_id))
            if predicted is not None:
                counts[0] += 1
                if gold_answer is not None and match_answer(predicted.answer_text, gold_answer):
                    counts[1] += 1
            if gold_answer is not None:
                counts[2] += 1
                if predicted is not None and match_answer(predicted.answer_text, gold_answer):
                    counts[3] += 1
        for i, value in enumerate(counts):
            totals[i] += value
        doc_p, _ = _ratio(counts[1], counts[0])
        doc_r, _ = _ratio(counts[3], counts[2])
        macro_p.append(doc_p)
        macro_r.append(doc_r)
        macro_f.append(f1(doc_p, doc_r))

    precision, p_undef = _ratio(totals[1], totals[0])
    recall, r_undef = _ratio(totals[3], totals[2])
    n_docs = len(results)
    return EvalReport(
        n_predicted_nonnull=totals[0],
        n_correct_nonnull=totals[1],
        n_gold_nonnull=totals[2],
        n_recalled=totals[3],
        precision=precision,
        recall=recall,
        f1=f1(precision, recall),
        macro_precision=sum(macro_p) / n_docs if n_docs else 0.0,
        macro_recall=sum(macro_r) / n_docs if n_docs else 0.0,
        macro_f1=sum(macro_f) / n_docs if n_docs else 0.0,
        n_documents=n_docs,
        precision_undefined=p_undef,
        recall_undefined=r_undef,
        f1_undefined=precision + recall == 0,
    )


def format_report(report: EvalReport) -> str:
    """Human-readable P/R/F1 table, macro averages first."""
    rows = [
        ("macro (per-document avg)", report.macro_precision, report.macro_recall, report.macro_f1),
        ("micro (pooled counts)", report.precision, report.recall, report.f1),
    ]
    lines = [f"{'':28s}{'P':>9s}{'R':>9s}{'F1':>9s}"]
    for label, p, r, f in rows:
        lines.append(f"{label:28s}{p:>8.2%} {r:>8.2%} {f:>8.2%}")
    lines.append(
        f"counts: predicted={report.n_predicted_nonnull} correct={report.n_correct_nonnull} "
        f"gold={report.n_gold_nonnull} recalled={report.n_recalled} "
        f"documents={report.n_documents}"
    )
    return "\n".join(lines)
