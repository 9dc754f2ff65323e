"""Exact-string-match evaluation: per-sample precision/recall/F1 and
dataset-level aggregation.

Matching is one-to-one over multisets after whitespace normalization and
case-sensitive (citations are verbatim document text, so casing carries
signal).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .textkit import normalize

__all__ = ["PrfScore", "exact_match_prf", "f1", "aggregate_report"]


@dataclass(frozen=True)
class PrfScore:
    precision: float
    recall: float
    f1: float
    n_pred: int
    n_gt: int
    n_matched: int


def f1(p: float, r: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if p + r == 0:
        return 0.0
    return 2.0 * p * r / (p + r)


def exact_match_prf(c_pred: list[str], c_gt: list[str]) -> PrfScore:
    """Score predicted citations against ground truth by exact string match.

    Each ground-truth citation can be consumed at most once, so duplicate
    predictions match at most the available multiplicity.  Two empty lists
    agree perfectly.
    """
    pred = Counter(normalize(c) for c in c_pred)
    gt = Counter(normalize(c) for c in c_gt)
    matched = sum((pred & gt).values())
    n_pred, n_gt = len(c_pred), len(c_gt)
    if n_pred == 0 and n_gt == 0:
        return PrfScore(1.0, 1.0, 1.0, 0, 0, 0)
    p = matched / n_pred if n_pred else 0.0
    r = matched / n_gt if n_gt else 0.0
    # Computed from the counts (algebraically 2pr/(p+r)) so the result is the
    # correctly rounded quotient rather than a product of rounded ratios.
    f = 2.0 * matched / (n_pred + n_gt)
    return PrfScore(p, r, f, n_pred, n_gt, matched)


def aggregate_report(
    per_sample: list[PrfScore],
    dataset_labels: list[str],
    micro_overall: bool = False,
) -> list[dict]:
    """Mean P/R/F1 per dataset label plus an Overall row.

    Overall is the unweighted mean across dataset means (datasets differ in
    size); pass ``micro_overall=True`` to average over samples instead.
    Dataset rows keep first-appearance order.
    """
    if not per_sample:
        raise ValueError("aggregate_report needs at least one sample")
    if len(per_sample) != len(dataset_labels):
        raise ValueError("per_sample and dataset_labels must align")
    by_label: dict[str, list[PrfScore]] = {}
    for score, label in zip(per_sample, dataset_labels):
        by_label.setdefault(label, []).append(score)

    def means(scores: list[PrfScore]) -> tuple[float, float, float]:
        n = len(scores)
        return (
            sum(s.precision for s in scores) / n,
            sum(s.recall for s in scores) / n,
            sum(s.f1 for s in scores) / n,
        )

    rows = []
    for label, scores in by_label.items():
        p, r, f = means(scores)
        rows.append(
            {"dataset": label, "n": len(scores), "precision": p, "recall": r, "f1": f}
        )
    if micro_overall:
        p, r, f = means(per_sample)
    else:
        k = len(rows)
        p = sum(row["precision"] for row in rows) / k
        r = sum(row["recall"] for row in rows) / k
        f = sum(row["f1"] for row in rows) / k
    rows.append(
        {"dataset": "Overall", "n": len(per_sample), "precision": p, "recall": r, "f1": f}
    )
    return rows
