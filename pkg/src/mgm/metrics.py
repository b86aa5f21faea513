"""External cluster-quality metrics against ground-truth labels.

All five metrics operate on two label vectors of equal length. Predicted and
true labels may use arbitrary hashable values; only the induced partitions
matter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import LengthMismatchError

__all__ = [
    "EvaluationReport",
    "accuracy",
    "nmi",
    "ari",
    "purity",
    "avg_purity",
    "evaluate",
]


@dataclass(frozen=True)
class EvaluationReport:
    acc: float
    nmi: float
    ari: float
    purity: float
    avg_purity: float

    def to_dict(self) -> dict[str, float]:
        return {
            "acc": self.acc,
            "nmi": self.nmi,
            "ari": self.ari,
            "purity": self.purity,
            "avg_purity": self.avg_purity,
        }


def _contingency(pred, truth) -> np.ndarray:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.ndim != 1 or truth.ndim != 1:
        raise LengthMismatchError("label vectors must be 1-d")
    if pred.size == 0 or truth.size == 0:
        raise LengthMismatchError("label vectors must be nonempty")
    if pred.size != truth.size:
        raise LengthMismatchError(
            f"label vectors differ in length: {pred.size} vs {truth.size}"
        )
    _, pred_codes = np.unique(pred, return_inverse=True)
    _, truth_codes = np.unique(truth, return_inverse=True)
    table = np.zeros((pred_codes.max() + 1, truth_codes.max() + 1), dtype=np.int64)
    np.add.at(table, (pred_codes, truth_codes), 1)
    return table


def accuracy(pred, truth) -> float:
    """Fraction of samples correct under the best one-to-one relabeling,
    found by solving the assignment problem on the contingency table."""
    table = _contingency(pred, truth)
    rows, cols = linear_sum_assignment(-table)
    return float(table[rows, cols].sum() / table.sum())


def nmi(pred, truth) -> float:
    """Mutual information normalized by the geometric mean of the entropies.

    Both partitions trivial (single cluster) gives 1.0; exactly one trivial
    partition gives 0.0. Natural logarithms throughout.
    """
    table = _contingency(pred, truth).astype(float)
    total = table.sum()
    p_rows = table.sum(axis=1) / total
    p_cols = table.sum(axis=0) / total
    h_pred = float(-np.sum(p_rows[p_rows > 0] * np.log(p_rows[p_rows > 0])))
    h_truth = float(-np.sum(p_cols[p_cols > 0] * np.log(p_cols[p_cols > 0])))
    if h_pred == 0.0 and h_truth == 0.0:
        return 1.0
    if h_pred == 0.0 or h_truth == 0.0:
        return 0.0
    joint = table / total
    outer = np.outer(p_rows, p_cols)
    mask = joint > 0
    mi = float(np.sum(joint[mask] * np.log(joint[mask] / outer[mask])))
    mi = max(mi, 0.0)
    return min(mi / np.sqrt(h_pred * h_truth), 1.0)


def _pair_count(counts: np.ndarray) -> int:
    counts = counts.astype(np.int64)
    return int(np.sum(counts * (counts - 1) // 2))


def ari(pred, truth) -> float:
    """Adjusted Rand index via pair counting.

    When the expected index equals the maximum index the adjustment is
    undefined; that happens only for edge partitions, where the value is 1.0
    if the partitions are identical up to relabeling and 0.0 otherwise.
    """
    table = _contingency(pred, truth)
    n = int(table.sum())
    index = _pair_count(table.ravel())
    sum_rows = _pair_count(table.sum(axis=1))
    sum_cols = _pair_count(table.sum(axis=0))
    total_pairs = n * (n - 1) // 2
    expected = sum_rows * sum_cols / total_pairs if total_pairs else 0.0
    max_index = (sum_rows + sum_cols) / 2.0
    if max_index == expected:
        identical = np.all((table > 0).sum(axis=0) == 1) and np.all(
            (table > 0).sum(axis=1) == 1
        )
        return 1.0 if identical else 0.0
    return float((index - expected) / (max_index - expected))


def purity(pred, truth) -> float:
    """Size-weighted purity: each predicted cluster contributes its majority
    count; the total is divided by the number of samples."""
    table = _contingency(pred, truth)
    return float(table.max(axis=1).sum() / table.sum())


def avg_purity(pred, truth) -> float:
    """Unweighted mean of per-cluster purity, so small clusters count as
    much as large ones."""
    table = _contingency(pred, truth)
    sizes = table.sum(axis=1)
    return float(np.mean(table.max(axis=1) / sizes))


def evaluate(pred, truth) -> EvaluationReport:
    return EvaluationReport(
        acc=accuracy(pred, truth),
        nmi=nmi(pred, truth),
        ari=ari(pred, truth),
        purity=purity(pred, truth),
        avg_purity=avg_purity(pred, truth),
    )
