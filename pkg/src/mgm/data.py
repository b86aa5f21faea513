"""Loading and preprocessing of delimited sample-by-feature matrices.

Files may carry a header row of feature names and a leading column of sample
ids; both are detected from the first cells being non-numeric. A matrix
stored features-by-samples loads identically with orientation flipped.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DataError,
    LabelLengthMismatchError,
    NegativeValuesError,
    ParseError,
    RaggedRowsError,
)

__all__ = [
    "ExpressionMatrix",
    "load_matrix",
    "load_labels",
    "preprocess",
]


@dataclass(frozen=True)
class ExpressionMatrix:
    """An M x N matrix of finite floats with optional ids and labels."""

    values: np.ndarray
    sample_ids: tuple[str, ...] | None = None
    feature_ids: tuple[str, ...] | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DataError(f"matrix must be 2-d and nonempty, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("matrix contains non-finite values")
        m, n = values.shape
        if self.sample_ids is not None and len(self.sample_ids) != m:
            raise DataError(f"{len(self.sample_ids)} sample ids for {m} rows")
        if self.feature_ids is not None and len(self.feature_ids) != n:
            raise DataError(f"{len(self.feature_ids)} feature ids for {n} columns")
        if self.labels is not None and len(self.labels) != m:
            raise LabelLengthMismatchError(f"{len(self.labels)} labels for {m} samples")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def sample_count(self) -> int:
        return self.values.shape[0]

    @property
    def feature_count(self) -> int:
        return self.values.shape[1]


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _read_rows(path: Path, delimiter: str) -> list[list[str]]:
    try:
        with open(path, newline="") as handle:
            rows = [row for row in csv.reader(handle, delimiter=delimiter) if row]
    except OSError as err:
        raise DataError(f"cannot read {path}: {err}")
    if not rows:
        raise DataError(f"{path} is empty")
    return rows


def load_matrix(
    path: str | Path,
    fmt: str = "csv",
    orientation: str = "samples-as-rows",
    labels_path: str | Path | None = None,
) -> ExpressionMatrix:
    """Load a delimited matrix, detecting an optional header row and id column.

    fmt is "csv" or "tsv". orientation is "samples-as-rows" or
    "samples-as-columns"; the latter transposes after loading, swapping the
    roles of the detected ids. Parse failures report the 1-based (row,
    column) position in the file.
    """
    path = Path(path)
    if fmt not in ("csv", "tsv"):
        raise DataError(f"unknown format {fmt!r}; expected 'csv' or 'tsv'")
    if orientation not in ("samples-as-rows", "samples-as-columns"):
        raise DataError(
            f"unknown orientation {orientation!r}; expected "
            "'samples-as-rows' or 'samples-as-columns'"
        )
    rows = _read_rows(path, "," if fmt == "csv" else "\t")

    has_header = any(not _is_number(tok) for tok in rows[0][1:]) or (
        len(rows[0]) == 1 and not _is_number(rows[0][0])
    )
    body = rows[1:] if has_header else rows
    if not body:
        raise DataError(f"{path} has a header but no data rows")
    has_id_col = not _is_number(body[0][0])

    width = len(body[0])
    for offset, row in enumerate(body):
        if len(row) != width:
            row_no = offset + (2 if has_header else 1)
            raise RaggedRowsError(
                f"{path}: row {row_no} has {len(row)} cells, expected {width}"
            )

    start = 1 if has_id_col else 0
    values = np.empty((len(body), width - start))
    row_ids = []
    for i, row in enumerate(body):
        if has_id_col:
            row_ids.append(row[0])
        for j, token in enumerate(row[start:]):
            try:
                values[i, j] = float(token)
            except ValueError:
                row_no = i + (2 if has_header else 1)
                col_no = j + start + 1
                raise ParseError(
                    f"{path}: non-numeric value {token!r} at ({row_no}, {col_no})"
                )

    col_ids = None
    if has_header:
        header = rows[0]
        # A header may or may not carry a corner cell above the id column.
        if len(header) == width:
            col_ids = header[start:] if has_id_col else header
        elif len(header) == width - start:
            col_ids = header
        else:
            raise RaggedRowsError(
                f"{path}: header has {len(header)} cells, expected {width} "
                f"or {width - start}"
            )
        col_ids = tuple(col_ids)

    row_ids = tuple(row_ids) if row_ids else None
    if orientation == "samples-as-columns":
        values = values.T
        sample_ids, feature_ids = col_ids, row_ids
    else:
        sample_ids, feature_ids = row_ids, col_ids

    labels = None
    if labels_path is not None:
        labels = load_labels(labels_path, expected=values.shape[0])
    return ExpressionMatrix(
        values=values, sample_ids=sample_ids, feature_ids=feature_ids, labels=labels
    )


def load_labels(path: str | Path, expected: int | None = None) -> tuple[str, ...]:
    """Read one label per line, skipping blank lines."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise DataError(f"cannot read {path}: {err}")
    labels = tuple(line.strip() for line in text.splitlines() if line.strip())
    if not labels:
        raise DataError(f"{path} contains no labels")
    if expected is not None and len(labels) != expected:
        raise LabelLengthMismatchError(
            f"{path}: {len(labels)} labels for {expected} samples"
        )
    return labels


def preprocess(
    x: ExpressionMatrix,
    normalize: bool = True,
    log_transform: bool = True,
    top_features: int | None = None,
) -> ExpressionMatrix:
    """Median-total normalization, log1p, and optional variance filtering.

    Normalization rescales each row to the median row total; all-zero rows
    stay zero. Negative entries make totals meaningless, so they are
    rejected. top_features keeps that many highest-variance columns, in
    their original order.
    """
    values = np.array(x.values, dtype=float)
    if normalize:
        if np.any(values < 0):
            raise NegativeValuesError(
                "normalization requires nonnegative values; got negatives"
            )
        totals = values.sum(axis=1)
        median_total = float(np.median(totals))
        nonzero = totals > 0
        values[nonzero] *= median_total / totals[nonzero, None]
    if log_transform:
        if np.any(values <= -1.0):
            raise DataError("log1p requires every value to exceed -1")
        values = np.log1p(values)
    feature_ids = x.feature_ids
    if top_features is not None:
        if not 1 <= top_features <= values.shape[1]:
            raise DataError(
                f"top_features must lie in [1, {values.shape[1]}], got {top_features}"
            )
        variances = values.var(axis=0)
        ranked = np.argsort(-variances, kind="stable")[:top_features]
        keep = np.sort(ranked)
        values = values[:, keep]
        if feature_ids is not None:
            feature_ids = tuple(feature_ids[i] for i in keep)
    return ExpressionMatrix(
        values=values,
        sample_ids=x.sample_ids,
        feature_ids=feature_ids,
        labels=x.labels,
    )
