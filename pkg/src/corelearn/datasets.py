"""CSV dataset ingestion and synthetic stand-in generation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .core import WeightedLabeledSet, stream_rng
from .losses import LINEAR, LOGISTIC


class DatasetError(ValueError):
    """Unreadable or malformed dataset file."""


@dataclass
class Schema:
    """Column layout of a CSV dataset.

    Columns are named when the file has a header, or referenced by index
    strings ("0", "1", ...) when it does not.
    """

    features: list
    label: str
    weight: str | None = None
    has_header: bool = False
    standardize: bool = False
    binary_label: bool = False  # map {0,1} to {-1,+1}


def load_dataset(path, schema: Schema) -> WeightedLabeledSet:
    """Parse a CSV file into a weighted labeled set.

    Rows with missing or non-numeric cells produce errors naming the
    offending line and column. Weights default to 1/n when no weight
    column is given. Standardization (per-feature mean 0, variance 1)
    is applied when requested and recorded on the returned metadata.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if schema.has_header:
        if not rows:
            raise DatasetError(f"{path}: empty file")
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
        col_index = {name: i for i, name in enumerate(header)}
    else:
        col_index = None
    if not rows:
        raise DatasetError(f"{path}: no data rows")

    def col(name, row, line_no):
        if col_index is not None:
            if name not in col_index:
                raise DatasetError(f"{path}: missing column {name!r}")
            i = col_index[name]
        else:
            i = int(name)
        if i >= len(row):
            raise DatasetError(f"{path}: line {line_no}: missing column {name!r}")
        cell = row[i].strip()
        try:
            value = float(cell)
        except ValueError as exc:
            raise DatasetError(
                f"{path}: line {line_no}: column {name!r}: non-numeric cell {cell!r}"
            ) from exc
        if not np.isfinite(value):
            raise DatasetError(
                f"{path}: line {line_no}: column {name!r}: non-finite value {cell!r}")
        return value

    points, labels, weights = [], [], []
    offset = 2 if schema.has_header else 1
    for j, row in enumerate(rows):
        line_no = j + offset
        if not row or all(not c.strip() for c in row):
            continue
        points.append([col(f, row, line_no) for f in schema.features])
        labels.append(col(schema.label, row, line_no))
        if schema.weight is not None:
            weights.append(col(schema.weight, row, line_no))
    if not points:
        raise DatasetError(f"{path}: no data rows")
    pts = np.array(points)
    lab = np.array(labels)
    n = pts.shape[0]
    w = np.array(weights) if weights else np.full(n, 1.0)

    meta = {"path": str(path), "n": n, "standardized": False}
    if schema.standardize:
        mean = pts.mean(axis=0)
        std = pts.std(axis=0)
        std[std == 0] = 1.0
        pts = (pts - mean) / std
        meta.update(standardized=True, feature_mean=mean.tolist(),
                    feature_std=std.tolist())
    if schema.binary_label:
        vals = set(np.unique(lab))
        if vals <= {0.0, 1.0}:
            lab = 2.0 * lab - 1.0
        elif not vals <= {-1.0, 1.0}:
            raise DatasetError(f"{path}: binary labels must be 0/1 or -1/+1")
    dataset = WeightedLabeledSet(pts, w, lab).normalized()
    return dataset


def make_synthetic(task: str, n: int, d: int, noise: float = 0.1,
                   seed: int = 0) -> WeightedLabeledSet:
    """Gaussian features with a planted model.

    linear task: b = <p, q*> + noise * N(0,1).
    logistic task: b = sign(<p, q*> + noise * N(0,1)) -- separable up to noise.
    """
    rng = stream_rng(seed, "make_synthetic", task)
    X = rng.standard_normal((n, d))
    q_star = rng.standard_normal(d)
    q_star /= np.linalg.norm(q_star)
    margin = X @ q_star + noise * rng.standard_normal(n)
    if task in (LINEAR, "linear", "linreg"):
        labels = margin
    elif task in (LOGISTIC, "logistic", "logreg"):
        labels = np.where(margin >= 0, 1.0, -1.0)
    else:
        raise DatasetError(f"unknown synthetic task {task!r}")
    weights = np.full(n, 1.0 / n)
    return WeightedLabeledSet(X, weights, labels)
