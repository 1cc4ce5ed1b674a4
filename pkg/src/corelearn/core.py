"""Domain types: weighted labeled sets, coresets, queries, and cost evaluation.

All heavy numerics go through numpy. Sums over points/queries use np.sum,
whose pairwise accumulation keeps floating-point drift bounded on large n.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ContractError",
    "NumericError",
    "DegenerateInputError",
    "WeightedLabeledSet",
    "Coreset",
    "Query",
    "MeasurableQuerySpace",
    "total_cost",
    "set_cost",
    "expected_cost",
    "stream_rng",
]


class ContractError(ValueError):
    """A caller violated an operation's preconditions (shape/value contract)."""


class NumericError(ArithmeticError):
    """A non-finite value appeared mid-computation.

    ``index`` points at the offending per-point term when known.
    """

    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class DegenerateInputError(ValueError):
    """Input is structurally valid but unusable (e.g. all-zero weights)."""


def _as_matrix(x, name):
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ContractError(f"{name} must be a 2-d array, got ndim={a.ndim}")
    return a


def _as_vector(x, name):
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise ContractError(f"{name} must be a 1-d array, got ndim={a.ndim}")
    return a


@dataclass(frozen=True)
class WeightedLabeledSet:
    """The input data (P, w, b): n points with per-point weights and labels."""

    points: np.ndarray
    weights: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = _as_matrix(self.points, "points")
        w = _as_vector(self.weights, "weights")
        b = _as_vector(self.labels, "labels")
        n = pts.shape[0]
        if n < 1:
            raise ContractError("need at least one point")
        if w.shape[0] != n or b.shape[0] != n:
            raise ContractError(
                f"size mismatch: {n} points, {w.shape[0]} weights, {b.shape[0]} labels"
            )
        if not np.all(np.isfinite(pts)):
            raise ContractError("non-finite entries in points")
        if not np.all(np.isfinite(w)):
            raise ContractError("non-finite entries in weights")
        if not np.all(np.isfinite(b)):
            raise ContractError("non-finite entries in labels")
        if np.any(w < 0):
            raise ContractError("weights must be nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "labels", b)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def normalized(self) -> "WeightedLabeledSet":
        """Return a copy whose weights sum to 1."""
        s = float(np.sum(self.weights))
        if s <= 0.0:
            raise DegenerateInputError("cannot normalize all-zero weights")
        return WeightedLabeledSet(self.points, self.weights / s, self.labels)


def normalize_weights(dataset: WeightedLabeledSet) -> WeightedLabeledSet:
    return dataset.normalized()


@dataclass
class Coreset:
    """The learnable summary (C, u, y): synthetic points, weights, labels.

    Mutable: a learner owns and updates it in place between snapshots.
    Weights are nonnegative at every point observable outside an optimizer
    step (the learner projects after each update).
    """

    points: np.ndarray
    weights: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.points = _as_matrix(self.points, "points")
        self.weights = _as_vector(self.weights, "weights")
        self.labels = _as_vector(self.labels, "labels")
        m = self.points.shape[0]
        if m < 1:
            raise ContractError("coreset needs at least one point")
        if self.weights.shape[0] != m or self.labels.shape[0] != m:
            raise ContractError("coreset points/weights/labels size mismatch")

    @property
    def m(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def copy(self) -> "Coreset":
        return Coreset(self.points.copy(), self.weights.copy(), self.labels.copy())

    def as_set(self) -> WeightedLabeledSet:
        return WeightedLabeledSet(self.points, np.maximum(self.weights, 0.0), self.labels)


@dataclass(frozen=True)
class Query:
    """A candidate model: one parameter vector evaluated against the data."""

    params: np.ndarray

    def __post_init__(self):
        p = _as_vector(self.params, "params")
        if not np.all(np.isfinite(p)):
            raise ContractError("non-finite query parameters")
        object.__setattr__(self, "params", p)

    @property
    def dim(self):
        return self.params.shape[0]


@dataclass(frozen=True)
class MeasurableQuerySpace:
    """A dataset + loss + finite query universe + probability vector over it.

    The finite universe stands in for a general query distribution; it is the
    representation under which expectations are exactly computable.
    """

    ground: WeightedLabeledSet
    loss: "object"  # LossModel; kept loose to avoid an import cycle
    universe: tuple
    measure: np.ndarray

    def __post_init__(self):
        universe = tuple(self.universe)
        if len(universe) < 1:
            raise ContractError("universe must be non-empty")
        mu = _as_vector(self.measure, "measure")
        if mu.shape[0] != len(universe):
            raise ContractError("measure length must match universe size")
        if np.any(mu < 0):
            raise ContractError("measure entries must be nonnegative")
        if abs(float(np.sum(mu)) - 1.0) > 1e-12:
            raise ContractError("measure must sum to 1 within 1e-12")
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "measure", mu)

    @property
    def size(self):
        return len(self.universe)

    def query_matrix(self) -> np.ndarray:
        return np.stack([q.params for q in self.universe])


def total_cost(points, weights, labels, loss, q) -> float:
    """Weighted sum of per-point losses at query q."""
    pts = _as_matrix(points, "points")
    w = _as_vector(weights, "weights")
    b = _as_vector(labels, "labels")
    qv = q.params if isinstance(q, Query) else _as_vector(q, "query")
    if w.shape[0] != pts.shape[0] or b.shape[0] != pts.shape[0]:
        raise ContractError("points/weights/labels size mismatch")
    if np.any(w < 0):
        raise ContractError("weights must be nonnegative")
    per_point = loss.pointwise(pts, b, qv)
    bad = ~np.isfinite(per_point)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise NumericError(f"non-finite per-point loss at index {idx}", index=idx)
    out = float(np.sum(w * per_point))
    if not np.isfinite(out):
        raise NumericError("non-finite total cost")
    return out


def set_cost(dataset, loss, q) -> float:
    """total_cost for a WeightedLabeledSet or Coreset."""
    return total_cost(dataset.points, dataset.weights, dataset.labels, loss, q)


def expected_cost(space: MeasurableQuerySpace, dataset=None) -> float:
    """Exact expectation of the total cost over the finite query universe."""
    if dataset is None:
        dataset = space.ground
    costs = np.array([set_cost(dataset, space.loss, q) for q in space.universe])
    return float(np.sum(space.measure * costs))


def stream_rng(root_seed: int, *labels) -> np.random.Generator:
    """Named deterministic RNG stream derived from one root seed.

    Every consumer of randomness derives its generator here so that a single
    root seed reproduces a whole experiment, including parallel sweep cells.
    """
    words = [int(root_seed) & 0xFFFFFFFF]
    for lab in labels:
        words.append(zlib.crc32(str(lab).encode("utf-8")))
    return np.random.default_rng(np.random.SeedSequence(words))
