"""Query generation from optimization trajectories, splitting, and sampling."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ContractError,
    MeasurableQuerySpace,
    WeightedLabeledSet,
    stream_rng,
)
from .losses import LossModel

ROLE_TRAIN = "train"
ROLE_VALIDATION = "validation"
ROLE_TEST = "test"


@dataclass(frozen=True)
class QueryBatch:
    """An ordered batch of queries with a role and a provenance record."""

    array: np.ndarray  # (k, d')
    role: str = ROLE_TRAIN
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.array, dtype=float))
        object.__setattr__(self, "array", a)

    def __len__(self):
        return self.array.shape[0]

    @property
    def dim(self):
        return self.array.shape[1]


def trajectory_queries(P: WeightedLabeledSet, loss: LossModel, n_starts: int,
                       steps_per_start: int, gd_lr: float = 0.01,
                       init_scale: float = 1.0, seed: int = 0) -> np.ndarray:
    """Queries recorded along plain gradient-descent runs on the full data.

    Each of n_starts Gaussian initializations contributes its starting point
    plus the iterate after every step. A trajectory whose cost goes
    non-finite is truncated with a warning.
    """
    if n_starts < 1:
        raise ContractError("n_starts must be >= 1")
    if steps_per_start < 0:
        raise ContractError("steps_per_start must be >= 0")
    rng = stream_rng(seed, "trajectory_queries")
    dq = loss.query_dim(P.dim)
    out = []
    for start in range(n_starts):
        q = init_scale * rng.standard_normal(dq)
        out.append(q.copy())
        for _ in range(steps_per_start):
            g = loss.query_grad(P.points, P.labels, P.weights, q)
            q = q - gd_lr * g
            cost = np.inf
            if np.all(np.isfinite(q)):
                with np.errstate(over="ignore"):
                    cost = float(np.sum(
                        P.weights * loss.pointwise(P.points, P.labels, q)))
            if not np.isfinite(cost):
                warnings.warn(f"trajectory {start} diverged; truncating")
                break
            out.append(q.copy())
    return np.stack(out)


def split_queries(pool, sizes, seed: int = 0):
    """Shuffle the pool by seed and slice into train/validation/test batches."""
    pool = np.atleast_2d(np.asarray(pool, dtype=float))
    k_train, k_val, k_test = (int(s) for s in sizes)
    if min(k_train, k_val, k_test) < 0:
        raise ContractError("split sizes must be nonnegative")
    total = k_train + k_val + k_test
    if total > pool.shape[0]:
        raise ContractError(
            f"requested {total} queries from a pool of {pool.shape[0]}")
    rng = stream_rng(seed, "split_queries")
    order = rng.permutation(pool.shape[0])
    shuffled = pool[order]
    prov = {"generator": "split_queries", "seed": int(seed)}
    train = QueryBatch(shuffled[:k_train].reshape(k_train, pool.shape[1]),
                       ROLE_TRAIN, prov)
    val = QueryBatch(shuffled[k_train:k_train + k_val].reshape(k_val, pool.shape[1]),
                     ROLE_VALIDATION, prov)
    test = QueryBatch(shuffled[k_train + k_val:total].reshape(k_test, pool.shape[1]),
                      ROLE_TEST, prov)
    return train, val, test


def iid_sample(space: MeasurableQuerySpace, k: int, seed: int = 0,
               role: str = ROLE_TRAIN) -> QueryBatch:
    """k independent draws (with replacement) from the finite query measure."""
    if k < 1:
        raise ContractError("k must be >= 1")
    rng = stream_rng(seed, "iid_sample")
    idx = rng.choice(space.size, size=k, p=space.measure)
    qm = space.query_matrix()[idx]
    return QueryBatch(qm, role, {"generator": "iid_sample", "seed": int(seed)})


def save_pool_csv(pool, path):
    """One query per row, plain comma-separated floats."""
    pool = np.atleast_2d(np.asarray(pool, dtype=float))
    with open(path, "w") as fh:
        for row in pool:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def load_pool_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)
