"""Per-point losses with analytic gradients w.r.t. point, label, weight, query.

Two loss families are supported: squared-residual linear regression and
negative log-likelihood logistic regression with +/-1 labels. An optional
intercept is handled by appending a constant-1 feature, so the query vector
gains one coordinate and all gradient formulas stay uniform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractError

LINEAR = "linear_regression"
LOGISTIC = "logistic_regression"


def _sigmoid(x):
    # overflow-free for large |x|
    z = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def _softplus(x):
    # log(1 + e^x) without overflow
    return np.logaddexp(0.0, x)


@dataclass(frozen=True)
class LossModel:
    kind: str = LINEAR
    intercept: bool = False

    def __post_init__(self):
        if self.kind not in (LINEAR, LOGISTIC):
            raise ContractError(f"unknown loss kind: {self.kind!r}")

    def query_dim(self, data_dim: int) -> int:
        return data_dim + 1 if self.intercept else data_dim

    def augment(self, points: np.ndarray) -> np.ndarray:
        """Feature matrix as seen by the query (constant column if intercept)."""
        points = np.atleast_2d(points)
        if not self.intercept:
            return points
        ones = np.ones((points.shape[0], 1))
        return np.hstack([points, ones])

    # -- values ---------------------------------------------------------

    def pointwise(self, points, labels, q) -> np.ndarray:
        """Per-point loss values f(p_i, b_i, q), shape (n,)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        labels = np.atleast_1d(np.asarray(labels, dtype=float))
        q = np.asarray(q, dtype=float)
        a = self.augment(points)
        if a.shape[1] != q.shape[0]:
            raise ContractError(
                f"query dim {q.shape[0]} does not match feature dim {a.shape[1]}"
            )
        z = a @ q
        if self.kind == LINEAR:
            r = z - labels
            return r * r
        # labels may be real here: learned coreset labels drift off +/-1
        return _softplus(-labels * z)

    def pointwise_matrix(self, points, labels, queries) -> np.ndarray:
        """Loss values for every (point, query) pair, shape (n, k)."""
        a = self.augment(np.asarray(points, dtype=float))
        labels = np.asarray(labels, dtype=float)
        qm = np.atleast_2d(np.asarray(queries, dtype=float))
        z = a @ qm.T
        if self.kind == LINEAR:
            r = z - labels[:, None]
            return r * r
        return _softplus(-labels[:, None] * z)

    # -- gradients ------------------------------------------------------

    def weighted_grads(self, points, labels, weights, queries, coeffs):
        """Costs per query and gradients of sum_q coeffs_q * f(C, u, q).

        points: (m, d), labels/weights: (m,), queries: (k, d'), coeffs: (k,).
        Returns (costs (k,), d_points (m, d), d_labels (m,), d_weights (m,)).
        The label gradient treats the label as a real even for the logistic
        loss, which is what joint label learning needs.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        labels = np.asarray(labels, dtype=float)
        weights = np.asarray(weights, dtype=float)
        qm = np.atleast_2d(np.asarray(queries, dtype=float))
        coeffs = np.asarray(coeffs, dtype=float)
        d = points.shape[1]
        a = self.augment(points)
        z = a @ qm.T  # (m, k)
        if self.kind == LINEAR:
            r = z - labels[:, None]
            per_point = r * r
            dz = 2.0 * r  # d f / d z
            d_labels_per = -2.0 * r
        else:
            marg = labels[:, None] * z
            s = _sigmoid(-marg)
            per_point = _softplus(-marg)
            dz = -labels[:, None] * s
            d_labels_per = -z * s
        costs = weights @ per_point  # (k,)
        scale = weights[:, None] * coeffs[None, :]  # (m, k)
        d_points = (scale * dz) @ qm[:, :d]
        d_labels = np.sum(scale * d_labels_per, axis=1)
        d_weights = per_point @ coeffs
        return costs, d_points, d_labels, d_weights

    def query_grad(self, points, labels, weights, q) -> np.ndarray:
        """Gradient of the total cost w.r.t. the query vector."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        labels = np.asarray(labels, dtype=float)
        weights = np.asarray(weights, dtype=float)
        q = np.asarray(q, dtype=float)
        a = self.augment(points)
        z = a @ q
        if self.kind == LINEAR:
            dz = 2.0 * (z - labels)
        else:
            dz = -labels * _sigmoid(-labels * z)
        return a.T @ (weights * dz)


def linreg_loss(p, b, q) -> float:
    """Squared residual (<p, q> - b)^2 for one point (no intercept handling)."""
    return float(LossModel(LINEAR).pointwise(p, [b], q)[0])


def logreg_loss(p, b, q) -> float:
    """Stable logistic loss log(1 + exp(-b <p, q>)) for one point."""
    if b not in (-1, 1):
        raise ContractError("logistic label must be -1 or +1")
    return float(LossModel(LOGISTIC).pointwise(p, [b], q)[0])


def loss_gradients(loss: LossModel, p, b, u_weight, q):
    """Gradients of u * f(p, b, q) w.r.t. (p, b, u, q) for a single point."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    costs, dp, db, du = loss.weighted_grads(
        p[None, :], [b], [u_weight], np.asarray(q, dtype=float)[None, :], [1.0]
    )
    dq = loss.query_grad(p[None, :], [b], [u_weight], q)
    return dp[0], float(db[0]), float(du[0]), dq
