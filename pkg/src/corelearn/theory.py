"""Hoeffding sample-size calculators and Monte-Carlo verification.

Two sample-size formulas are provided: the plain one for approximating the
expected full-data cost by a sample average, and the inflated (1+eps)M
variant under which a weight-sum-matched coreset's expected cost lands
within 3*eps of the data's. Both are verified empirically on finite query
universes, where expectations are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ContractError,
    Coreset,
    MeasurableQuerySpace,
    WeightedLabeledSet,
    set_cost,
    stream_rng,
)


def _check_eps_delta(eps, delta, M):
    if eps <= 0:
        raise ContractError("eps must be > 0")
    if not 0 < delta < 1:
        raise ContractError("delta must be in (0, 1)")
    if M <= 0:
        raise ContractError("M must be > 0")


def hoeffding_k(eps: float, delta: float, M: float) -> int:
    """Samples needed so the mean cost deviates from its expectation by more
    than eps with probability at most delta: ceil(2 M^2 ln(2/delta) / eps^2)."""
    _check_eps_delta(eps, delta, M)
    return math.ceil(2.0 * M * M * math.log(2.0 / delta) / (eps * eps))


def claim2_k(eps: float, delta: float, M: float) -> int:
    """Inflated variant with the coreset's (1+eps)M cost bound."""
    _check_eps_delta(eps, delta, M)
    b = (1.0 + eps) * M
    return math.ceil(2.0 * b * b * math.log(2.0 / delta) / (eps * eps))


def relate_eps(eps_ratio: float, M: float) -> float:
    """Convert an average-ratio error bound into an average-difference bound."""
    if eps_ratio < 0:
        raise ContractError("eps_ratio must be >= 0")
    if M <= 0:
        raise ContractError("M must be > 0")
    return eps_ratio * M


@dataclass(frozen=True)
class BoundSpec:
    eps: float
    delta: float
    M: float
    k_required: int

    @staticmethod
    def plain(eps, delta, M):
        return BoundSpec(eps, delta, M, hoeffding_k(eps, delta, M))

    @staticmethod
    def inflated(eps, delta, M):
        return BoundSpec(eps, delta, M, claim2_k(eps, delta, M))


M_SAFETY = 1.1


def estimate_M(dataset, loss, query_pool, level: str = "point") -> float:
    """Empirical loss bound over a query pool, times a 1.1 safety factor.

    level="point": max over individual points and queries of |f(p, b, q)|.
    level="set": max over queries of the weighted total cost.
    A finite pool underestimates a true supremum, hence the safety factor.
    """
    qm = np.atleast_2d(np.asarray(
        query_pool.array if hasattr(query_pool, "array") else query_pool,
        dtype=float))
    if qm.shape[0] < 1:
        raise ContractError("query pool must be non-empty")
    per_point = loss.pointwise_matrix(dataset.points, dataset.labels, qm)
    if level == "point":
        raw = float(np.max(np.abs(per_point)))
    elif level == "set":
        raw = float(np.max(np.abs(dataset.weights @ per_point)))
    else:
        raise ContractError(f"unknown level {level!r}")
    return M_SAFETY * raw


def exact_set_M(space: MeasurableQuerySpace, dataset=None) -> float:
    """True max of |f(set, w, q)| over a finite universe (no safety factor)."""
    if dataset is None:
        dataset = space.ground
    costs = [abs(set_cost(dataset, space.loss, q)) for q in space.universe]
    return float(max(costs))


@dataclass(frozen=True)
class Claim1Result:
    violation_rate: float
    k: int
    M: float
    eps: float
    delta: float
    trials: int

    def slack(self) -> float:
        """3-sigma binomial buffer on top of delta for the pass/fail test."""
        return 3.0 * math.sqrt(self.delta * (1.0 - self.delta) / self.trials)

    def passes(self) -> bool:
        return self.violation_rate <= self.delta + self.slack()


def verify_claim1(space: MeasurableQuerySpace, eps: float, delta: float,
                  trials: int = 2000, seed: int = 0) -> Claim1Result:
    """Monte-Carlo check of the sample-average concentration bound.

    Uses the exact set-level M over the universe and the exact expectation;
    each trial samples k queries i.i.d. from the measure and tests whether
    the sample-average cost deviates from the expectation by more than eps.
    """
    costs = np.array([set_cost(space.ground, space.loss, q)
                      for q in space.universe])
    expect = float(np.sum(space.measure * costs))
    M = float(np.max(np.abs(costs)))
    if M <= 0:
        # all costs zero: deviations are identically zero
        return Claim1Result(0.0, 0, 0.0, eps, delta, trials)
    k = hoeffding_k(eps, delta, M)
    rng = stream_rng(seed, "verify_claim1")
    violations = 0
    for _ in range(trials):
        idx = rng.choice(space.size, size=k, p=space.measure)
        if abs(float(np.mean(costs[idx])) - expect) > eps:
            violations += 1
    return Claim1Result(violations / trials, k, M, eps, delta, trials)


@dataclass(frozen=True)
class Claim2Result:
    failed_premise: str | None
    premise1_gap: float
    premise2_gap: float
    expectation_gap: float
    violation_rate: float | None
    k: int
    M: float
    eps: float

    @property
    def ok(self):
        return self.failed_premise is None


def verify_claim2(P: WeightedLabeledSet, coreset: Coreset,
                  space: MeasurableQuerySpace, eps: float, delta: float,
                  trials: int = 100, seed: int = 0,
                  M: float | None = None) -> Claim2Result:
    """Check the coreset generalization conclusion for a supplied (P, C) pair.

    Premise 1: |sum w - sum u| <= eps (exact).
    Premise 2: |avg_Q f(P) - avg_Q f(C)| <= eps on an i.i.d. sample of
    k = claim2_k(eps, delta, M) queries.
    If both hold, the expected costs under the finite measure must differ by
    less than 3*eps; since the expectations are exact, the violation rate is
    the same in every trial.
    """
    if M is None:
        qm = space.query_matrix()
        per_p = np.max(np.abs(space.loss.pointwise_matrix(P.points, P.labels, qm)))
        per_c = np.max(np.abs(space.loss.pointwise_matrix(
            coreset.points, coreset.labels, qm)))
        M = float(max(per_p, per_c))
    k = claim2_k(eps, delta, M)

    costs_p = np.array([set_cost(P, space.loss, q) for q in space.universe])
    costs_c = np.array([set_cost(coreset, space.loss, q) for q in space.universe])
    exp_gap = abs(float(np.sum(space.measure * (costs_p - costs_c))))

    p1_gap = abs(float(np.sum(P.weights)) - float(np.sum(coreset.weights)))
    if p1_gap > eps + 1e-12:
        return Claim2Result("weight_sum", p1_gap, math.nan, exp_gap,
                            None, k, M, eps)

    rng = stream_rng(seed, "verify_claim2")
    p2_gaps = np.empty(trials)
    for t in range(trials):
        idx = rng.choice(space.size, size=k, p=space.measure)
        p2_gaps[t] = abs(float(np.mean(costs_p[idx]) - np.mean(costs_c[idx])))
    p2_gap = float(np.median(p2_gaps))
    if p2_gap > eps + 1e-12:
        return Claim2Result("sample_average", p1_gap, p2_gap, exp_gap,
                            None, k, M, eps)

    violation = 1.0 if exp_gap >= 3.0 * eps + 1e-10 else 0.0
    return Claim2Result(None, p1_gap, p2_gap, exp_gap, violation, k, M, eps)


def bound_table(entries) -> list[dict]:
    """Rows (eps, delta, M, k_plain, k_inflated) for CSV export."""
    rows = []
    for eps, delta, M in entries:
        rows.append({
            "eps": eps,
            "delta": delta,
            "M": M,
            "k_claim1": hoeffding_k(eps, delta, M),
            "k_claim2": claim2_k(eps, delta, M),
        })
    return rows
