import math

import numpy as np
import pytest

from corelearn import (
    ContractError,
    Coreset,
    DegenerateInputError,
    MeasurableQuerySpace,
    Query,
    WeightedLabeledSet,
    expected_cost,
    normalize_weights,
    set_cost,
    total_cost,
)
from corelearn.losses import LossModel


def test_total_cost_exact_fit(linreg):
    assert total_cost([[1.0]], [1.0], [2.0], linreg, Query([2.0])) == 0.0


def test_total_cost_hand_value(linreg):
    # 0.5 * 1^2 + 0.5 * 2^2
    got = total_cost([[1.0], [2.0]], [0.5, 0.5], [0.0, 0.0], linreg, Query([1.0]))
    assert got == pytest.approx(2.5, abs=1e-12)


def test_total_cost_logreg_zero_query(logreg):
    got = total_cost([[3.0, -2.0]], [1.0], [1.0], logreg, Query([0.0, 0.0]))
    assert got == pytest.approx(math.log(2.0), abs=1e-12)


def test_total_cost_dimension_mismatch(linreg):
    with pytest.raises(ContractError):
        total_cost([[1.0, 2.0]], [1.0], [0.0], linreg, Query([1.0]))


def test_total_cost_weight_count_mismatch(linreg):
    with pytest.raises(ContractError):
        total_cost([[1.0]], [1.0, 1.0], [0.0], linreg, Query([1.0]))


def test_total_cost_linearity_in_weights(linreg):
    rng = np.random.default_rng(7)
    for _ in range(20):
        pts = rng.standard_normal((6, 3))
        w = rng.random(6)
        b = rng.standard_normal(6)
        q = Query(rng.standard_normal(3))
        alpha = float(rng.random() * 5)
        c1 = total_cost(pts, alpha * w, b, linreg, q)
        c2 = alpha * total_cost(pts, w, b, linreg, q)
        assert c1 == pytest.approx(c2, rel=1e-10)


def test_expected_cost_point_mass(tiny_set, linreg):
    q = Query([1.0])
    space = MeasurableQuerySpace(tiny_set, linreg, (q,), [1.0])
    assert expected_cost(space) == set_cost(tiny_set, linreg, q)


def test_expected_cost_even_mixture(linreg):
    # two queries with costs 1 and 3 under the half/half measure
    P = WeightedLabeledSet([[1.0]], [1.0], [0.0])
    qa, qb = Query([1.0]), Query([math.sqrt(3.0)])
    space = MeasurableQuerySpace(P, linreg, (qa, qb), [0.5, 0.5])
    assert expected_cost(space) == pytest.approx(2.0, abs=1e-12)


def test_expected_cost_ignores_zero_mass(linreg):
    P = WeightedLabeledSet([[1.0]], [1.0], [0.0])
    qa, qb = Query([1.0]), Query([math.sqrt(3.0)])
    space = MeasurableQuerySpace(P, linreg, (qa, qb), [1.0, 0.0])
    assert expected_cost(space) == pytest.approx(1.0, abs=1e-12)


def test_expected_cost_uniform_equals_mean(linreg):
    rng = np.random.default_rng(11)
    P = WeightedLabeledSet(rng.standard_normal((5, 2)), rng.random(5),
                           rng.standard_normal(5))
    universe = tuple(Query(rng.standard_normal(2)) for _ in range(8))
    space = MeasurableQuerySpace(P, linreg, universe, np.full(8, 1.0 / 8))
    mean = np.mean([set_cost(P, linreg, q) for q in universe])
    assert expected_cost(space) == pytest.approx(mean, abs=1e-12)


def test_identity_coreset_matches_input_exactly(linreg):
    rng = np.random.default_rng(3)
    P = WeightedLabeledSet(rng.standard_normal((30, 2)), rng.random(30),
                           rng.standard_normal(30))
    C = Coreset(P.points.copy(), P.weights.copy(), P.labels.copy())
    for _ in range(10):
        q = Query(rng.standard_normal(2))
        assert set_cost(C, linreg, q) == set_cost(P, linreg, q)


def test_normalize_weights():
    s = WeightedLabeledSet([[0.0], [0.0]], [2.0, 2.0], [0.0, 0.0])
    assert np.allclose(normalize_weights(s).weights, [0.5, 0.5], atol=1e-12)
    s1 = WeightedLabeledSet([[0.0]], [1.0], [0.0])
    assert normalize_weights(s1).weights[0] == 1.0
    s2 = WeightedLabeledSet([[0.0], [0.0]], [3.0, 1.0], [0.0, 0.0])
    assert np.allclose(normalize_weights(s2).weights, [0.75, 0.25], atol=1e-12)
    assert abs(normalize_weights(s2).weights.sum() - 1.0) < 1e-12


def test_normalize_all_zero_weights_fails():
    s = WeightedLabeledSet([[0.0]], [0.0], [0.0])
    with pytest.raises(DegenerateInputError):
        normalize_weights(s)


def test_set_invariants():
    with pytest.raises(ContractError):
        WeightedLabeledSet(np.zeros((0, 2)), [], [])
    with pytest.raises(ContractError):
        WeightedLabeledSet([[1.0]], [-1.0], [0.0])
    with pytest.raises(ContractError):
        WeightedLabeledSet([[np.nan]], [1.0], [0.0])


def test_measure_must_sum_to_one(tiny_set, linreg):
    with pytest.raises(ContractError):
        MeasurableQuerySpace(tiny_set, linreg, (Query([1.0]),), [0.9])


def test_query_requires_finite_params():
    with pytest.raises(ContractError):
        Query([np.inf])
