import math

import numpy as np
import pytest

from conftest import central_diff, rel_close
from corelearn import ContractError, linreg_loss, logreg_loss, loss_gradients
from corelearn.losses import LossModel


def test_linreg_values():
    assert linreg_loss([1.0, 1.0], 3.0, [1.0, 2.0]) == 0.0
    assert linreg_loss([2.0], 0.0, [1.0]) == 4.0
    assert linreg_loss([1.0, 2.0], 1.0, [2.0, 0.5]) == pytest.approx(4.0)


def test_logreg_values():
    assert logreg_loss([5.0, -1.0], 1.0, [0.0, 0.0]) == pytest.approx(math.log(2.0))
    assert logreg_loss([1.0], 1.0, [1.0]) == pytest.approx(
        math.log(1.0 + math.exp(-1.0)))


def test_logreg_monotone_toward_zero():
    vals = [logreg_loss([1.0], 1.0, [z]) for z in (0.0, 1.0, 5.0, 20.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] >= 0.0


def test_logreg_label_contract():
    with pytest.raises(ContractError):
        logreg_loss([1.0], 0.5, [1.0])


def test_logreg_extreme_margin_is_finite():
    for sign in (1.0, -1.0):
        v = logreg_loss([1e3], sign, [1.0])
        assert np.isfinite(v)
        assert v >= 0.0


def test_linreg_sign_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = rng.standard_normal(3)
        b = float(rng.standard_normal())
        q = rng.standard_normal(3)
        assert linreg_loss(p, b, q) == pytest.approx(linreg_loss(-p, -b, q))


def test_nonnegativity():
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = rng.standard_normal(2)
        q = rng.standard_normal(2)
        assert linreg_loss(p, float(rng.standard_normal()), q) >= 0.0
        assert logreg_loss(p, 1.0 if rng.random() < 0.5 else -1.0, q) >= 0.0


def test_hand_gradients_linreg():
    loss = LossModel("linear_regression")
    dp, db, du, dq = loss_gradients(loss, [1.0], 0.0, 1.0, [1.0])
    assert np.allclose(dq, [2.0])
    # exact fit: everything but the weight slot vanishes, and f itself is 0
    dp, db, du, dq = loss_gradients(loss, [1.0], 1.0, 1.0, [1.0])
    assert np.allclose(dp, 0.0) and db == 0.0 and du == 0.0 and np.allclose(dq, 0.0)


def test_hand_gradient_logreg():
    loss = LossModel("logistic_regression")
    _, _, _, dq = loss_gradients(loss, [1.0], 1.0, 1.0, [0.0])
    assert np.allclose(dq, [-0.5])


@pytest.mark.parametrize("kind", ["linear_regression", "logistic_regression"])
def test_gradients_match_finite_differences(kind):
    loss = LossModel(kind)
    rng = np.random.default_rng(42)
    d = 3
    for _ in range(100):
        p = rng.standard_normal(d)
        q = rng.standard_normal(d)
        u = float(rng.random() + 0.1)
        if kind == "linear_regression":
            b = float(rng.standard_normal())
        else:
            b = 1.0 if rng.random() < 0.5 else -1.0
        dp, db, du, dq = loss_gradients(loss, p, b, u, q)

        fd_p = central_diff(lambda x: u * loss.pointwise(x, [b], q)[0], p)
        fd_q = central_diff(lambda x: u * loss.pointwise(p, [b], x)[0], q)
        fd_b = central_diff(
            lambda x: u * loss.pointwise(p, [x[0]], q)[0], np.array([b]))[0]
        fd_u = central_diff(
            lambda x: x[0] * loss.pointwise(p, [b], q)[0], np.array([u]))[0]
        assert rel_close(dp, fd_p)
        assert rel_close(dq, fd_q)
        assert rel_close(db, fd_b)
        assert rel_close(du, fd_u)


def test_intercept_augments_query_dim():
    loss = LossModel("linear_regression", intercept=True)
    # <[2], q> + q_0 with q = [3, 1], b = 0 -> residual 7
    v = loss.pointwise([[2.0]], [0.0], [3.0, 1.0])[0]
    assert v == pytest.approx(49.0)
    assert loss.query_dim(1) == 2


def test_pointwise_matrix_agrees_with_pointwise(linreg, logreg):
    rng = np.random.default_rng(5)
    pts = rng.standard_normal((6, 2))
    qm = rng.standard_normal((4, 2))
    for loss, labels in ((linreg, rng.standard_normal(6)),
                        (logreg, np.where(rng.random(6) < 0.5, -1.0, 1.0))):
        mat = loss.pointwise_matrix(pts, labels, qm)
        for j in range(4):
            assert np.allclose(mat[:, j], loss.pointwise(pts, labels, qm[j]))


def test_unknown_kind_rejected():
    with pytest.raises(ContractError):
        LossModel("svm")
