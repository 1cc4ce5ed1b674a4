import numpy as np
import pytest

from corelearn import LossModel, WeightedLabeledSet


def central_diff(fn, x, h=1e-6):
    """Central finite-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (fn(x + e) - fn(x - e)) / (2 * h)
    return g


def rel_close(a, b, rtol=1e-5, floor=1e-8):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.all(np.abs(a - b) <= floor + rtol * np.maximum(np.abs(a), np.abs(b)))


@pytest.fixture
def linreg():
    return LossModel("linear_regression")


@pytest.fixture
def logreg():
    return LossModel("logistic_regression")


@pytest.fixture
def tiny_set():
    return WeightedLabeledSet(
        points=np.array([[1.0], [2.0]]),
        weights=np.array([0.5, 0.5]),
        labels=np.array([0.0, 0.0]),
    )
