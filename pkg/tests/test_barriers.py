import numpy as np
import pytest

from bfcs.barriers import BarrierKind, barrier_value, negative_part, subgradient
from bfcs.errors import InvalidInputError
from bfcs.model import sign_elementwise


def test_negative_part():
    assert negative_part(np.array([[1.0, -2.0]])).tolist() == [[0.0, -2.0]]
    assert not negative_part(np.ones((3, 3))).any()
    assert negative_part(np.array([[0.0]])).tolist() == [[0.0]]


def test_barrier_values():
    Z = np.array([[-1.0, 2.0], [-3.0, 0.0]])
    assert barrier_value(BarrierKind.L1, Z) == 8.0
    assert barrier_value(BarrierKind.L2, np.array([[-2.0]])) == 2.0
    for kind in BarrierKind:
        assert barrier_value(kind, np.abs(Z)) == 0.0


def test_subgradient_scalar_examples():
    A, X, Y = np.array([[1.0]]), np.array([[1.0]]), np.array([[-1.0]])
    assert subgradient("l1", A, X, Y).tolist() == [[2.0]]
    assert subgradient("l2", A, X, Y).tolist() == [[1.0]]


def test_subgradient_vanishes_when_consistent(rng):
    A = rng.standard_normal((40, 8))
    X = rng.standard_normal((8, 3))
    Y = sign_elementwise(A @ X)
    for kind in BarrierKind:
        assert not subgradient(kind, A, X, Y).any()


def test_subgradient_rejects_bad_shapes(rng):
    with pytest.raises(InvalidInputError):
        subgradient("l2", np.ones((3, 4)), np.ones((4, 2)), np.ones((3, 3)))
