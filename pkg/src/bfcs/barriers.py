"""One-sided sign-consistency barriers and their subgradients.

Both act on the consistency matrix ``Z = Y * (A @ X)``: entries with the
wrong sign are negative and only those are penalized.
"""
from enum import Enum

import numpy as np

from .errors import InvalidInputError
from .model import sign_elementwise


class BarrierKind(str, Enum):
    L1 = "l1"
    L2 = "l2"


def negative_part(Z):
    return np.minimum(Z, 0.0)


def barrier_value(kind, Z):
    """``2 * |[Z]_-|_1`` for the l1 barrier, ``0.5 * |[Z]_-|_2^2`` for l2."""
    neg = negative_part(np.asarray(Z, dtype=float))
    if BarrierKind(kind) is BarrierKind.L1:
        return float(2.0 * np.abs(neg).sum())
    return float(0.5 * np.square(neg).sum())


def _check(A, X, Y):
    A = np.asarray(A, dtype=float)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if A.ndim != 2 or X.ndim != 2 or Y.ndim != 2:
        raise InvalidInputError("A, X and Y must be 2D")
    if A.shape[1] != X.shape[0] or Y.shape != (A.shape[0], X.shape[1]):
        raise InvalidInputError(f"inconsistent shapes A{A.shape} X{X.shape} Y{Y.shape}")
    return A, X, Y


def subgradient_from_product(kind, A, AX, Y):
    """Subgradient given a precomputed ``A @ X``."""
    if BarrierKind(kind) is BarrierKind.L1:
        R = sign_elementwise(AX) - Y
    else:
        R = Y * negative_part(Y * AX)
    return A.T @ R


def subgradient(kind, A, X, Y):
    """Subgradient of ``X -> f(Y * (A @ X))``.

    l1: ``A^T (sign(A X) - Y)`` with sign(0) = -1; l2: ``A^T (Y * [Y * (A X)]_-)``.
    """
    A, X, Y = _check(A, X, Y)
    return subgradient_from_product(kind, A, A @ X, Y)
