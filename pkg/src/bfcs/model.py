"""Measurement model Y = sign(AX + W), synthetic group-sparse images, metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

MAX_PLACEMENT_RETRIES = 10_000


def _matrix(X, name):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2D array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return X


def _check_product(A, X):
    if A.shape[1] != X.shape[0]:
        raise InvalidInputError(
            f"sensing matrix has {A.shape[1]} columns but signal has {X.shape[0]} rows")


def sign_elementwise(Z):
    """+1 where Z > 0 and -1 elsewhere, zero included."""
    Z = np.asarray(Z, dtype=float)
    if not np.all(np.isfinite(Z)):
        raise InvalidInputError("sign of a non-finite entry")
    return np.where(Z > 0, 1.0, -1.0)


@dataclass(frozen=True)
class NoiseModel:
    variance: float = 0.0

    def __post_init__(self):
        if not self.variance >= 0:
            raise InvalidInputError(f"noise variance must be >= 0, got {self.variance}")


def measure(A, X, noise=NoiseModel(), seed=None):
    """One-bit measurements ``sign(A @ X + W)`` with i.i.d. Gaussian noise W."""
    A = _matrix(A, "A")
    X = _matrix(X, "X")
    _check_product(A, X)
    if not isinstance(noise, NoiseModel):
        noise = NoiseModel(float(noise))
    Z = A @ X
    if noise.variance > 0:
        rng = np.random.default_rng(seed)
        Z = Z + np.sqrt(noise.variance) * rng.standard_normal(Z.shape)
    return sign_elementwise(Z)


def gaussian_sensing_matrix(M, N, seed=None):
    if M < 1 or N < 1:
        raise InvalidInputError(f"sensing matrix needs M, N >= 1, got {(M, N)}")
    return np.random.default_rng(seed).standard_normal((M, N))


@dataclass(frozen=True)
class GroupSignalSpec:
    """Sparse image made of constant runs ("line groups") of one sign each.

    ``orientation="vertical"`` lays runs along a column (the sensed
    dimension), ``"horizontal"`` along a row.
    """

    n_rows: int = 400
    n_cols: int = 100
    n_groups: int = 10
    group_length: int = 9
    amplitude: float = 10.0
    seed: int | None = 0
    orientation: str = "vertical"

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise InvalidInputError("signal dimensions must be >= 1")
        if self.n_groups < 0 or self.group_length < 1:
            raise InvalidInputError("need n_groups >= 0 and group_length >= 1")
        if self.n_groups * self.group_length > self.n_rows * self.n_cols:
            raise InvalidInputError("groups do not fit in the image")
        if not self.amplitude > 0:
            raise InvalidInputError("amplitude must be positive")
        if self.orientation not in ("vertical", "horizontal"):
            raise InvalidInputError(f"unknown orientation {self.orientation!r}")

    @property
    def sparsity(self):
        return self.n_groups * self.group_length


def generate_group_signal(spec: GroupSignalSpec):
    """Random non-touching runs of +-amplitude, scaled to unit Frobenius norm.

    Every run is separated from the others by at least one zero in each of
    the four grid directions, so each run is its own 4-connected component.
    """
    rng = np.random.default_rng(spec.seed)
    vertical = spec.orientation == "vertical"
    n_rows, n_cols = spec.n_rows, spec.n_cols
    run_rows, run_cols = (spec.group_length, 1) if vertical else (1, spec.group_length)
    if run_rows > n_rows or run_cols > n_cols:
        raise InvalidInputError("group_length exceeds the image side it runs along")

    X = np.zeros((n_rows, n_cols))
    blocked = np.zeros((n_rows, n_cols), dtype=bool)
    placed = 0
    retries = 0
    while placed < spec.n_groups:
        i = int(rng.integers(0, n_rows - run_rows + 1))
        j = int(rng.integers(0, n_cols - run_cols + 1))
        sign = 1.0 if rng.random() < 0.5 else -1.0
        if blocked[i:i + run_rows, j:j + run_cols].any():
            retries += 1
            if retries > MAX_PLACEMENT_RETRIES:
                raise InvalidInputError(
                    f"could not place {spec.n_groups} groups after {MAX_PLACEMENT_RETRIES} retries")
            continue
        X[i:i + run_rows, j:j + run_cols] = sign * spec.amplitude
        # the run plus its 4-neighbourhood is off limits for later runs
        blocked[max(i - 1, 0):i + run_rows + 1, j:j + run_cols] = True
        blocked[i:i + run_rows, max(j - 1, 0):j + run_cols + 1] = True
        placed += 1
    nrm = np.linalg.norm(X)
    return X / nrm if nrm > 0 else X


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def snr_db(reference, estimate):
    """``20 log10(|X| / |X - Xhat|)`` after scaling both to unit norm.

    Returns ``inf`` when they coincide and ``-inf`` for a zero estimate.
    """
    X = _matrix(reference, "reference")
    Xh = _matrix(estimate, "estimate")
    if X.shape != Xh.shape:
        raise InvalidInputError(f"shape mismatch {X.shape} vs {Xh.shape}")
    nx = np.linalg.norm(X)
    if nx == 0:
        raise InvalidInputError("reference signal is zero")
    nh = np.linalg.norm(Xh)
    if nh == 0:
        return -np.inf
    err = np.linalg.norm(X / nx - Xh / nh)
    if err == 0:
        return np.inf
    return float(20.0 * np.log10(1.0 / err))


def sign_consistency_error(Y, A, X_hat):
    """Fraction of measurements whose sign ``X_hat`` fails to reproduce."""
    Y = _matrix(Y, "Y")
    A = _matrix(A, "A")
    X_hat = _matrix(X_hat, "X_hat")
    _check_product(A, X_hat)
    if Y.shape != (A.shape[0], X_hat.shape[1]):
        raise InvalidInputError(f"measurements have shape {Y.shape}, expected {(A.shape[0], X_hat.shape[1])}")
    return float(np.mean(sign_elementwise(A @ X_hat) != Y))


def support_f1(reference, estimate):
    ref = np.asarray(reference) != 0
    est = np.asarray(estimate) != 0
    if ref.shape != est.shape:
        raise InvalidInputError(f"shape mismatch {ref.shape} vs {est.shape}")
    if not ref.any() and not est.any():
        return 1.0
    hits = np.count_nonzero(ref & est)
    return float(2.0 * hits / (np.count_nonzero(ref) + np.count_nonzero(est)))
