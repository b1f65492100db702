"""BIHT and the fused forward-backward variants for 2D one-bit recovery.

Each iteration takes a subgradient step on the one-sided barrier and then
projects onto the variant's constraint set:

* ``BIHT``      keep the K largest entries;
* ``FBCS_TV``   project onto the TV ball, then keep the K largest entries;
* ``FBCS_MTV``  keep the K largest entries, then bound the normalized TV of
  every 4-connected block of nonzeros.

The returned estimate is the last iterate scaled to unit norm.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import projections as P
from .barriers import BarrierKind, barrier_value, subgradient_from_product
from .errors import InvalidInputError, RecoveryError

log = logging.getLogger(__name__)


class Variant(str, Enum):
    BIHT = "BIHT"
    FBCS_TV = "FBCS_TV"
    FBCS_MTV = "FBCS_MTV"


def default_step_size(barrier, M):
    if M < 1:
        raise InvalidInputError(f"M must be >= 1, got {M}")
    return 1.0 if BarrierKind(barrier) is BarrierKind.L1 else 1.0 / M


@dataclass
class SolverConfig:
    variant: Variant = Variant.BIHT
    barrier: BarrierKind = BarrierKind.L2
    K: int = 90
    tau: float | None = None        # None -> default_step_size
    epsilon: float | None = None    # TV radius; required for the fused variants
    max_iters: int = 300
    rel_change_tol: float = 1e-6
    nonneg: bool = False
    init: str = "auto"              # "auto" | "zeros" | "backprojection"; ignored if initial is set
    initial: np.ndarray | None = field(default=None, repr=False)
    proj_tol: float = P.DEFAULT_TOL
    keep_iterates: bool = False

    def __post_init__(self):
        self.variant = Variant(self.variant)
        self.barrier = BarrierKind(self.barrier)
        if self.tau is not None and not self.tau > 0:
            raise InvalidInputError(f"tau must be positive, got {self.tau}")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be >= 1")
        if self.init not in ("auto", "zeros", "backprojection"):
            raise InvalidInputError(f"unknown init {self.init!r}")
        if self.rel_change_tol < 0:
            raise InvalidInputError("rel_change_tol must be >= 0")
        if self.variant is not Variant.BIHT:
            if self.epsilon is None:
                raise InvalidInputError(f"{self.variant.value} needs epsilon")
            if self.variant is Variant.FBCS_TV and not self.epsilon > 0:
                raise InvalidInputError("FBCS_TV needs epsilon > 0")
            if self.variant is Variant.FBCS_MTV and not self.epsilon >= 0:
                raise InvalidInputError("FBCS_MTV needs epsilon >= 0")

    def step_size(self, M):
        return self.tau if self.tau is not None else default_step_size(self.barrier, M)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass
class SolverTrace:
    """Per-iteration record for one run.

    ``barrier[k]``, ``residual[k]`` and ``change[k]`` describe iterate
    ``X_{k+1}``. ``residual`` is the variant's constraint measure: TV of the
    TV-ball stage output for FBCS_TV, the largest per-block normalized TV for
    FBCS_MTV, and 0 for BIHT.
    """

    barrier: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    change: list = field(default_factory=list)
    nnz: list = field(default_factory=list)
    iterates: list = field(default_factory=list, repr=False)
    iterations: int = 0
    reason: str = ""
    final: np.ndarray | None = field(default=None, repr=False)
    seconds: float = 0.0


def initial_iterate(cfg, A, Y):
    """Starting point X_0.

    ``auto`` picks zeros for the l1 barrier and the K-sparse back-projection
    ``A^T Y / M`` for l2, whose subgradient vanishes at X = 0.
    """
    if cfg.initial is not None:
        return np.array(cfg.initial, dtype=float)
    init = cfg.init
    if init == "auto":
        init = "zeros" if cfg.barrier is BarrierKind.L1 else "backprojection"
    if init == "zeros":
        return np.zeros((A.shape[1], Y.shape[1]))
    return P.project_k_sparse(A.T @ Y / A.shape[0], cfg.K)


def _project(cfg, V, warm):
    if cfg.variant is Variant.BIHT:
        return P.project_k_sparse(V, cfg.K), 0.0
    if cfg.variant is Variant.FBCS_TV:
        if np.isinf(cfg.epsilon):
            T = V
        else:
            T = P.project_tv_ball(V, cfg.epsilon, tol=cfg.proj_tol, warm=warm)
        return P.project_k_sparse(T, cfg.K), P.tv(T)
    X = P.project_fused(V, cfg.K, cfg.epsilon, tol=cfg.proj_tol)
    return X, P.fused_residual(X)


def solve(A, Y, config: SolverConfig):
    """Run one recovery; returns ``(X_hat, trace)`` with ``|X_hat|_2 = 1``."""
    A = np.asarray(A, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if A.ndim != 2 or Y.ndim != 2 or A.shape[0] != Y.shape[0]:
        raise InvalidInputError(f"A{A.shape} and Y{Y.shape} are inconsistent")
    if not np.all(np.isin(Y, (-1.0, 1.0))):
        raise InvalidInputError("measurements must be +-1")
    M, N = A.shape
    L = Y.shape[1]
    cfg = config
    if not 1 <= cfg.K <= N * L:
        raise InvalidInputError(f"K={cfg.K} outside [1, {N * L}]")
    tau = cfg.step_size(M)

    X = initial_iterate(cfg, A, Y)
    if X.shape != (N, L):
        raise InvalidInputError(f"initial iterate has shape {X.shape}, expected {(N, L)}")

    trace = SolverTrace()
    warm = P.TVWarmStart()
    start = time.perf_counter()
    AX = A @ X
    for k in range(cfg.max_iters):
        V = X - tau * subgradient_from_product(cfg.barrier, A, AX, Y)
        X_new, residual = _project(cfg, V, warm)
        if cfg.nonneg:
            X_new = np.maximum(X_new, 0.0)
        change = np.linalg.norm(X_new - X) / max(np.linalg.norm(X), 1e-12)
        X = X_new
        AX = A @ X
        trace.barrier.append(barrier_value(cfg.barrier, Y * AX))
        trace.residual.append(residual)
        trace.change.append(float(change))
        trace.nnz.append(int(np.count_nonzero(X)))
        if cfg.keep_iterates:
            trace.iterates.append(X.copy())
        trace.iterations = k + 1
        if change < cfg.rel_change_tol:
            trace.reason = "converged"
            break
    else:
        trace.reason = "max_iters"
    trace.seconds = time.perf_counter() - start

    nrm = np.linalg.norm(X)
    if nrm == 0:
        raise RecoveryError(f"{cfg.variant.value}-{cfg.barrier.value} ended on the zero matrix")
    trace.final = X
    log.debug("%s-%s: %d iterations (%s), %.2fs", cfg.variant.value, cfg.barrier.value,
              trace.iterations, trace.reason, trace.seconds)
    return X / nrm, trace
