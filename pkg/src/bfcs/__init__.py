"""One-bit compressive sensing of 2D group-sparse images.

BIHT and the fused forward-backward variants (TV ball, per-block normalized
TV) with l1 and l2 one-sided barriers.
"""
from .barriers import BarrierKind, barrier_value, subgradient
from .errors import InvalidInputError, ProjectionError, RecoveryError
from .model import (GroupSignalSpec, NoiseModel, gaussian_sensing_matrix, generate_group_signal,
                    measure, sign_consistency_error, sign_elementwise, snr_db, support_f1)
from .projections import (connected_components, fused_residual, normalized_tv, project_fused,
                          project_k_sparse, project_nonneg, project_normalized_tv_ball,
                          project_tv_ball, project_unit_sphere, tv)
from .solvers import SolverConfig, SolverTrace, Variant, solve

__all__ = [
    "BarrierKind", "barrier_value", "subgradient",
    "InvalidInputError", "ProjectionError", "RecoveryError",
    "GroupSignalSpec", "NoiseModel", "gaussian_sensing_matrix", "generate_group_signal",
    "measure", "sign_consistency_error", "sign_elementwise", "snr_db", "support_f1",
    "connected_components", "fused_residual", "normalized_tv", "project_fused",
    "project_k_sparse", "project_nonneg", "project_normalized_tv_ball", "project_tv_ball",
    "project_unit_sphere", "tv",
    "SolverConfig", "SolverTrace", "Variant", "solve",
]
