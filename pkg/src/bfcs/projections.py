"""Projections onto the constraint sets used by the recovery algorithms.

Covered here: K-sparse images, the (edge-complete, anisotropic) TV ball on the
pixel grid, 4-connected component decomposition of a support, normalized-TV
balls on components, the fused set built from both, the unit sphere and the
nonnegative orthant.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import _tvkernels
from .errors import InvalidInputError, ProjectionError

DEFAULT_TOL = 1e-6
INNER_MAX_ITER = 10_000
BISECTION_MAX_ITER = 100

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


def _as_matrix(V, name="V"):
    V = np.asarray(V, dtype=float)
    if V.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2D array, got shape {V.shape}")
    if not np.all(np.isfinite(V)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return V


# ---------------------------------------------------------------------------
# sparsity, sphere, orthant
# ---------------------------------------------------------------------------

def project_k_sparse(V, K):
    """Best K-term approximation of ``V``.

    Keeps the K entries of largest magnitude; among equal magnitudes the one
    earlier in row-major order wins.
    """
    V = _as_matrix(V)
    K = int(K)
    if not 1 <= K <= V.size:
        raise InvalidInputError(f"K={K} outside [1, {V.size}]")
    flat = V.ravel()
    out = np.zeros_like(flat)
    keep = np.argsort(-np.abs(flat), kind="stable")[:K]
    out[keep] = flat[keep]
    return out.reshape(V.shape)


def project_unit_sphere(X):
    X = _as_matrix(X, "X")
    nrm = np.linalg.norm(X)
    if nrm == 0.0:
        raise InvalidInputError("cannot project the zero matrix onto the unit sphere")
    return X / nrm


def project_nonneg(X):
    return np.maximum(_as_matrix(X, "X"), 0.0)


# ---------------------------------------------------------------------------
# total variation on the grid
# ---------------------------------------------------------------------------

def grid_edges(n_rows, n_cols, literal=False):
    """Edge list (heads, tails) of the 4-neighbour grid in flat row-major indices.

    Vertical edges come first, then horizontal ones. ``literal=True`` drops
    the vertical edges of the last column and the horizontal edges of the
    last row, which is the index range of the printed double sum.
    """
    idx = np.arange(n_rows * n_cols, dtype=np.int64).reshape(n_rows, n_cols)
    if literal:
        vh, vt = idx[:-1, :-1], idx[1:, :-1]
        hh, ht = idx[:-1, :-1], idx[:-1, 1:]
    else:
        vh, vt = idx[:-1, :], idx[1:, :]
        hh, ht = idx[:, :-1], idx[:, 1:]
    heads = np.concatenate([vh.ravel(), hh.ravel()])
    tails = np.concatenate([vt.ravel(), ht.ravel()])
    return heads, tails


def tv(X, literal=False):
    """Anisotropic total variation of a 2D array.

    By default every 4-neighbour pair of the grid contributes. With
    ``literal=True`` both sums stop one short of the last row/column.
    """
    X = _as_matrix(X, "X")
    if literal:
        core = X[:-1, :-1]
        return float(np.abs(X[1:, :-1] - core).sum() + np.abs(X[:-1, 1:] - core).sum())
    return float(np.abs(np.diff(X, axis=0)).sum() + np.abs(np.diff(X, axis=1)).sum())


@dataclass
class TVWarmStart:
    """Dual state carried between successive TV-ball projections.

    The solvers hand one of these to every projection of a run; consecutive
    inputs are close, so starting from the previous multiplier and dual
    edge field saves most inner iterations.
    """

    lam: float = 0.0
    dual: tuple | None = field(default=None, repr=False)
    slope: float | None = None
    evaluations: int = 0
    inner_iterations: int = 0


def _max_degree(heads, tails, n):
    deg = np.bincount(heads, minlength=n) + np.bincount(tails, minlength=n)
    return int(deg.max()) if deg.size else 0


def _scale_dual(dual, factor, lam):
    for d in dual:
        d *= factor
        np.clip(d, -lam, lam, out=d)


def _tv_ball_by_multiplier(v, radius, tv_fn, prox, new_dual, tol, warm, max_outer, tv_lipschitz):
    """Root search on the TV multiplier shared by the grid and graph projections.

    ``prox(lam, dual, inner_tol) -> (x, gap, iterations)`` solves the TV prox
    at ``lam`` to relative accuracy ``inner_tol`` and updates the dual fields
    in ``dual`` (a tuple of arrays) in place.

    A first pass solves the prox loosely far from the root and trusts the
    sign of ``TV(x) - radius`` as computed. If it cannot reach an acceptable
    point, a second pass restarts the bracket and only uses signs proven by
    the duality gap (``tv_lipschitz`` bounds ``|TV(x) - TV(y)| / |x - y|``).
    A point is accepted only after a strict solve.
    """
    tv_v = tv_fn(v)
    strict = 0.1 * tol
    mean = v.mean()
    budget = 0.5 * tol * np.linalg.norm(v)

    def rescale_shift(x, g):
        # distance moved by scaling x about its mean onto TV = radius
        return abs(g) / (g + radius) * np.linalg.norm(x - mean)

    if warm is not None and warm.dual is not None and warm.lam > 0 \
            and all(w.shape == d.shape for w, d in zip(warm.dual, new_dual)):
        lam0 = warm.lam
        dual = tuple(d.copy() for d in warm.dual)
        slope0 = warm.slope
    else:
        # scale guess: value range times the fraction of TV to remove
        lam0 = float(np.ptp(v)) * (1.0 - radius / tv_v) / 4.0
        dual = new_dual
        slope0 = None
    state = {"lam_of_dual": lam0, "evals": 0, "inner": 0}

    def evaluate(lam, inner_tol, certify):
        if state["lam_of_dual"] > 0:
            _scale_dual(dual, lam / state["lam_of_dual"], lam)
        while True:
            x, gap, it = prox(lam, dual, inner_tol)
            state["lam_of_dual"] = lam
            state["evals"] += 1
            state["inner"] += it
            g = tv_fn(x) - radius
            if inner_tol <= strict or not certify \
                    or abs(g) > tv_lipschitz * np.sqrt(2.0 * max(gap, 0.0)):
                return x, g, inner_tol
            inner_tol = max(strict, 0.01 * inner_tol)

    def search(lam, slope, certify):
        lo, g_lo = 0.0, tv_v - radius
        hi, g_hi = np.inf, -radius
        prev = (0.0, tv_v - radius) if slope is None else None
        best = None
        start = state["evals"]
        x, g, inner_tol = evaluate(lam, 1e-3, certify)
        while True:
            shift = rescale_shift(x, g)
            if shift <= budget and inner_tol > strict:
                x, g, inner_tol = evaluate(lam, strict, certify)
                continue
            if inner_tol <= strict and (best is None or shift < best[2]):
                best = (x, g, shift)
            if shift <= budget and inner_tol <= strict:
                break
            if state["evals"] - start >= max_outer:
                break
            if g > 0:
                lo, g_lo, side = lam, g, "lo"
            else:
                hi, g_hi, side = lam, g, "hi"
            if prev is not None and prev[0] != lam:
                s = (g - prev[1]) / (lam - prev[0])
                if s < 0:
                    slope = s
            prev = (lam, g)
            if np.isinf(hi):
                cand = lam - g / slope if slope is not None else 2.0 * lam
                lam = min(max(cand, 1.1 * lam), 8.0 * lam)
            else:
                width = hi - lo
                if width <= 1e-15 * hi:
                    break
                cand = lam - g / slope if slope is not None else np.nan
                if not (lo < cand < hi):
                    cand = lo + width * g_lo / (g_lo - g_hi)
                    # Illinois damping of the end that was not just replaced
                    if side == "lo":
                        g_hi *= 0.5
                    else:
                        g_lo *= 0.5
                # keep off the bracket ends so the bracket keeps shrinking
                if not (lo + 1e-3 * width < cand < hi - 1e-3 * width):
                    cand = 0.5 * (lo + hi)
                lam = cand
            x, g, inner_tol = evaluate(lam, max(strict, min(1e-3, 0.01 * abs(g) / radius)), certify)
        return best, slope

    best, slope = search(lam0, slope0, certify=False)
    if best is None or best[2] > budget:
        fallback, slope = search(state["lam_of_dual"], None, certify=True)
        if fallback is not None and (best is None or fallback[2] < best[2]):
            best = fallback

    if warm is not None:
        warm.lam = state["lam_of_dual"]
        warm.dual = tuple(d.copy() for d in dual)
        warm.slope = slope
        warm.evaluations += state["evals"]
        warm.inner_iterations += state["inner"]

    if best is None:
        raise ProjectionError("TV-ball projection never reached a strict prox solve",
                              best=None, residual=np.inf)
    best_x, best_g, best_shift = best
    x = mean + (best_x - mean) * (radius / (best_g + radius))
    if best_shift > budget:
        raise ProjectionError(
            f"TV-ball projection stopped {best_shift:.3e} away from the boundary "
            f"(budget {budget:.3e}) after {state['evals']} multiplier evaluations",
            best=x, residual=best_shift)
    return x


def graph_tv_ball(v, heads, tails, radius, tol=DEFAULT_TOL, warm=None,
                  max_inner=INNER_MAX_ITER, max_outer=BISECTION_MAX_ITER):
    """Euclidean projection of the node vector ``v`` onto ``{x: TV_G(x) <= radius}``.

    The graph must be connected. The multiplier of the TV term is found by a
    bracketing root search (secant / Illinois regula falsi with a bisection
    fallback) on ``lam -> TV(prox_{lam TV}(v)) - radius``; each evaluation
    solves the TV prox by accelerated projected gradient on its edge dual,
    step ``1 / (2 * max degree)``, until the duality gap certifies the inner
    accuracy. The search stops once scaling the prox point about its mean
    onto ``TV = radius`` moves it by at most ``tol * |v| / 2``, and that
    scaled point is returned, so the output lies on the sphere up to rounding.
    """
    v = np.ascontiguousarray(v, dtype=float)
    heads = np.ascontiguousarray(heads, dtype=np.int64)
    tails = np.ascontiguousarray(tails, dtype=np.int64)
    if radius < 0 or np.isnan(radius):
        raise InvalidInputError(f"TV radius must be >= 0, got {radius}")
    if _tvkernels.graph_tv(v, heads, tails) <= radius:
        return v.copy()
    if radius == 0.0:
        return np.full_like(v, v.mean())
    step = 1.0 / (2.0 * max(_max_degree(heads, tails, v.size), 1))
    norm_v = np.linalg.norm(v)

    def prox(lam, dual, inner_tol):
        gap_tol = 0.5 * (inner_tol * norm_v) ** 2
        return _tvkernels.tv_prox_dual(v, lam, dual[0], heads, tails, step, gap_tol, max_inner, 10)

    return _tv_ball_by_multiplier(
        v, radius, lambda x: _tvkernels.graph_tv(x, heads, tails), prox,
        (np.zeros(heads.shape[0]),), tol, warm, max_outer,
        np.sqrt(heads.shape[0] / (2.0 * step)))


def project_tv_ball(V, epsilon, tol=DEFAULT_TOL, warm=None,
                    max_inner=INNER_MAX_ITER, max_outer=BISECTION_MAX_ITER):
    """Project ``V`` onto ``{X : tv(X) <= epsilon}`` (edge-complete TV).

    Same scheme as :func:`graph_tv_ball`, with the dual fields stored as the
    vertical ``(N-1, L)`` and horizontal ``(N, L-1)`` difference arrays.
    Pass a :class:`TVWarmStart` to reuse the multiplier and dual fields of a
    previous call.
    """
    V = _as_matrix(V)
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    if tv(V) <= epsilon:
        return V.copy()
    n, m = V.shape
    V = np.ascontiguousarray(V)
    step = 1.0 / (2.0 * (min(n, 3) - 1 + min(m, 3) - 1))
    norm_v = np.linalg.norm(V)

    def prox(lam, dual, inner_tol):
        gap_tol = 0.5 * (inner_tol * norm_v) ** 2
        return _tvkernels.grid_tv_prox_dual(V, lam, dual[0], dual[1], step, gap_tol, max_inner, 10)

    n_edges = (n - 1) * m + n * (m - 1)
    return _tv_ball_by_multiplier(
        V, float(epsilon), tv, prox, (np.zeros((n - 1, m)), np.zeros((n, m - 1))),
        tol, warm, max_outer, np.sqrt(n_edges / (2.0 * step)))


# ---------------------------------------------------------------------------
# connected components and the fused set
# ---------------------------------------------------------------------------

@dataclass
class Component:
    """One 4-connected block of nonzeros.

    ``nodes`` is an ``(n, 2)`` array of (row, col) coordinates in row-major
    order; ``edges`` is an ``(m, 2)`` array of row indices into ``nodes``.
    """

    nodes: np.ndarray
    edges: np.ndarray

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_edges(self):
        return self.edges.shape[0]

    def edge_coords(self):
        """Edges as ((i, j), (k, l)) coordinate pairs."""
        return [(tuple(self.nodes[a]), tuple(self.nodes[b])) for a, b in self.edges]

    def values(self, V):
        return np.asarray(V)[self.nodes[:, 0], self.nodes[:, 1]]


@dataclass
class ComponentDecomposition:
    shape: tuple
    components: list
    labels: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


def connected_components(V):
    """Maximal 4-connected components of the nonzero support of ``V``.

    Components are ordered by their first node in row-major order.
    """
    V = _as_matrix(V)
    labels, count = ndimage.label(V != 0, structure=_FOUR_CONNECTED)
    # raster-scan labelling already numbers components by first pixel
    flat = labels.ravel()
    order = np.argsort(flat, kind="stable")
    sorted_labels = flat[order]
    starts = np.searchsorted(sorted_labels, np.arange(1, count + 2))
    local = np.empty(V.size, dtype=np.int64)
    comps_nodes = []
    for k in range(count):
        members = order[starts[k]:starts[k + 1]]
        local[members] = np.arange(members.size)
        comps_nodes.append(members)

    n_cols = V.shape[1]
    heads, tails = grid_edges(*V.shape)
    lh, lt = flat[heads], flat[tails]
    inside = (lh != 0) & (lh == lt)
    heads, tails, owner = heads[inside], tails[inside], lh[inside]
    edge_order = np.argsort(owner, kind="stable")
    heads, tails, owner = heads[edge_order], tails[edge_order], owner[edge_order]
    edge_starts = np.searchsorted(owner, np.arange(1, count + 2))

    components = []
    for k in range(count):
        members = comps_nodes[k]
        nodes = np.stack([members // n_cols, members % n_cols], axis=1)
        sl = slice(edge_starts[k], edge_starts[k + 1])
        edges = np.stack([local[heads[sl]], local[tails[sl]]], axis=1)
        components.append(Component(nodes=nodes, edges=edges))
    return ComponentDecomposition(shape=V.shape, components=components, labels=labels)


def normalized_tv(component_values, component_edges):
    """Mean absolute difference across the edges of one component (0 if it has none)."""
    vals = np.asarray(component_values, dtype=float)
    edges = np.asarray(component_edges, dtype=np.int64).reshape(-1, 2)
    if edges.shape[0] == 0:
        return 0.0
    return float(np.abs(vals[edges[:, 1]] - vals[edges[:, 0]]).mean())


def project_normalized_tv_ball(component_values, component_edges, epsilon, tol=DEFAULT_TOL):
    """Project one component's values onto its epsilon-radius normalized-TV ball.

    Equivalent to a graph-TV ball of radius ``epsilon * |E|``. Components
    without edges are returned unchanged.
    """
    vals = np.asarray(component_values, dtype=float)
    edges = np.asarray(component_edges, dtype=np.int64).reshape(-1, 2)
    if epsilon < 0 or np.isnan(epsilon):
        raise InvalidInputError(f"epsilon must be >= 0, got {epsilon}")
    if edges.shape[0] == 0 or np.isinf(epsilon):
        return vals.copy()
    return graph_tv_ball(vals, edges[:, 0], edges[:, 1], epsilon * edges.shape[0], tol=tol)


def project_fused(V, K, epsilon, tol=DEFAULT_TOL):
    """Projection onto K-sparse images whose nonzero blocks have small normalized TV.

    One pass: keep the K largest entries, then project every 4-connected block
    of the result onto its normalized-TV ball. Zeros of the sparse image stay zero.
    """
    U = project_k_sparse(V, K)
    if np.isinf(epsilon):
        return U
    X = U.copy()
    for comp in connected_components(U):
        if comp.n_edges == 0:
            continue
        r, c = comp.nodes[:, 0], comp.nodes[:, 1]
        X[r, c] = project_normalized_tv_ball(U[r, c], comp.edges, epsilon, tol=tol)
    return X


def fused_residual(X):
    """Largest normalized TV over the 4-connected blocks of ``X`` (0 when empty)."""
    worst = 0.0
    for comp in connected_components(X):
        worst = max(worst, normalized_tv(comp.values(X), comp.edges))
    return worst
