"""Compiled inner loops for graph total-variation problems.

Graphs are given as two int64 arrays ``heads`` and ``tails``; edge ``e`` carries
the difference ``x[tails[e]] - x[heads[e]]``.
"""
import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def graph_tv(x, heads, tails):
    s = 0.0
    for e in range(heads.shape[0]):
        s += abs(x[tails[e]] - x[heads[e]])
    return s


@njit(cache=True, fastmath=True)
def _primal(v, u, heads, tails, out):
    # out = v - D^T u
    for i in range(v.shape[0]):
        out[i] = v[i]
    for e in range(heads.shape[0]):
        out[heads[e]] += u[e]
        out[tails[e]] -= u[e]


@njit(cache=True, fastmath=True)
def tv_prox_dual(v, lam, u, heads, tails, step, gap_tol, max_iter, check_every):
    """Accelerated dual projected gradient for ``min 0.5|x-v|^2 + lam*TV(x)``.

    ``u`` holds the dual edge variables (box ``|u| <= lam``) and is updated in
    place; it doubles as the warm start. Returns ``(x, gap, iterations)`` where
    ``gap`` is the duality gap of the returned pair, so that
    ``|x - x*| <= sqrt(2 * gap)``.
    """
    n = v.shape[0]
    m = heads.shape[0]
    x = np.empty(n)
    w = u.copy()
    u_prev = u.copy()
    t = 1.0
    gap = np.inf
    it = 0
    while it < max_iter:
        # gradient step on the extrapolated point w
        _primal(v, w, heads, tails, x)
        for e in range(m):
            val = w[e] + step * (x[tails[e]] - x[heads[e]])
            if val > lam:
                val = lam
            elif val < -lam:
                val = -lam
            u_prev[e] = u[e]
            u[e] = val
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / t_next
        # adaptive restart keeps the scheme monotone-ish on warm starts
        inner = 0.0
        for e in range(m):
            inner += (w[e] - u[e]) * (u[e] - u_prev[e])
        if inner > 0.0:
            t_next = 1.0
            beta = 0.0
        for e in range(m):
            w[e] = u[e] + beta * (u[e] - u_prev[e])
        t = t_next
        it += 1
        if it % check_every == 0 or it == max_iter:
            _primal(v, u, heads, tails, x)
            g = 0.0
            for e in range(m):
                d = x[tails[e]] - x[heads[e]]
                g += lam * abs(d) - u[e] * d
            gap = g
            if gap <= gap_tol:
                break
    _primal(v, u, heads, tails, x)
    g = 0.0
    for e in range(m):
        d = x[tails[e]] - x[heads[e]]
        g += lam * abs(d) - u[e] * d
    return x, g, it


@njit(cache=True, fastmath=True)
def _grid_primal(v, p, q, x):
    # x = v - D^T (p, q), one row at a time with contiguous inner loops
    n, m = v.shape
    for i in range(n):
        for j in range(m):
            x[i, j] = v[i, j]
        if i < n - 1:
            for j in range(m):
                x[i, j] += p[i, j]
        if i > 0:
            for j in range(m):
                x[i, j] -= p[i - 1, j]
        for j in range(m - 1):
            x[i, j] += q[i, j]
        for j in range(1, m):
            x[i, j] -= q[i, j - 1]


@njit(cache=True, fastmath=True)
def _grid_gap(x, p, q, lam):
    n, m = x.shape
    g = 0.0
    for i in range(n - 1):
        for j in range(m):
            d = x[i + 1, j] - x[i, j]
            g += lam * abs(d) - p[i, j] * d
    for i in range(n):
        for j in range(m - 1):
            d = x[i, j + 1] - x[i, j]
            g += lam * abs(d) - q[i, j] * d
    return g


@njit(cache=True, fastmath=True)
def grid_tv_prox_dual(v, lam, p, q, step, gap_tol, max_iter, check_every):
    """Grid specialisation of :func:`tv_prox_dual`.

    ``p`` (n-1, m) and ``q`` (n, m-1) are the vertical and horizontal dual
    fields, updated in place.
    """
    n, m = v.shape
    x = np.empty_like(v)
    wp = p.copy()
    wq = q.copy()
    op = p.copy()
    oq = q.copy()
    t = 1.0
    it = 0
    while it < max_iter:
        _grid_primal(v, wp, wq, x)
        inner = 0.0
        for i in range(n - 1):
            for j in range(m):
                val = min(max(wp[i, j] + step * (x[i + 1, j] - x[i, j]), -lam), lam)
                old = p[i, j]
                inner += (wp[i, j] - val) * (val - old)
                op[i, j] = old
                p[i, j] = val
        for i in range(n):
            for j in range(m - 1):
                val = min(max(wq[i, j] + step * (x[i, j + 1] - x[i, j]), -lam), lam)
                old = q[i, j]
                inner += (wq[i, j] - val) * (val - old)
                oq[i, j] = old
                q[i, j] = val
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / t_next
        if inner > 0.0:
            # gradient-based restart
            t_next = 1.0
            beta = 0.0
        for i in range(n - 1):
            for j in range(m):
                wp[i, j] = p[i, j] + beta * (p[i, j] - op[i, j])
        for i in range(n):
            for j in range(m - 1):
                wq[i, j] = q[i, j] + beta * (q[i, j] - oq[i, j])
        t = t_next
        it += 1
        if it % check_every == 0:
            _grid_primal(v, p, q, x)
            if _grid_gap(x, p, q, lam) <= gap_tol:
                break
    _grid_primal(v, p, q, x)
    return x, _grid_gap(x, p, q, lam), it

