import numpy as np
import pytest

from bfcs import projections as P
from bfcs.errors import InvalidInputError
from oracles import brute_k_sparse, flood_fill_components, tv_ball_reference


# -- K-sparse -----------------------------------------------------------------

def test_k_sparse_examples():
    assert P.project_k_sparse([[3, -1], [0, 2]], 2).tolist() == [[3, 0], [0, 2]]
    V = np.array([[0.0, 1.0], [-2.0, 0.0]])
    assert np.array_equal(P.project_k_sparse(V, 3), V)
    assert P.project_k_sparse([[1, 1]], 1).tolist() == [[1, 0]]


def test_k_sparse_tie_break_is_row_major():
    V = np.array([[1.0, -2.0], [2.0, -1.0]])
    assert P.project_k_sparse(V, 1).tolist() == [[0, -2], [0, 0]]
    assert P.project_k_sparse(V, 3).tolist() == [[1, -2], [2, 0]]


@pytest.mark.parametrize("K", [0, 5])
def test_k_sparse_rejects_bad_budget(K):
    with pytest.raises(InvalidInputError):
        P.project_k_sparse(np.ones((2, 2)), K)


def test_k_sparse_matches_enumeration_on_ties(rng):
    for _ in range(30):
        V = rng.integers(-2, 3, size=(2, 3)).astype(float)
        K = int(rng.integers(1, 4))
        ref, dist = brute_k_sparse(V, K)
        out = P.project_k_sparse(V, K)
        assert np.array_equal(out, ref)
        assert np.sum((V - out) ** 2) == dist


# -- sphere and orthant ---------------------------------------------------------

def test_sphere_and_nonneg():
    assert np.allclose(P.project_unit_sphere([[3.0], [4.0]]), [[0.6], [0.8]])
    e = np.array([[0.0, 1.0]])
    assert np.array_equal(P.project_unit_sphere(e), e)
    with pytest.raises(InvalidInputError):
        P.project_unit_sphere(np.zeros((2, 2)))
    assert P.project_nonneg([[-1, 2]]).tolist() == [[0, 2]]
    assert not P.project_nonneg(-np.ones((2, 3))).any()


# -- TV -------------------------------------------------------------------------

def test_tv_examples():
    X = np.array([[0.0, 1.0], [2.0, 3.0]])
    assert P.tv(np.full((3, 4), 2.5)) == 0.0
    assert P.tv(X) == 6.0
    assert P.tv(X, literal=True) == 3.0


def test_grid_edges_match_tv(rng):
    X = rng.standard_normal((5, 7))
    for literal in (False, True):
        h, t = P.grid_edges(5, 7, literal=literal)
        flat = X.ravel()
        assert np.isclose(np.abs(flat[t] - flat[h]).sum(), P.tv(X, literal=literal))
    assert P.grid_edges(5, 7)[0].size == 2 * 5 * 7 - 5 - 7


def test_tv_ball_interior_point_unchanged(rng):
    V = rng.standard_normal((4, 4))
    out = P.project_tv_ball(V, P.tv(V) + 1.0)
    assert np.array_equal(out, V)
    assert np.array_equal(P.project_tv_ball(V, np.inf), V)


def test_tv_ball_two_pixels():
    a, b, eps = 3.0, -1.0, 1.5
    out = P.project_tv_ball([[a, b]], eps)
    m, s = (a + b) / 2, np.sign(a - b)
    assert np.allclose(out, [[m + eps / 2 * s, m - eps / 2 * s]], atol=1e-9)


def test_tv_ball_small_radius_tends_to_mean(rng):
    V = rng.standard_normal((5, 6))
    out = P.project_tv_ball(V, 1e-9)
    assert np.allclose(out, V.mean(), atol=1e-8)


def test_tv_ball_rejects_nonpositive_radius():
    with pytest.raises(InvalidInputError):
        P.project_tv_ball(np.eye(3), 0.0)


def test_tv_ball_matches_reference(rng):
    # short version of the acceptance check, on a handful of 5x5 images
    for _ in range(3):
        V = rng.standard_normal((5, 5))
        eps = P.tv(V) * rng.uniform(0.1, 0.8)
        ref = tv_ball_reference(V, eps, n_iter=200_000)
        out = P.project_tv_ball(V, eps)
        assert np.linalg.norm(out - ref) <= 1e-4 * np.linalg.norm(ref)


def test_tv_ball_warm_start_gives_same_answer(rng):
    V = rng.standard_normal((20, 10))
    eps = 0.3 * P.tv(V)
    cold = P.project_tv_ball(V, eps)
    warm = P.TVWarmStart()
    P.project_tv_ball(V + 0.05 * rng.standard_normal(V.shape), eps, warm=warm)
    hot = P.project_tv_ball(V, eps, warm=warm)
    assert np.linalg.norm(hot - cold) <= 2e-6 * np.linalg.norm(V)


def test_tv_ball_is_optimal_against_feasible_perturbations(rng):
    # first-order check: moving towards any other feasible point cannot get closer to V
    V = rng.standard_normal((6, 6))
    eps = 0.4 * P.tv(V)
    Xs = P.project_tv_ball(V, eps, tol=1e-9)
    for _ in range(20):
        Z = P.project_tv_ball(rng.standard_normal((6, 6)), eps)
        assert np.dot((V - Xs).ravel(), (Z - Xs).ravel()) <= 1e-6 * np.linalg.norm(V) ** 2


# -- components -------------------------------------------------------------------

def test_components_examples():
    assert len(P.connected_components(np.zeros((3, 3)))) == 0
    assert len(P.connected_components([[1, 0], [0, 1]])) == 2
    full = P.connected_components(np.ones((4, 5)))
    assert len(full) == 1
    assert full.components[0].n_edges == 2 * 4 * 5 - 4 - 5


def test_components_against_flood_fill(rng):
    for _ in range(50):
        V = rng.standard_normal((6, 7)) * (rng.random((6, 7)) < 0.45)
        dec = P.connected_components(V)
        ref = flood_fill_components(V != 0)
        assert [sorted(map(tuple, c.nodes.tolist())) for c in dec] == ref
        for comp in dec:
            for (a, b), (c, d) in comp.edge_coords():
                assert abs(a - c) + abs(b - d) == 1


# -- normalized TV and fused set -----------------------------------------------------

def test_normalized_tv_examples():
    assert P.normalized_tv([1, 2, 4], [[0, 1], [1, 2]]) == 1.5
    assert P.normalized_tv([3, 3], [[0, 1]]) == 0.0
    assert P.normalized_tv([7.0], np.zeros((0, 2))) == 0.0


def test_normalized_tv_ball_examples():
    vals = np.array([1.0, 1.2, 1.1])
    edges = [[0, 1], [1, 2]]
    assert np.array_equal(P.project_normalized_tv_ball(vals, edges, 1.0), vals)
    assert np.allclose(P.project_normalized_tv_ball([0.0, 2.0], [[0, 1]], 1.0), [0.5, 1.5], atol=1e-9)
    path = np.array([1.0, -2.0, 5.0, 0.5])
    out = P.project_normalized_tv_ball(path, [[0, 1], [1, 2], [2, 3]], 0.0)
    assert np.allclose(out, path.mean())


def test_fused_examples():
    assert not P.project_fused(np.zeros((3, 3)), 2, 0.1).any()
    feasible = np.array([[1.0, 1.05, 0.0, -2.0]])
    assert np.array_equal(P.project_fused(feasible, 3, 0.1), feasible)
    out = P.project_fused([[5.0, 4.0, 0.0, -3.0]], 3, 0.0)
    assert np.allclose(out, [[4.5, 4.5, 0.0, -3.0]])
    assert out[0, 3] == -3.0


def test_fused_residual(rng):
    V = rng.standard_normal((8, 8))
    X = P.project_fused(V, 20, 0.05)
    assert P.fused_residual(X) <= 0.05 * (1 + 1e-6)
    assert P.fused_residual(np.zeros((2, 2))) == 0.0
