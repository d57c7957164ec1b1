import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from causalrank.errors import NumericalError, ValidationError
from causalrank.ranking import google_matrix, iteration_bound, rank_sources, row_normalize
from oracles import stationary_by_eig


def random_graph(rng, n, density=0.4):
    W = rng.random((n, n)) * (rng.random((n, n)) < density)
    return W


def test_row_normalize_examples():
    np.testing.assert_array_equal(row_normalize([[0, 2], [0, 0]]), [[0, 1], [0, 0]])
    np.testing.assert_array_equal(row_normalize(np.zeros((3, 3))), np.zeros((3, 3)))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (5, 5), elements=st.floats(0, 100)))
def test_row_normalize_rows_sum_to_one_or_zero(W):
    P = row_normalize(W)
    sums = P.sum(axis=1)
    for s, raw in zip(sums, W.sum(axis=1)):
        assert (abs(s - 1) < 1e-12) if raw > 0 else s == 0


def test_row_normalize_rejects():
    with pytest.raises(ValidationError):
        row_normalize([[1, -1], [0, 0]])
    with pytest.raises(ValidationError):
        row_normalize(np.zeros((2, 3)))


def test_google_matrix_hand_values():
    G = google_matrix([[0, 1], [1, 0]], 0.85)
    np.testing.assert_allclose(G, [[0.075, 0.925], [0.925, 0.075]], atol=1e-15)
    Z = google_matrix(np.zeros((4, 4)), 0.85)
    np.testing.assert_allclose(Z, 0.15 / 4, atol=1e-16)
    assert np.all(Z > 0)
    for g in (0.0, 1.0, -0.1):
        with pytest.raises(ValidationError):
            google_matrix(np.eye(2), g)


def test_matches_dense_eigensolver_on_random_graphs():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(2, 11))
        W = random_graph(rng, n)
        got = rank_sources(W).scores
        assert np.max(np.abs(got - stationary_by_eig(W))) < 1e-8


@pytest.mark.parametrize("n", [2, 3, 7, 10])
def test_symmetric_complete_graph_is_uniform(n):
    W = np.ones((n, n)) - np.eye(n)
    np.testing.assert_allclose(rank_sources(W).scores, 1 / n, atol=1e-10)


def test_chain_orders_sources_first():
    W = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=float)
    s = rank_sources(W).scores
    ref = stationary_by_eig(W)
    assert ref[0] > ref[1] > ref[2]
    assert s[0] > s[1] > s[2]
    assert list(rank_sources(W).ranks()) == [1, 2, 3]


def test_star_hub_outranks_leaves():
    n = 6
    W = np.zeros((n, n))
    W[0, 1:] = 1.0
    s = rank_sources(W).scores
    assert np.all(s[0] > s[1:])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_positive_normalised_and_scale_invariant(seed, scale):
    rng = np.random.default_rng(seed)
    W = random_graph(rng, int(rng.integers(2, 9)))
    r = rank_sources(W)
    assert np.all(r.scores > 0)
    assert abs(r.scores.sum() - 1) < 1e-12
    assert np.max(np.abs(rank_sources(scale * W).scores - r.scores)) < 1e-12
    assert r.iterations <= iteration_bound(0.85, 1e-10)


def test_max_normalized_view():
    r = rank_sources(np.array([[0, 1.0], [0, 0]]))
    assert r.max_normalized.max() == 1.0
    assert r.max_normalized[1] < 1


def test_empty_graph_is_uniform():
    np.testing.assert_allclose(rank_sources(np.zeros((4, 4))).scores, 0.25, atol=1e-15)


def test_large_graph_uses_sparse_path_and_agrees():
    rng = np.random.default_rng(3)
    n = 2100
    rows = rng.integers(0, n, 8 * n)
    cols = rng.integers(0, n, 8 * n)
    W = np.zeros((n, n))
    W[rows, cols] = rng.random(8 * n)
    big = rank_sources(W)
    # dense reference: same iteration done explicitly on the Google matrix
    G = google_matrix(row_normalize(W.T))
    pi = np.full(n, 1 / n)
    for _ in range(300):
        pi = pi @ G
        pi /= pi.sum()
    assert np.max(np.abs(big.scores - pi)) < 1e-9


def test_non_convergence_raises():
    W = np.array([[0, 1.0], [0, 0]])
    with pytest.raises(NumericalError, match="residual"):
        rank_sources(W, tol=1e-14, max_iter=2)
