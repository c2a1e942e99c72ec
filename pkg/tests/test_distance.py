import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multigraphon import GraphCollection, MultiGraphonSpec, distance_matrix, sample
from multigraphon.distance import layer_split
from multigraphon.exceptions import InvalidInputError
from multigraphon.model import true_distance_matrix

from _golden import GOLDEN


def loop_distance(A, first, second, e=1):
    """The path-count distance written out with explicit loops, as an oracle."""
    n = A.shape[0]
    A = A.astype(float)
    iu = np.triu_indices(n, k=1)
    rho = A[iu].sum() / (A.shape[2] * n * (n - 1) / 2)

    def half(layers):
        S = np.zeros((n, n))
        for l in layers:
            Al = A[:, :, l]
            P = Al.copy()
            for _ in range(e - 1):
                P = P @ Al
            S += P
        return S / len(layers) / (n * rho) ** (e - 1)

    S1, S2 = half(first), half(second)
    R = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            ks = [k for k in range(n) if k != i and k != j]
            R[i, j] = sum(S1[i, k] * S2[k, j] for k in ks) / len(ks)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = max(R[i, i] + R[j, j] - R[i, j] - R[j, i], 0.0) / rho**2
    return D


def two_block_collection():
    block = np.array([0, 0, 0, 1, 1])
    A = (block[:, None] == block[None, :]).astype(int)
    np.fill_diagonal(A, 0)
    return GraphCollection(np.stack([A, A], axis=2))


def random_collection(n, m, seed, p=0.4):
    rng = np.random.default_rng(seed)
    A = np.zeros((n, n, m), dtype=int)
    iu = np.triu_indices(n, k=1)
    for l in range(m):
        A[iu[0], iu[1], l] = rng.random(iu[0].size) < p
        A[:, :, l] += A[:, :, l].T
    return GraphCollection(A)


def test_two_block_hand_values():
    D = distance_matrix(two_block_collection()).D
    assert D[0, 1] == pytest.approx(GOLDEN["alg1_two_block_D12"], abs=1e-9)
    assert D[0, 3] == pytest.approx(GOLDEN["alg1_two_block_D14"], abs=1e-9)
    assert D[0, 1] < D[0, 3]


def test_two_block_e2_keeps_order():
    D = distance_matrix(two_block_collection(), e=2).D
    same = [D[0, 1], D[0, 2], D[1, 2], D[3, 4]]
    cross = [D[i, j] for i in range(3) for j in range(3, 5)]
    assert max(same) < min(cross)


def test_complete_graphs_give_zero():
    A = np.ones((6, 6, 4), dtype=int) - np.eye(6, dtype=int)[:, :, None]
    assert np.all(distance_matrix(GraphCollection(A)).D == 0)


@pytest.mark.parametrize("e", [1, 2, 3])
@pytest.mark.parametrize("split", ["first_half", "seeded_random"])
def test_matches_loop_oracle(e, split):
    G = random_collection(9, 5, seed=e)
    first = layer_split(G.m, split, seed=11)
    second = np.setdiff1d(np.arange(G.m), first)
    D = distance_matrix(G, split=split, e=e, seed=11)
    assert np.allclose(D.D, loop_distance(G.A, first, second, e), rtol=1e-12, atol=1e-12)
    assert D.e == e


def test_split_sizes():
    assert list(layer_split(7)) == [0, 1, 2]
    s = layer_split(9, "seeded_random", seed=4)
    assert s.size == 4 and np.all(np.diff(s) > 0)
    with pytest.raises(InvalidInputError):
        layer_split(4, "odd_layers")


@given(st.integers(3, 10), st.integers(2, 5), st.integers(0, 10**6))
def test_permutation_equivariance(n, m, seed):
    G = random_collection(n, m, seed)
    if G.A.sum() == 0:
        return
    perm = np.random.default_rng(seed).permutation(n)
    D = distance_matrix(G).D
    Dp = distance_matrix(G.permuted(perm)).D
    assert np.allclose(Dp, D[np.ix_(perm, perm)], rtol=1e-12, atol=1e-12)


@given(st.integers(3, 10), st.integers(2, 5), st.integers(0, 10**6))
def test_semimetric_shape(n, m, seed):
    G = random_collection(n, m, seed)
    if G.A.sum() == 0:
        return
    D = distance_matrix(G).D
    assert np.array_equal(D, D.T)
    assert np.all(np.diag(D) == 0)
    assert np.all(D >= 0)


def test_identical_layers_split_invariant():
    base = random_collection(8, 1, seed=3).A
    G = GraphCollection(np.repeat(base, 6, axis=2))
    a = distance_matrix(G).D
    for s in range(5):
        assert np.allclose(distance_matrix(G, split="seeded_random", seed=s).D, a, atol=1e-13)


def test_errors():
    with pytest.raises(InvalidInputError, match="multiple layers"):
        distance_matrix(random_collection(5, 1, 0))
    with pytest.raises(InvalidInputError, match="empty"):
        distance_matrix(GraphCollection(np.zeros((5, 5, 3), dtype=int)))
    with pytest.raises(InvalidInputError):
        distance_matrix(random_collection(5, 3, 0), e=0)


def test_f2_oracle_agreement_single_seed():
    spec = MultiGraphonSpec("f2", 0.0)
    G, lat = sample(spec, 150, 150, seed=0)
    D = distance_matrix(G).D
    T = true_distance_matrix(spec, lat.x)
    iu = np.triu_indices(150, k=1)
    assert np.mean(np.abs(D[iu] - T[iu])) <= 0.05


def test_unbiased_direction_over_seeds():
    spec = MultiGraphonSpec("f2", 0.0)
    iu = np.triu_indices(150, k=1)
    bias = []
    for seed in range(20):
        G, lat = sample(spec, 150, 150, seed=seed)
        diff = distance_matrix(G).D - true_distance_matrix(spec, lat.x)
        bias.append(diff[iu].mean())
    bias = np.array(bias)
    se = bias.std(ddof=1) / np.sqrt(bias.size)
    assert abs(bias.mean()) < 3 * se


def test_ordering_consistency():
    spec = MultiGraphonSpec("f2", 0.0)
    G, lat = sample(spec, 150, 150, seed=1)
    D = distance_matrix(G).D
    T = true_distance_matrix(spec, lat.x)
    rng = np.random.default_rng(0)
    q = rng.integers(0, 150, size=(100_000, 4))
    q = q[(q[:, 0] != q[:, 1]) & (q[:, 2] != q[:, 3])]
    t1, t2 = T[q[:, 0], q[:, 1]], T[q[:, 2], q[:, 3]]
    d1, d2 = D[q[:, 0], q[:, 1]], D[q[:, 2], q[:, 3]]
    gap = np.abs(t1 - t2)
    big = gap > np.median(gap)
    agree = np.sign(d1 - d2)[big] == np.sign(t1 - t2)[big]
    assert agree.mean() > 0.95
