"""Path-counting estimate of pairwise node distances from a graph collection."""

from dataclasses import dataclass

import numpy as np

from ._rng import stream
from .exceptions import InvalidInputError
from .model import estimate_density


@dataclass
class DistanceMatrix:
    D: np.ndarray
    e: int = 1
    split: str = "first_half"

    @property
    def n(self):
        return self.D.shape[0]


def layer_split(m, split="first_half", seed=0):
    """Indices of the ``floor(m / 2)`` layers in the first half-sample."""
    k = m // 2
    if split == "first_half":
        return np.arange(k)
    if split == "seeded_random":
        return np.sort(stream(seed, "split").permutation(m)[:k])
    raise InvalidInputError(f"unknown split {split!r}")


def _half_mean(A, layers, e, scale):
    if e == 1:
        S = A[:, :, layers].astype(float).mean(axis=2)
    else:
        S = np.zeros(A.shape[:2])
        for l in layers:
            S += np.linalg.matrix_power(A[:, :, l].astype(float), e)
        S /= len(layers)
        S /= scale
    # drop k = i terms from the k-sums below
    np.fill_diagonal(S, 0.0)
    return S


def distance_matrix(G, split="first_half", e=1, seed=0):
    """Estimate ``int (fbar(x_i, v) - fbar(x_j, v))^2 dv`` for every node pair.

    Layers are split into two halves; ``r[i, j]`` averages, over the
    other nodes ``k``, the product of the first-half edge frequency of
    ``(i, k)`` with the second-half frequency of ``(k, j)``.  The distance
    is ``(r_ii + r_jj - r_ij - r_ji)_+ / rho_hat^2``.

    Parameters
    ----------
    G : GraphCollection
    split : {"first_half", "seeded_random"}
    e : int
        Path half-length; ``e > 1`` uses the ``e``-th power of each layer,
        scaled by ``(n rho_hat)^(e-1)``, which helps for sparse graphs.
    seed : int
        Only used by ``seeded_random``.

    Returns
    -------
    DistanceMatrix
    """
    n, m = G.n, G.m
    if m < 2:
        raise InvalidInputError("distance estimation needs multiple layers (m >= 2)")
    if n < 3:
        raise InvalidInputError("distance estimation needs n >= 3")
    if e < 1:
        raise InvalidInputError("path-length parameter e must be a positive integer")
    rho = estimate_density(G)
    if rho <= 0:
        raise InvalidInputError("empty collection: estimated density is zero")

    first = layer_split(m, split, seed)
    second = np.setdiff1d(np.arange(m), first)
    scale = (n * rho) ** (e - 1)
    S1 = _half_mean(G.A, first, e, scale)
    S2 = _half_mean(G.A, second, e, scale)

    R = S1 @ S2
    # i != j sums run over n - 2 nodes, the diagonal over n - 1
    R /= n - 2
    np.fill_diagonal(R, np.diag(R) * (n - 2) / (n - 1))

    d = np.diag(R)
    D = (d[:, None] + d[None, :]) - (R + R.T)  # grouped so D is exactly symmetric
    D = np.maximum(D, 0.0) / rho**2
    np.fill_diagonal(D, 0.0)
    label = split if split == "first_half" else f"seeded_random({seed})"
    return DistanceMatrix(D=D, e=int(e), split=label)
