"""Single-matrix reference estimators: USVT and neighbourhood smoothing."""

import numpy as np

from .exceptions import InvalidInputError


def _check_square(M, min_n):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] < min_n:
        raise InvalidInputError(f"need at least {min_n} nodes")
    return M


def usvt_threshold(M, eta=1.0, m_eff=1):
    """``(2 + eta) * sqrt(n * v / m_eff)`` with ``v = mean(M) * (1 - mean(M))``.

    The ``2 sqrt(n v)`` part is the spectral norm of a pure-noise matrix of
    that variance, so ``eta`` is the excess over the noise edge.
    """
    M = np.asarray(M, dtype=float)
    mu = float(M.mean())
    var = max(mu * (1.0 - mu), 0.0)
    return (2.0 + eta) * np.sqrt(M.shape[0] * var / max(m_eff, 1))


def usvt(M, eta=1.0, m_eff=1, tau=None):
    """Universal singular value thresholding of a symmetric matrix.

    Eigenvalues smaller in magnitude than :func:`usvt_threshold` are
    dropped; ``m_eff`` is the number of layers averaged into ``M``.  An
    explicit ``tau`` overrides the threshold.

    Returns
    -------
    ndarray
        Symmetric estimate clamped to ``[0, 1]``.
    """
    M = _check_square(M, 2)
    if not np.allclose(M, M.T, rtol=0, atol=1e-12):
        raise InvalidInputError("usvt needs a symmetric matrix")
    if tau is None:
        tau = usvt_threshold(M, eta, m_eff)
    lam, vec = np.linalg.eigh(M)
    keep = np.abs(lam) >= tau
    est = (vec[:, keep] * lam[keep]) @ vec[:, keep].T
    est = np.clip(est, 0.0, 1.0)
    return (est + est.T) / 2.0


def nbs_distances(M):
    """``max_k |<M_i - M_j, M_k>| / n`` over ``k`` outside ``{i, j}``."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    # divide by n last: for 0/1 input the products are exact integers, so equal
    # distances stay bitwise equal and quantile ties resolve consistently
    M2 = M @ M
    d = np.zeros((n, n))
    for i in range(n):
        diff = np.abs(M2[i][None, :] - M2)  # row j, column k
        diff[:, i] = -np.inf
        diff[np.arange(n), np.arange(n)] = -np.inf
        d[i] = diff.max(axis=1)
    d[np.arange(n), np.arange(n)] = 0.0
    return np.maximum(d, d.T) / n


def nbs_neighbourhoods(M, h=None):
    """Boolean ``N[i, j]``: ``j`` is a neighbour of ``i``.

    A node's threshold is the ``h``-quantile of its row of distances,
    the zero self-distance included; the node itself is never its own
    neighbour.  Distances within a relative ``1e-12`` of the threshold count
    as ties.  Because ``h (n - 1) >= 1`` for ``n >= 3``, each threshold is
    at least the row's smallest off-diagonal distance, so no neighbourhood
    is empty.
    """
    n = M.shape[0]
    if h is None:
        h = np.sqrt(np.log(n) / n)
    d = nbs_distances(M)
    q = np.quantile(d, h, axis=1)
    # distances equal up to rounding count as ties, so the result does not
    # depend on node order through floating-point summation order
    tol = 1e-12 * float(d.max())
    N = d <= q[:, None] + tol
    np.fill_diagonal(N, False)
    return N


def nbs(M, quantile_h=None):
    """Neighbourhood smoothing estimate of the edge-probability matrix.

    ``P[i, j]`` averages ``M[i, j']`` over the neighbours ``j'`` of ``j``;
    the result is symmetrised and clamped to ``[0, 1]``.
    """
    M = _check_square(M, 3)
    N = nbs_neighbourhoods(M, quantile_h).astype(float)
    P = M @ N.T / N.sum(axis=1)[None, :]
    P = np.clip((P + P.T) / 2.0, 0.0, 1.0)
    return P
