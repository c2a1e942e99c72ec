"""Small-world summaries of simple graphs and resampling from a fitted kernel."""

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.sparse import csgraph, csr_matrix

from ._rng import stream
from .exceptions import InvalidInputError, UndefinedStatisticError

STATISTICS = ("density", "triangles", "transitivity", "avg_path_length")


@dataclass
class SimpleGraph:
    """Undirected, unweighted graph without self-loops."""

    adjacency: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.adjacency)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidInputError(f"adjacency must be square, got {A.shape}")
        if not np.array_equal(A, A.T):
            raise InvalidInputError("adjacency must be symmetric")
        if np.any(np.diag(A) != 0):
            raise InvalidInputError("self-loops are not allowed")
        if np.any((A != 0) & (A != 1)):
            raise InvalidInputError("adjacency must be binary")
        self.adjacency = A.astype(np.int64)

    @property
    def n(self):
        return self.adjacency.shape[0]


def _adj(g):
    return g.adjacency if isinstance(g, SimpleGraph) else SimpleGraph(g).adjacency


def density(g):
    A = _adj(g)
    n = A.shape[0]
    if n < 2:
        return 0.0
    return float(A.sum()) / (n * (n - 1))


def triangles(g):
    """Number of closed triples, ``trace(A^3) / 6``."""
    A = _adj(g).astype(float)
    return int(round(np.einsum("ij,jk,ki->", A, A, A) / 6.0))


def transitivity(g):
    """``3 * triangles / (number of paths of length two)``, or 0 without such paths."""
    A = _adj(g)
    deg = A.sum(axis=1)
    wedges = float(np.sum(deg * (deg - 1)) / 2.0)
    if wedges == 0:
        return 0.0
    return 3.0 * triangles(A) / wedges


def avg_path_length(g):
    """Mean shortest-path length over node pairs in the largest connected component.

    When several components share the largest size their pairs are pooled,
    which keeps the statistic independent of node labels.
    """
    A = _adj(g)
    if A.sum() == 0:
        raise UndefinedStatisticError("average path length is undefined for an edgeless graph")
    S = csr_matrix(A)
    _, labels = csgraph.connected_components(S, directed=False)
    sizes = np.bincount(labels)
    k = sizes.max()
    total, pairs = 0.0, 0
    for c in np.flatnonzero(sizes == k):
        keep = np.flatnonzero(labels == c)
        dist = csgraph.shortest_path(S[keep][:, keep], method="D", unweighted=True, directed=False)
        total += dist.sum()
        pairs += k * (k - 1)
    return float(total / pairs)


# -- resampling ----------------------------------------------------------------


@dataclass
class ResampleSummary:
    zvalue: float
    B: int
    level: float
    mean: dict
    lower: dict
    upper: dict
    skipped: int

    def rows(self):
        """``(zvalue, statistic, mean, lo, hi, skipped)`` tuples, one per statistic."""
        return [
            (self.zvalue, s, self.mean[s], self.lower[s], self.upper[s],
             self.skipped if s == "avg_path_length" else 0)
            for s in STATISTICS
        ]


def _probabilities(source, positions, zvalue):
    """Edge probabilities ``rho_hat * f_hat`` at ``(x_i, x_j, zvalue)``."""
    from .smoother import FitResult, predict_grid

    positions = np.asarray(positions, dtype=float)
    if isinstance(source, FitResult):
        P = predict_grid(source, positions, positions, [zvalue])[:, :, 0]
    elif callable(source):
        P = np.asarray(source(positions[:, None], positions[None, :], zvalue), dtype=float)
        P = np.broadcast_to(P, (positions.size, positions.size)).copy()
    else:
        P = np.full((positions.size, positions.size), float(source))
    P = np.clip((P + P.T) / 2.0, 0.0, 1.0)
    np.fill_diagonal(P, 0.0)
    return P


def _batch_stats(E, n):
    """Statistics for a batch of upper-triangle edge vectors ``E`` (k, n(n-1)/2)."""
    k = E.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    A = np.zeros((k, n, n))
    A[:, iu, ju] = E
    A[:, ju, iu] = E
    dens = E.mean(axis=1)
    A2 = A @ A
    tri = np.einsum("bij,bij->b", A2, A) / 6.0
    deg = A.sum(axis=2)
    wedges = np.sum(deg * (deg - 1), axis=1) / 2.0
    with np.errstate(invalid="ignore", divide="ignore"):
        trans = np.where(wedges > 0, 3.0 * tri / wedges, 0.0)
    return dens, np.rint(tri), trans, A


def _batch_path_lengths(A):
    """``avg_path_length`` for a stack of adjacency matrices by level-wise BFS.

    Edgeless graphs give NaN.  As in :func:`avg_path_length`, tied largest
    components are pooled.
    """
    k, n, _ = A.shape
    adj = A > 0
    reach = adj | np.eye(n, dtype=bool)[None]
    dist = adj.astype(float)
    level = 1
    while True:
        level += 1
        new = (np.matmul(reach.astype(float), A) > 0) & ~reach
        if not new.any():
            break
        dist[new] = level
        reach |= new
    out = np.full(k, np.nan)
    sizes = reach.sum(axis=2)  # size of each node's component
    for b in range(k):
        if not adj[b].any():
            continue
        top = sizes[b].max()
        members = sizes[b] == top
        # unreachable pairs carry distance 0, so tied components pool cleanly
        out[b] = dist[b][np.ix_(members, members)].sum() / (members.sum() * (top - 1))
    return out


def resample_stats(fit, positions, zvalue, B=10000, seed=0, level=0.95, batch=64):
    """Draw ``B`` graphs from a fitted kernel at one network position and summarise them.

    Parameters
    ----------
    fit : FitResult, callable or float
        A fitted multi-graphon, a probability function ``p(x, y, z)`` (already
        including the sparsity factor), or a constant edge probability.
    positions : array of length n
        Node positions at which to evaluate the kernel.
    zvalue : float
    B : int
        Number of graphs, at least 10.
    seed : int
    level : float
        Coverage of the percentile bands.

    Returns
    -------
    ResampleSummary
        Path lengths of edgeless draws are skipped and counted in ``skipped``.
    """
    if B < 10:
        raise InvalidInputError("resampling needs B >= 10 draws")
    if not 0 <= level < 1:
        raise InvalidInputError("level must lie in [0, 1)")
    P = _probabilities(fit, positions, zvalue)
    n = P.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    p = P[iu, ju]
    out = {s: np.empty(B) for s in STATISTICS}
    for b0 in range(0, B, batch):
        idx = range(b0, min(B, b0 + batch))
        # one stream per draw keeps results independent of the batch size
        E = np.stack([(stream(seed, "resample", b).random(p.size) < p) for b in idx]).astype(float)
        dens, tri, trans, A = _batch_stats(E, n)
        sl = slice(b0, b0 + len(idx))
        out["density"][sl] = dens
        out["triangles"][sl] = tri
        out["transitivity"][sl] = trans
        out["avg_path_length"][sl] = _batch_path_lengths(A)
    skipped = int(np.isnan(out["avg_path_length"]).sum())
    lo_q, hi_q = 50.0 * (1.0 - level), 50.0 * (1.0 + level)
    mean, lower, upper = {}, {}, {}
    for s, v in out.items():
        v = v[~np.isnan(v)]
        if v.size == 0:
            mean[s] = lower[s] = upper[s] = float("nan")
            continue
        mean[s] = float(v.mean())
        lower[s] = float(np.percentile(v, lo_q))
        upper[s] = float(np.percentile(v, hi_q))
    return ResampleSummary(float(zvalue), int(B), float(level), mean, lower, upper, skipped)


def expected_triangles(n, p):
    """Erdős–Rényi closed form ``C(n, 3) p^3``."""
    return comb(n, 3) * p**3
