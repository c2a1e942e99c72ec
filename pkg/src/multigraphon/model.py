"""Multi-graphon kernels, the graph-collection sampler and quadrature oracles.

A multi-graphon is a symmetric kernel ``f(x, y; z)`` on the unit cube.  Node
``i`` sits at latent position ``x_i``, layer ``l`` at network position
``z_l``, and edge ``(i, j)`` of layer ``l`` is Bernoulli with probability
``rho * f(x_i, x_j; z_l)``.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ._rng import stream
from .exceptions import InvalidInputError, InvalidSpecError, ProbabilityOverflowError

KINDS = ("f1", "f2", "f3", "grid")
MODES = ("replicated", "dynamic", "cross_section")

# normalising constant of f2 as printed, so that f2(x, x; 0) = 1 / 0.8522
F2_CONST = 0.8522

DEFAULT_QUAD_POINTS = 501


@dataclass(frozen=True, eq=False)
class MultiGraphonSpec:
    """A built-in multi-graphon (``f1``, ``f2``, ``f3``) or a gridded one.

    Parameters
    ----------
    kind : {"f1", "f2", "f3", "grid"}
    beta : float
        Heterogeneity coefficient; ``beta = 0`` gives replicated networks.
    values : ndarray of shape (nx, nx, nz), optional
        Lattice values on ``linspace(0, 1, .)`` along each axis, required
        for ``kind="grid"``.  Only the ``i <= j`` half is read; the other
        half is mirrored so the kernel is symmetric by construction.
    """

    kind: str
    beta: float = 0.0
    values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpecError(f"unknown kernel kind {self.kind!r}")
        if not np.isfinite(self.beta) or self.beta < 0:
            raise InvalidSpecError(f"beta must be a nonnegative real, got {self.beta}")
        if self.kind == "grid":
            vals = None if self.values is None else np.asarray(self.values, dtype=float)
            if vals is None or vals.size == 0:
                raise InvalidSpecError("grid kernel needs a nonempty lattice")
            if vals.ndim != 3 or vals.shape[0] != vals.shape[1] or min(vals.shape) < 2:
                raise InvalidSpecError(
                    f"grid lattice must have shape (k, k, nz) with k, nz >= 2, got {vals.shape}"
                )
            if np.any(vals < 0) or not np.all(np.isfinite(vals)):
                raise InvalidSpecError("grid lattice values must be finite and nonnegative")
            upper = np.triu(np.ones(vals.shape[:2], dtype=bool))
            sym = np.where(upper[:, :, None], vals, np.swapaxes(vals, 0, 1))
            object.__setattr__(self, "values", sym)
            axes = tuple(np.linspace(0.0, 1.0, k) for k in sym.shape)
            object.__setattr__(self, "_interp", RegularGridInterpolator(axes, sym))

    def __call__(self, x, y, z):
        return evaluate(self, x, y, z)


def evaluate(spec, x, y, z):
    """Evaluate ``f(x, y; z)``; arguments broadcast against each other."""
    x, y, z = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(y, dtype=float), np.asarray(z, dtype=float)
    )
    b = spec.beta
    if spec.kind == "f1":
        bz = b * z * z
        out = (x * y + bz) / (0.25 + bz)
    elif spec.kind == "f2":
        bz = b * z
        out = (np.exp(-np.abs(x - y) / 2.0) + bz) / (F2_CONST + bz)
    elif spec.kind == "f3":
        # block index ceil(2x), with x = 0 sent to block 1
        a = np.maximum(np.ceil(2.0 * x), 1.0)
        c = np.maximum(np.ceil(2.0 * y), 1.0)
        within = 0.7 - 0.0938 * b * z
        across = 0.3 + b * (x * y) * z  # x * y first keeps it exactly symmetric
        out = np.where(a == c, within, across)
    else:
        lo = np.minimum(x, y)
        hi = np.maximum(x, y)
        pts = np.stack([lo.ravel(), hi.ravel(), z.ravel()], axis=-1)
        out = spec._interp(np.clip(pts, 0.0, 1.0)).reshape(x.shape)
    return out


def sup_f(spec, resolution=101):
    """Grid estimate of ``sup f`` over ``[0, 1]^3``."""
    g = np.linspace(0.0, 1.0, resolution)
    best = 0.0
    for z in g:
        best = max(best, float(np.max(evaluate(spec, g[:, None], g[None, :], z))))
    return best


def default_rho(spec):
    """``1 / sup f`` capped at one; the benchmark default sparsity."""
    return min(1.0, 1.0 / sup_f(spec))


def _nodes(quad_points):
    if quad_points < 2:
        raise InvalidInputError("quad_points must be at least 2")
    t, w = np.polynomial.legendre.leggauss(int(quad_points))
    return (t + 1.0) / 2.0, w / 2.0


class FlatKernel:
    """The z-average ``fbar(u, v) = int_0^1 f(u, v; z) dz`` by fixed nodes."""

    def __init__(self, spec, quad_points=DEFAULT_QUAD_POINTS):
        self.spec = spec
        self.quad_points = int(quad_points)
        self._z, self._w = _nodes(self.quad_points)

    def __call__(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        if self.spec.beta == 0 and self.spec.kind != "grid":
            # built-ins do not depend on z when beta = 0
            return evaluate(self.spec, u, v, 0.0)
        vals = evaluate(self.spec, u[..., None], v[..., None], self._z)
        return vals @ self._w

    def matrix(self, u, v):
        """``fbar`` on the outer grid ``u x v``, chunked to bound memory."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        out = np.empty((u.size, v.size))
        step = max(1, 2_000_000 // max(1, v.size * self.quad_points))
        for s in range(0, u.size, step):
            out[s : s + step] = self(u[s : s + step, None], v[None, :])
        return out


def flatten(spec, quad_points=DEFAULT_QUAD_POINTS):
    return FlatKernel(spec, quad_points)


def kernel_mass(spec, quad_points=100):
    """``int f(x, y; z) dx dy dz`` over the unit cube.

    Each axis is split at 1/2 so the block kernel is integrated exactly.
    This is the factor by which ``P_hat / rho_hat`` rescales ``f``.
    """
    t, w = _nodes(quad_points)
    t = np.concatenate([t / 2.0, 0.5 + t / 2.0])
    w = np.concatenate([w, w]) / 2.0
    total = 0.0
    for zk, wk in zip(t, w):
        total += wk * float(w @ evaluate(spec, t[:, None], t[None, :], zk) @ w)
    return total


def true_distance(spec, xi, xj, quad_points=DEFAULT_QUAD_POINTS):
    """``int_0^1 (fbar(xi, v) - fbar(xj, v))^2 dv`` by quadrature."""
    if xi == xj:
        return 0.0
    fk = flatten(spec, quad_points)
    v, w = fk._z, fk._w
    diff = fk(xi, v) - fk(xj, v)
    return float(np.dot(w, diff * diff))


def true_distance_matrix(spec, x, quad_points=DEFAULT_QUAD_POINTS):
    """All pairwise ``true_distance`` values for latent positions ``x``."""
    fk = flatten(spec, quad_points)
    rows = fk.matrix(x, fk._z)  # (n, Q)
    weighted = rows * np.sqrt(fk._w)
    sq = np.sum(weighted**2, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * weighted @ weighted.T
    d = np.maximum(d, 0.0)
    np.fill_diagonal(d, 0.0)
    return d


@dataclass
class LatentDraw:
    """Latent node positions ``x``, network positions ``z`` and covariates."""

    x: np.ndarray
    z: np.ndarray
    z_check: np.ndarray
    mode: str


@dataclass
class GraphCollection:
    """``m`` undirected graphs on a shared node set, stored as ``A[i, j, l]``."""

    A: np.ndarray
    binary: bool = True
    rho: float = None

    def __post_init__(self):
        A = np.asarray(self.A)
        if A.ndim == 2:
            A = A[:, :, None]
        if A.ndim != 3 or A.shape[0] != A.shape[1]:
            raise InvalidInputError(f"adjacency tensor must be n x n x m, got {A.shape}")
        if np.any(A < 0):
            raise InvalidInputError("adjacency entries must be nonnegative")
        if not np.array_equal(A, np.swapaxes(A, 0, 1)):
            raise InvalidInputError("every layer must be symmetric")
        if np.any(np.diagonal(A, axis1=0, axis2=1) != 0):
            raise InvalidInputError("self-loops are not allowed")
        if self.binary and np.any((A != 0) & (A != 1)):
            raise InvalidInputError("binary collection has entries outside {0, 1}")
        self.A = A

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.A.shape[2]

    def mean_layer(self):
        """The aggregated adjacency ``Abar``, averaged over layers."""
        return self.A.mean(axis=2)

    def permuted(self, perm):
        perm = np.asarray(perm)
        return GraphCollection(self.A[np.ix_(perm, perm)], binary=self.binary, rho=self.rho)

    def subset_layers(self, layers):
        return GraphCollection(self.A[:, :, layers], binary=self.binary, rho=self.rho)


def estimate_density(G):
    """Average edge weight over node pairs and layers (``rho_hat``)."""
    if G.n < 2:
        raise InvalidInputError("density needs at least two nodes")
    iu = np.triu_indices(G.n, k=1)
    total = float(G.A[iu].sum())
    return total / (G.m * comb(G.n, 2))


def draw_latents(n, m, mode, sigma_cov=0.0, seed=0):
    if mode not in MODES:
        raise InvalidInputError(f"unknown sampling mode {mode!r}")
    x = stream(seed, "x").random(n)
    if mode == "dynamic":
        z = np.arange(1, m + 1) / m
    else:
        z = stream(seed, "z").random(m)
    if mode == "cross_section":
        z_check = z + stream(seed, "covariate").normal(0.0, sigma_cov, size=m)
    else:
        z_check = z.copy()
    return LatentDraw(x=x, z=z, z_check=z_check, mode=mode)


def probability_tensor(spec, x, z, rho):
    """``P[i, j, l] = rho * f(x_i, x_j; z_l)``."""
    return rho * evaluate(spec, x[:, None, None], x[None, :, None], z[None, None, :])


def sample(spec, n, m, rho=None, sigma_cov=0.0, mode="replicated", seed=0):
    """Draw a :class:`GraphCollection` from ``G(n, m, rho f)``.

    Parameters
    ----------
    spec : MultiGraphonSpec
    n, m : int
        Node and layer counts.
    rho : float, optional
        Sparsity; defaults to ``min(1, 1 / sup f)``.
    sigma_cov : float
        Standard deviation of covariate noise in ``cross_section`` mode.
    mode : {"replicated", "dynamic", "cross_section"}
    seed : int

    Returns
    -------
    (GraphCollection, LatentDraw)
    """
    if n < 2 or m < 1:
        raise InvalidInputError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    if sigma_cov < 0:
        raise InvalidInputError("sigma_cov must be nonnegative")
    if rho is None:
        rho = default_rho(spec)
    peak = rho * sup_f(spec)
    if peak > 1.0 + 1e-12:
        raise ProbabilityOverflowError(
            f"rho * sup f = {peak:.6g} exceeds 1 (rho={rho}); lower rho"
        )
    lat = draw_latents(n, m, mode, sigma_cov, seed)
    iu, ju = np.triu_indices(n, k=1)
    A = np.zeros((n, n, m), dtype=np.int8)
    for l in range(m):
        p = np.clip(rho * evaluate(spec, lat.x[iu], lat.x[ju], lat.z[l]), 0.0, 1.0)
        edge = (stream(seed, "edges", l).random(iu.size) < p).astype(np.int8)
        A[iu, ju, l] = edge
        A[ju, iu, l] = edge
    return GraphCollection(A, binary=True, rho=float(rho)), lat
