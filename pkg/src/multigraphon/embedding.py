"""One-dimensional ordinal embedding of nodes from a distance matrix.

Positions are fitted so that the embedded gaps ``|x_i - x_j|`` respect the
order of the estimated distances, by minimising a squared-hinge stress with
projected gradient descent from several random starts.
"""

from dataclasses import dataclass

import numba
import numpy as np
from scipy import stats

from ._rng import stream
from .exceptions import InvalidInputError

SCHEMES = ("within_row", "sampled_quadruples")
POLISH = (0.1, 0.01)
POLISH_ITER = 500
PLATEAU_STEP = 0.05


@dataclass
class OrdinalConstraintSet:
    """Quadruples ``(i, j, p, q)`` asserting ``D[i, j] < D[p, q]``."""

    constraints: np.ndarray
    scheme: str = "within_row"

    def __len__(self):
        return len(self.constraints)


@dataclass
class Embedding:
    positions: np.ndarray
    stress: float
    restarts_used: int
    violated_fraction: float
    margin: float = 0.0


def _as_matrix(D):
    return np.asarray(getattr(D, "D", D), dtype=float)


def build_constraints(D, scheme="within_row", count=None, seed=0):
    """Ordinal constraints implied by a distance matrix.

    ``within_row`` sorts each row's off-diagonal entries and links every
    consecutive strictly increasing pair, giving at most ``n (n - 2)``
    constraints.  ``sampled_quadruples`` draws ``count`` random pairs of
    node pairs and keeps those whose distances differ.  Ties never produce
    a constraint.
    """
    D = _as_matrix(D)
    n = D.shape[0]
    if n < 2:
        raise InvalidInputError("need at least two nodes")
    if scheme == "within_row":
        out = []
        for i in range(n):
            others = np.delete(np.arange(n), i)
            vals = D[i, others]
            order = np.argsort(vals, kind="stable")
            js, vs = others[order], vals[order]
            keep = vs[1:] > vs[:-1]
            if np.any(keep):
                near, far = js[:-1][keep], js[1:][keep]
                block = np.empty((near.size, 4), dtype=np.int64)
                block[:, 0] = i
                block[:, 1] = near
                block[:, 2] = i
                block[:, 3] = far
                out.append(block)
        cons = np.concatenate(out) if out else np.empty((0, 4), dtype=np.int64)
        return OrdinalConstraintSet(cons, scheme)
    if scheme == "sampled_quadruples":
        if count is None:
            count = 20 * n * n
        rng = stream(seed, "quadruples")
        i, j, p, q = (rng.integers(0, n, size=count) for _ in range(4))
        ok = (i != j) & (p != q) & ~(((i == p) & (j == q)) | ((i == q) & (j == p)))
        i, j, p, q = i[ok], j[ok], p[ok], q[ok]
        a, b = D[i, j], D[p, q]
        differ = a != b
        i, j, p, q, a, b = i[differ], j[differ], p[differ], q[differ], a[differ], b[differ]
        swap = a > b
        cons = np.stack(
            [np.where(swap, p, i), np.where(swap, q, j), np.where(swap, i, p), np.where(swap, j, q)],
            axis=1,
        ).astype(np.int64)
        return OrdinalConstraintSet(cons, scheme)
    raise InvalidInputError(f"unknown constraint scheme {scheme!r}")


def hinge_stress(x, cons, margin):
    """``sum max(0, margin + |x_i - x_j| - |x_p - x_q|)^2`` (batched over rows of ``x``)."""
    x = np.atleast_2d(x)
    i, j, p, q = cons.T
    r = margin + np.abs(x[:, i] - x[:, j]) - np.abs(x[:, p] - x[:, q])
    return np.sum(np.maximum(r, 0.0) ** 2, axis=1)


def violated_fraction(x, cons):
    if len(cons) == 0:
        return 0.0
    i, j, p, q = np.asarray(cons).T
    bad = np.abs(x[i] - x[j]) >= np.abs(x[p] - x[q])
    return float(np.mean(bad))


def default_margin(D, cons):
    """10th percentile of positive constrained gaps, in units of ``max D``."""
    D = _as_matrix(D)
    if len(cons) == 0:
        return 0.0
    i, j, p, q = cons.T
    gaps = D[p, q] - D[i, j]
    gaps = gaps[gaps > 0]
    top = D.max()
    if gaps.size == 0 or top <= 0:
        return 0.0
    return float(np.percentile(gaps, 10) / top)


def _normalise(x):
    x = x - x.mean(axis=1, keepdims=True)
    sd = x.std(axis=1, keepdims=True)
    sd[sd == 0] = 1.0
    # unit-interval scale: sd of Uniform(0, 1)
    return x / sd * np.sqrt(1.0 / 12.0)


@numba.njit(cache=True)
def _descend_one(x, cons, margin, max_iter, step0, decay, tol):
    n = x.size
    grad = np.empty(n)
    sd0 = np.sqrt(1.0 / 12.0)
    step = step0
    checkpoint = np.inf
    for it in range(max_iter):
        grad[:] = 0.0
        loss = 0.0
        for c in range(cons.shape[0]):
            i, j, p, q = cons[c, 0], cons[c, 1], cons[c, 2], cons[c, 3]
            dij = x[i] - x[j]
            dpq = x[p] - x[q]
            r = margin + abs(dij) - abs(dpq)
            if r > 0.0:
                loss += r * r
                gij = 2.0 * r * np.sign(dij)
                gpq = 2.0 * r * np.sign(dpq)
                grad[i] += gij
                grad[j] -= gij
                grad[p] -= gpq
                grad[q] += gpq
        if loss == 0.0:
            break
        # plateau check every 100 steps, once steps are too short to hop nodes
        if it % 100 == 0 and step < PLATEAU_STEP:
            if checkpoint - loss <= tol * loss:
                break
            checkpoint = loss
        x = x - step * grad / np.max(np.abs(grad))
        x = x - x.mean()
        sd = x.std()
        if sd > 0.0:
            x = x / sd * sd0
        step *= decay
    return x


def _descend(x, cons, margin, max_iter, step0, step_end, tol):
    """Projected gradient descent on the hinge stress, one start per row of ``x``."""
    decay = (step_end / step0) ** (1.0 / max(1, max_iter - 1))
    cons = np.ascontiguousarray(cons, dtype=np.int64)
    args = (cons, float(margin), int(max_iter), float(step0), decay, float(tol))
    return np.stack([_descend_one(row.copy(), *args) for row in x])


def _rescale(x):
    n = x.size
    lo, hi = x.min(), x.max()
    if hi - lo <= 0:
        return np.arange(1, n + 1) / (n + 1)
    return 1.0 / (n + 1) + (x - lo) / (hi - lo) * (n - 1) / (n + 1)


def embed_1d(
    D,
    restarts=10,
    max_iter=2000,
    margin=None,
    step=1.0,
    step_end=1e-4,
    tol=1e-4,
    scheme="within_row",
    constraints=None,
    seed=0,
):
    """Embed nodes on a line so that embedded gaps follow the order of ``D``.

    Parameters
    ----------
    D : DistanceMatrix or ndarray
    restarts : int
        Independent uniform-random starts; the lowest-stress one is kept.
    max_iter : int
        Gradient steps per start.
    margin : float, optional
        Hinge margin at the normalised scale (positions with the standard
        deviation of Uniform(0, 1)).  Defaults to :func:`default_margin`.
    step, step_end : float
        First and last step length of the geometric schedule; each step
        moves the furthest-moving node by exactly this much.  Long early
        steps let nodes jump past each other, which avoids folded local
        minima.
    tol : float
        Once the step length is below 0.05, a start stops early when 100
        steps improve its stress by less than this relative amount.
    scheme : str
        Passed to :func:`build_constraints` unless ``constraints`` is given.
    seed : int

    Returns
    -------
    Embedding
        Positions are min-max rescaled to ``[1/(n+1), n/(n+1)]``.  The
        winning start is polished at margins ``margin / 10`` and
        ``margin / 100``; ``stress`` and ``margin`` refer to the last one.
    """
    Dm = _as_matrix(D)
    n = Dm.shape[0]
    if n < 2:
        raise InvalidInputError("need at least two nodes")
    cons = constraints if constraints is not None else build_constraints(Dm, scheme, seed=seed)
    cons = np.asarray(getattr(cons, "constraints", cons), dtype=np.int64)
    if len(cons) == 0:
        pos = np.arange(1, n + 1) / (n + 1)
        return Embedding(pos, 0.0, 0, 0.0, 0.0)
    if margin is None:
        margin = default_margin(Dm, cons)

    starts = np.stack([stream(seed, "restart", r).random(n) for r in range(restarts)])
    x = _descend(_normalise(starts), cons, margin, max_iter, step, step_end, tol)
    s = hinge_stress(x, cons, margin)
    # ties resolved toward the lowest restart index
    best = x[int(np.argmin(s))][None, :]
    # polish: shrink the margin so constraints it made infeasible can still hold
    for shrink in POLISH:
        best = _descend(best, cons, margin * shrink, POLISH_ITER, 0.02, step_end, tol)
    final_margin = margin * POLISH[-1]
    pos = _rescale(best[0])
    return Embedding(
        positions=pos,
        stress=float(hinge_stress(best, cons, final_margin)[0]),
        restarts_used=int(restarts),
        violated_fraction=violated_fraction(pos, cons),
        margin=float(final_margin),
    )


def spearman(a, b):
    """Rank correlation, with average ranks for ties."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidInputError("spearman needs vectors of equal length")
    if a.size < 2:
        raise InvalidInputError("spearman needs at least two values")
    ra, rb = stats.rankdata(a), stats.rankdata(b)
    ra -= ra.mean()
    rb -= rb.mean()
    den = np.sqrt(np.sum(ra * ra) * np.sum(rb * rb))
    return float(np.sum(ra * rb) / den) if den > 0 else 0.0


def aligned_max_error(est, truth):
    """Max error after the best affine map (reflection allowed) onto ``truth``."""
    est = np.asarray(est, dtype=float)
    truth = np.asarray(truth, dtype=float)
    X = np.column_stack([np.ones_like(est), est])
    coef, *_ = np.linalg.lstsq(X, truth, rcond=None)
    return float(np.max(np.abs(X @ coef - truth)))
