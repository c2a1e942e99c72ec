"""Kernel regression of edge indicators on embedded node and network positions.

The response ``A[i, j, l]`` (``i != j``) is regressed on
``(positions[i], positions[j], netpos[l])`` with a product kernel.  Because
the design is a full grid, every kernel sum factorises into three small
weight matrices contracted against the response tensor, so evaluating the
fit at all ``n * n * m`` design triples costs ``O(n^3 m + n^2 m^2)``.
"""

from dataclasses import dataclass, field, replace
from math import ceil

import numpy as np
from scipy.special import expit, logit

from ._rng import stream
from .exceptions import InvalidInputError
from .model import estimate_density

METHODS = ("nadaraya_watson", "local_linear")
KERNELS = ("uniform", "epanechnikov", "gaussian")
LINKS = ("identity", "logit")
REGIMES = ("Standard", "PerEdge", "PerNetwork")

LOGIT_EPS = 1e-6
CV_MULTIPLIERS = (0.5, 1.0, 2.0)
MAX_WIDENINGS = 60


@dataclass(frozen=True)
class SmootherConfig:
    """Smoother settings.

    ``bandwidth_x`` / ``bandwidth_z`` may be ``"auto"``, which resolves to
    ``sd(design) * N ** (-1 / (d + 4))`` with ``N`` the number of
    response points and ``d`` the regression dimension.  ``cv=True`` then
    scales both by the best of ``0.5, 1, 2`` under 5-fold cross-validation.
    """

    method: str = "nadaraya_watson"
    kernel: str = "epanechnikov"
    bandwidth_x: object = "auto"
    bandwidth_z: object = "auto"
    link: str = "identity"
    cv: bool = False
    cv_seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInputError(f"unknown smoothing method {self.method!r}")
        if self.kernel not in KERNELS:
            raise InvalidInputError(f"unknown kernel {self.kernel!r}")
        if self.link not in LINKS:
            raise InvalidInputError(f"unknown link {self.link!r}")
        for name in ("bandwidth_x", "bandwidth_z"):
            bw = getattr(self, name)
            if bw != "auto" and not (np.isfinite(bw) and bw > 0):
                raise InvalidInputError(f"{name} must be positive or 'auto', got {bw!r}")


@dataclass
class FitResult:
    """Fitted edge probabilities ``P_hat`` and intensities ``f_hat = P_hat / rho_hat``.

    Diagonal entries hold the local fit at ``(x_i, x_i, z_l)`` but carry no
    data; :attr:`evaluable` masks them out.
    """

    P_hat: np.ndarray
    f_hat: np.ndarray
    rho_hat: float
    positions: np.ndarray
    netpos: np.ndarray
    config: SmootherConfig
    kind: str = "multigraphon"
    widenings: int = 0
    _Y: np.ndarray = field(default=None, repr=False)
    _M: np.ndarray = field(default=None, repr=False)

    @property
    def evaluable(self):
        n = self.P_hat.shape[0]
        return ~np.eye(n, dtype=bool)


def oracle_positions(n):
    """Equispaced ``i / (n + 1)``, the expected order statistics of Uniform(0, 1)."""
    if n < 1:
        raise InvalidInputError("n must be positive")
    return np.arange(1, n + 1) / (n + 1)


def select_regime(n, m, rho_hat):
    """Pick the estimation route for a given ``(n, m, rho_hat)``.

    ``PerEdge`` when there are more layers than node pairs (``m > n^2``),
    ``PerNetwork`` when layers are too few for the pooled fit
    (``m < (n rho_hat^2)^(-1/2)``), otherwise ``Standard``.
    """
    if m > n * n:
        return "PerEdge"
    denom = n * rho_hat * rho_hat
    if denom <= 0 or m < denom ** -0.5:
        return "PerNetwork"
    return "Standard"


# -- kernels and bandwidths ------------------------------------------------


def kernel_values(kernel, u):
    u = np.asarray(u, dtype=float)
    if kernel == "uniform":
        return np.where(np.abs(u) <= 1.0, 0.5, 0.0)
    if kernel == "epanechnikov":
        return 0.75 * np.maximum(1.0 - u * u, 0.0)
    if kernel == "gaussian":
        return np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)
    raise InvalidInputError(f"unknown kernel {kernel!r}")


def _weights(kernel, at, design, h, power=0):
    d = np.asarray(design, dtype=float)[None, :] - np.asarray(at, dtype=float)[:, None]
    w = kernel_values(kernel, d / h)
    return w * d**power if power else w


def rule_of_thumb(values, n_points, dim):
    """``sd(values) * n_points ** (-1 / (dim + 4))``; 1.0 when ``values`` is constant."""
    sd = float(np.std(values))
    if sd <= 0:
        return 1.0
    return sd * n_points ** (-1.0 / (dim + 4))


# -- separable kernel sums ---------------------------------------------------


def _contract_ab(Wa, Wb, T):
    """``sum_ij Wa[a, i] Wb[b, j] T[i, j, ...]`` as an (A, B, ...) array."""
    t = np.tensordot(Wa, T, axes=(1, 0))  # (A, n, ...)
    t = np.tensordot(Wb, t, axes=(1, 1))  # (B, A, ...)
    return np.swapaxes(t, 0, 1)


def _local_sums(design_x, design_z, Y, M, ea, eb, ec, hx, hz, kernel, method):
    """Kernel-weighted local estimate and total weight at every grid point.

    For three-dimensional fits ``Y`` and ``M`` are (n, n, m) and the output
    is (A, B, C); otherwise they are (n, n) and the output is (A, B).
    """
    three = design_z is not None
    powers = 3 if method == "local_linear" else 1
    Wa = [_weights(kernel, ea, design_x, hx, k) for k in range(powers)]
    Wb = [_weights(kernel, eb, design_x, hx, k) for k in range(powers)]
    Wc = [_weights(kernel, ec, design_z, hz, k) for k in range(powers)] if three else None
    MY = M * Y

    def z_stage(t, r, sl=slice(None)):
        return t @ Wc[r][sl].T if three else t

    den_ab = _contract_ab(Wa[0], Wb[0], M)
    num_ab = _contract_ab(Wa[0], Wb[0], MY)
    if method == "nadaraya_watson":
        den = z_stage(den_ab, 0)
        with np.errstate(invalid="ignore", divide="ignore"):
            est = z_stage(num_ab, 0) / den
        return est, den

    # local linear: intercept of a weighted least-squares fit of a plane.
    # basis terms are 1, (x_i - a), (x_j - b) and, in 3-D, (z_l - c)
    basis = [(0, 0, 0), (1, 0, 0), (0, 1, 0)] + ([(0, 0, 1)] if three else [])
    k = len(basis)
    part = {(0, 0, False): den_ab, (0, 0, True): num_ab}

    def ab(p, q, resp):
        key = (p, q, resp)
        if key not in part:
            part[key] = _contract_ab(Wa[p], Wb[q], MY if resp else M)
        return part[key]

    C = ec.size if three else 1
    A_, B_ = Wa[0].shape[0], Wb[0].shape[0]
    step = max(1, 2_000_000 // max(1, A_ * B_))
    den = np.empty((A_, B_, C)) if three else None
    est = np.empty((A_, B_, C)) if three else None
    scales = [hx, hx, hz]
    for c0 in range(0, C, step):
        sl = slice(c0, c0 + step)
        mat, rhs = None, None
        for u in range(k):
            for v in range(u, k):
                p, q, r = (x + y for x, y in zip(basis[u], basis[v]))
                val = z_stage(ab(p, q, False), r, sl)
                if mat is None:
                    mat = np.empty(val.shape + (k, k))
                    rhs = np.empty(val.shape + (k,))
                mat[..., u, v] = mat[..., v, u] = val
            p, q, r = basis[u]
            rhs[..., u] = z_stage(ab(p, q, True), r, sl)
        w0 = mat[..., 0, 0].copy()
        # tiny ridge on the slopes keeps sparse neighbourhoods solvable
        for u in range(1, k):
            mat[..., u, u] += 1e-8 * w0 * scales[u - 1] ** 2 + 1e-300
        sol = np.full(w0.shape, np.nan)
        ok = w0 > 0
        if ok.any():
            sol[ok] = np.linalg.solve(mat[ok], rhs[ok][..., None])[:, 0, 0]
        if not three:
            return sol, w0
        den[:, :, sl] = w0
        est[:, :, sl] = sol
    return est, den


def _evaluate(design_x, design_z, Y, M, ea, eb, ec, hx, hz, kernel, method, check=None):
    """Evaluate with bandwidth doubling until ``check``-selected points have weight.

    Only the axis with an empty neighbourhood is widened: the z axis when some
    evaluation point has no layer in reach, otherwise the node axes.
    """
    widen = 0
    while True:
        est, den = _local_sums(design_x, design_z, Y, M, ea, eb, ec, hx, hz, kernel, method)
        sel = den if check is None else den[check]
        if np.all(sel > 0) or widen >= MAX_WIDENINGS:
            return est, den, hx, hz, widen
        z_empty = design_z is not None and np.any(
            _weights(kernel, ec, design_z, hz).sum(axis=1) <= 0
        )
        if z_empty:
            hz = 2.0 * hz
        else:
            hx = 2.0 * hx
        widen += 1


def _to_prob(est, link):
    out = expit(est) if link == "logit" else est
    return np.clip(out, 0.0, 1.0)


def _response(A, link):
    Y = np.asarray(A, dtype=float)
    if link == "logit":
        Y = logit(np.clip(Y, LOGIT_EPS, 1.0 - LOGIT_EPS))
    return Y


def _offdiag_mask(n, m=None):
    off = 1.0 - np.eye(n)
    return off if m is None else np.repeat(off[:, :, None], m, axis=2)


def _symmetrise(P):
    return (P + np.swapaxes(P, 0, 1)) / 2.0


# -- fitting -----------------------------------------------------------------


def _check_lengths(G, positions, netpos):
    positions = np.asarray(positions, dtype=float)
    if positions.shape != (G.n,):
        raise InvalidInputError(f"need {G.n} node positions, got {positions.shape}")
    if netpos is not None:
        netpos = np.asarray(netpos, dtype=float)
        if netpos.shape != (G.m,):
            raise InvalidInputError(f"need {G.m} network positions, got {netpos.shape}")
    return positions, netpos


def resolve_config(config, positions, netpos, n_points):
    """Replace ``"auto"`` bandwidths by their rule-of-thumb values."""
    dim = 2 if netpos is None else 3
    hx = config.bandwidth_x
    if hx == "auto":
        hx = rule_of_thumb(positions, n_points, dim)
    hz = config.bandwidth_z
    if hz == "auto":
        hz = 1.0 if netpos is None else rule_of_thumb(netpos, n_points, dim)
    return replace(config, bandwidth_x=float(hx), bandwidth_z=float(hz))


def _cv_multiplier(positions, netpos, Y, M, config):
    """5-fold CV over node-pair/layer cells, scaling both bandwidths together."""
    n = positions.size
    draw = stream(config.cv_seed, "cv").integers(0, 5, size=M.shape)
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    if M.ndim == 3:
        upper = upper[:, :, None]
    fold = np.where(upper, draw, np.swapaxes(draw, 0, 1))
    scores = []
    for mult in CV_MULTIPLIERS:
        err, cnt = 0.0, 0
        for k in range(5):
            held = (fold == k) & (M > 0)
            est, den = _local_sums(
                positions, netpos, Y, M * ~held, positions, positions, netpos,
                mult * config.bandwidth_x, mult * config.bandwidth_z,
                config.kernel, config.method,
            )
            ok = held & (den > 0) & np.isfinite(est)
            err += float(np.sum((est[ok] - Y[ok]) ** 2))
            cnt += int(ok.sum())
        scores.append(err / cnt if cnt else np.inf)
    return CV_MULTIPLIERS[int(np.argmin(scores))]


def _fill_diagonal(P, positions, netpos, Y, M, hx, hz, config):
    """Fill any weightless diagonal cell by widening around that cell alone."""
    diag = np.diagonal(P, axis1=0, axis2=1)  # (m, n) or (n,)
    bad = ~np.isfinite(diag)
    if not bad.any():
        return P
    cols = np.unique(np.nonzero(bad)[-1])
    for a in cols:
        at = positions[a : a + 1]
        est, *_ = _evaluate(
            positions, netpos, Y, M, at, at, netpos, hx, hz, config.kernel, config.method
        )
        if netpos is None:
            P[a, a] = est[0, 0]
        else:
            P[a, a, :] = est[0, 0, :]
    return P


def _fit_grid(G_A, positions, netpos, config, n_points):
    """Shared body of the pooled fits; returns ``(est, resolved_config, widenings, Y, M)``."""
    n = positions.size
    Y = _response(G_A, config.link)
    M = _offdiag_mask(n, None if netpos is None else Y.shape[2])
    cfg = resolve_config(config, positions, netpos, n_points)
    if cfg.cv:
        mult = _cv_multiplier(positions, netpos, Y, M, cfg)
        cfg = replace(cfg, bandwidth_x=cfg.bandwidth_x * mult, bandwidth_z=cfg.bandwidth_z * mult)
    off = ~np.eye(n, dtype=bool)
    check = off if netpos is None else np.repeat(off[:, :, None], Y.shape[2], axis=2)
    est, den, hx, hz, widen = _evaluate(
        positions, netpos, Y, M, positions, positions, netpos,
        cfg.bandwidth_x, cfg.bandwidth_z, cfg.kernel, cfg.method, check=check,
    )
    cfg = replace(cfg, bandwidth_x=hx, bandwidth_z=hz)
    est = _fill_diagonal(est, positions, netpos, Y, M, hx, hz, cfg)
    return est, cfg, widen, Y, M


def fit_multigraphon(G, positions, netpos, config=None):
    """Three-dimensional fit of ``P[i, j, l]`` on ``(positions, positions, netpos)``.

    Parameters
    ----------
    G : GraphCollection
    positions : array of length n
        Estimated (or oracle) node positions.
    netpos : array of length m
        Network positions: time points, covariates or true ``z``.
    config : SmootherConfig, optional

    Returns
    -------
    FitResult
    """
    config = config or SmootherConfig()
    positions, netpos = _check_lengths(G, positions, netpos)
    if netpos is None:
        raise InvalidInputError("fit_multigraphon needs network positions")
    n, m = G.n, G.m
    est, cfg, widen, Y, M = _fit_grid(G.A, positions, netpos, config, n * (n - 1) * m)
    P = _symmetrise(_to_prob(est, cfg.link))
    rho = estimate_density(G)
    return FitResult(
        P_hat=P, f_hat=_intensity(P, rho), rho_hat=rho, positions=positions,
        netpos=netpos, config=cfg, kind="multigraphon", widenings=widen, _Y=Y, _M=M,
    )


def fit_replicated(G, positions, config=None, netpos=None):
    """Two-dimensional fit of the layer-averaged adjacency on node positions.

    The returned tensors repeat the same matrix for every layer.
    """
    config = config or SmootherConfig()
    positions, netpos = _check_lengths(G, positions, netpos)
    n, m = G.n, G.m
    est, cfg, widen, Y, M = _fit_grid(G.mean_layer(), positions, None, config, n * (n - 1))
    P2 = _symmetrise(_to_prob(est, cfg.link))
    P = np.repeat(P2[:, :, None], m, axis=2)
    rho = estimate_density(G)
    if netpos is None:
        netpos = np.arange(1, m + 1) / m
    return FitResult(
        P_hat=P, f_hat=_intensity(P, rho), rho_hat=rho, positions=positions,
        netpos=netpos, config=cfg, kind="replicated", widenings=widen, _Y=Y, _M=M,
    )


def _intensity(P, rho):
    if rho <= 0:
        return np.zeros_like(P)
    return P / rho


def _smooth_1d(netpos, Yp, at, h, kernel, method):
    """Per-row 1-D regression of ``Yp`` (pairs x m) on ``netpos``, evaluated at ``at``."""
    widen = 0
    while True:
        W0 = _weights(kernel, at, netpos, h)
        S0 = W0.sum(axis=1)
        if np.all(S0 > 0) or widen >= MAX_WIDENINGS:
            break
        h, widen = 2.0 * h, widen + 1
    T0 = Yp @ W0.T
    with np.errstate(invalid="ignore", divide="ignore"):
        if method == "nadaraya_watson":
            return T0 / S0, h, widen
        W1 = _weights(kernel, at, netpos, h, 1)
        W2 = _weights(kernel, at, netpos, h, 2)
        S1, S2 = W1.sum(axis=1), W2.sum(axis=1)
        T1 = Yp @ W1.T
        det = S0 * S2 - S1 * S1
        ll = (S2 * T0 - S1 * T1) / det
        # collinear neighbourhoods fall back to the local mean
        flat = np.abs(det) <= 1e-12 * np.maximum(S0 * S2, 1e-300)
        return np.where(flat, T0 / S0, ll), h, widen


def _pairwise_fit(R, netpos, config, kind, rho, positions, G_m):
    """Regress each pair's response series ``R[i, j, :]`` on ``netpos``."""
    n = R.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    h = config.bandwidth_z
    if h == "auto":
        h = rule_of_thumb(netpos, netpos.size, 1)
    Yp = _response(R[iu, ju, :], config.link)
    est, h, widen = _smooth_1d(netpos, Yp, netpos, float(h), config.kernel, config.method)
    vals = _to_prob(est, config.link)
    P = np.zeros((n, n, G_m))
    P[iu, ju, :] = vals
    P[ju, iu, :] = vals
    cfg = replace(config, bandwidth_z=float(h))
    if positions is None:
        positions = oracle_positions(n)
    res = FitResult(
        P_hat=P, f_hat=_intensity(P, rho), rho_hat=rho, positions=np.asarray(positions, float),
        netpos=netpos, config=cfg, kind=kind, widenings=widen, _Y=R, _M=None,
    )
    return res


def fit_per_edge(G, netpos, config=None, positions=None):
    """One 1-D regression per node pair of its edge series on ``netpos``.

    Suited to many more layers than node pairs.
    """
    config = config or SmootherConfig()
    if G.m < 2:
        raise InvalidInputError("per-edge regression needs m >= 2")
    netpos = np.asarray(netpos, dtype=float)
    if netpos.shape != (G.m,):
        raise InvalidInputError(f"need {G.m} network positions, got {netpos.shape}")
    return _pairwise_fit(
        G.A.astype(float), netpos, config, "per_edge", estimate_density(G), positions, G.m
    )


def fit_per_network(G, netpos, config=None, positions=None):
    """Estimate each layer separately by neighbourhood smoothing, then smooth over ``netpos``.

    Suited to few layers relative to network density.
    """
    from .baselines import nbs

    config = config or SmootherConfig()
    if G.n < 10:
        raise InvalidInputError("per-network estimation needs n >= 10")
    netpos = np.asarray(netpos, dtype=float)
    if netpos.shape != (G.m,):
        raise InvalidInputError(f"need {G.m} network positions, got {netpos.shape}")
    R = np.stack([nbs(G.A[:, :, l].astype(float)) for l in range(G.m)], axis=2)
    rho = estimate_density(G)
    if G.m == 1:
        cfg = replace(config, bandwidth_z=1.0 if config.bandwidth_z == "auto" else config.bandwidth_z)
        if positions is None:
            positions = oracle_positions(G.n)
        return FitResult(
            P_hat=R, f_hat=_intensity(R, rho), rho_hat=rho, positions=np.asarray(positions, float),
            netpos=netpos, config=cfg, kind="per_network", _Y=R,
        )
    return _pairwise_fit(R, netpos, config, "per_network", rho, positions, G.m)


# -- prediction ------------------------------------------------------------


def predict_grid(fit, xs, ys, zs):
    """Fitted probabilities on the grid ``xs x ys x zs``, clamped to ``[0, 1]``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    cfg = fit.config
    if fit.kind in ("per_edge", "per_network"):
        return _predict_pairwise(fit, xs, ys, zs)
    three = fit.kind == "multigraphon"
    netpos = fit.netpos if three else None

    def run(a, b):
        est, *_ = _evaluate(
            fit.positions, netpos, fit._Y, fit._M, a, b, zs if three else None,
            cfg.bandwidth_x, cfg.bandwidth_z, cfg.kernel, cfg.method,
        )
        if not three:
            est = np.repeat(est[:, :, None], zs.size, axis=2)
        return _to_prob(est, cfg.link)

    P = run(xs, ys)
    if xs.shape == ys.shape and np.array_equal(xs, ys):
        return _symmetrise(P)
    return (P + np.swapaxes(run(ys, xs), 0, 1)) / 2.0


def _node_index(fit, v):
    return int(np.argmin(np.abs(fit.positions - v)))


def _predict_pairwise(fit, xs, ys, zs):
    cfg = fit.config
    out = np.zeros((xs.size, ys.size, zs.size))
    for a, x in enumerate(xs):
        i = _node_index(fit, x)
        for b, y in enumerate(ys):
            j = _node_index(fit, y)
            if i == j:
                continue
            series = _response(fit._Y[i, j, :][None, :], cfg.link)
            est, _, _ = _smooth_1d(fit.netpos, series, zs, cfg.bandwidth_z, cfg.kernel, cfg.method)
            out[a, b, :] = _to_prob(est[0], cfg.link)
    return out


def predict(fit, x, y, z):
    """Fitted edge probability at a single point ``(x, y, z)``."""
    return float(predict_grid(fit, [x], [y], [z])[0, 0, 0])


# -- subsampling bootstrap -----------------------------------------------------


@dataclass
class BootstrapBand:
    zgrid: np.ndarray
    curve: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    replicates: np.ndarray
    level: float


def _pair_curve(positions, netpos, Y, M, i, j, zgrid, cfg):
    at_i, at_j = positions[i : i + 1], positions[j : j + 1]
    est, *_ = _evaluate(
        positions, netpos, Y, M, at_i, at_j, zgrid,
        cfg.bandwidth_x, cfg.bandwidth_z, cfg.kernel, cfg.method,
    )
    rev, *_ = _evaluate(
        positions, netpos, Y, M, at_j, at_i, zgrid,
        cfg.bandwidth_x, cfg.bandwidth_z, cfg.kernel, cfg.method,
    )
    return (_to_prob(est[0, 0], cfg.link) + _to_prob(rev[0, 0], cfg.link)) / 2.0


def bootstrap_ci(G, positions, netpos, config, pair, zgrid, B=200, level=0.95, seed=0):
    """Percentile bands for one pair's fitted curve by layer subsampling.

    Each replicate refits on ``ceil(m / 2)`` layers drawn without
    replacement, holding node positions and the full-data bandwidths fixed.
    """
    if B < 10:
        raise InvalidInputError("bootstrap needs B >= 10 replicates")
    if G.m < 4:
        raise InvalidInputError("bootstrap needs m >= 4 layers")
    if not 0 <= level < 1:
        raise InvalidInputError("level must lie in [0, 1)")
    config = config or SmootherConfig()
    positions, netpos = _check_lengths(G, positions, netpos)
    i, j = pair
    zgrid = np.atleast_1d(np.asarray(zgrid, dtype=float))
    n, m = G.n, G.m
    cfg = resolve_config(config, positions, netpos, n * (n - 1) * m)
    Y = _response(G.A, cfg.link)
    M = _offdiag_mask(n, m)
    curve = _pair_curve(positions, netpos, Y, M, i, j, zgrid, cfg)
    half = ceil(m / 2)
    reps = np.empty((B, zgrid.size))
    for b in range(B):
        layers = np.sort(stream(seed, "bootstrap", b).choice(m, size=half, replace=False))
        reps[b] = _pair_curve(
            positions, netpos[layers], Y[:, :, layers], M[:, :, layers], i, j, zgrid, cfg
        )
    lo_q, hi_q = 50.0 * (1.0 - level), 50.0 * (1.0 + level)
    lower = np.percentile(reps, lo_q, axis=0)
    upper = np.percentile(reps, hi_q, axis=0)
    return BootstrapBand(zgrid, curve, lower, upper, reps, level)
