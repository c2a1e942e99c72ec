"""Plain-text formats for specs, networks, covariates, distances, embeddings and fits.

Network files hold one undirected pair per line as ``layer i j weight``
(1-indexed, comma-, tab- or space-delimited, ``#`` comments).  A leading
``# n=<nodes> m=<layers>`` comment fixes the sizes when isolated nodes or
empty layers would otherwise be lost.
"""

import os
import re

import numpy as np

from .distance import DistanceMatrix
from .exceptions import InvalidInputError, InvalidSpecError
from .model import GraphCollection, MultiGraphonSpec

_SPLIT = re.compile(r"[,\s]+")


def _lines(path):
    try:
        with open(path) as fh:
            raw = fh.read().splitlines()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    return raw


def _fields(line):
    return [t for t in _SPLIT.split(line.strip()) if t]


def _number(tok, kind, where):
    try:
        return kind(tok)
    except ValueError:
        raise InvalidInputError(f"{where}: cannot parse {tok!r}") from None


# -- flat key=value configs ----------------------------------------------------


def read_config(path):
    """``key=value`` lines into a dict of strings; blank lines and ``#`` comments skipped."""
    out = {}
    for k, line in enumerate(_lines(path), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"{path}:{k}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise InvalidInputError(f"{path}:{k}: empty key")
        out[key.replace("-", "_")] = value
    return out


def write_config(path, values):
    with open(path, "w") as fh:
        for k, v in values.items():
            fh.write(f"{k}={v}\n")


# -- kernel specs ----------------------------------------------------------------


def read_grid(path):
    """Lattice file: header ``nx ny nz`` then ``nx * ny * nz`` values, last axis fastest."""
    toks = [t for line in _lines(path) for t in _fields(line.split("#", 1)[0])]
    if len(toks) < 3:
        raise InvalidSpecError(f"{path}: missing 'nx ny nz' header")
    shape = tuple(_number(t, int, path) for t in toks[:3])
    vals = np.array([_number(t, float, path) for t in toks[3:]])
    if vals.size != np.prod(shape):
        raise InvalidSpecError(f"{path}: header says {np.prod(shape)} values, found {vals.size}")
    return vals.reshape(shape)


def write_grid(path, values):
    values = np.asarray(values, dtype=float)
    with open(path, "w") as fh:
        fh.write(" ".join(str(s) for s in values.shape) + "\n")
        np.savetxt(fh, values.reshape(-1, values.shape[-1]), fmt="%.17g")


def spec_from_config(cfg, base_dir="."):
    """Build a :class:`MultiGraphonSpec` from ``kind``, ``beta`` and, for grids, ``grid``."""
    kind = cfg.get("kind")
    if kind is None:
        raise InvalidSpecError("spec config needs kind=f1|f2|f3|grid")
    beta = _number(cfg.get("beta", "0"), float, "beta")
    values = None
    if kind == "grid":
        if "grid" not in cfg:
            raise InvalidSpecError("grid spec needs grid=<path>")
        path = cfg["grid"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        values = read_grid(path)
    return MultiGraphonSpec(kind, beta, values)


def read_spec(path):
    return spec_from_config(read_config(path), os.path.dirname(os.path.abspath(path)))


def write_spec(path, spec, grid_name="grid.txt"):
    cfg = {"kind": spec.kind, "beta": repr(float(spec.beta))}
    if spec.kind == "grid":
        write_grid(os.path.join(os.path.dirname(os.path.abspath(path)), grid_name), spec.values)
        cfg["grid"] = grid_name
    write_config(path, cfg)


# -- networks and covariates -----------------------------------------------------


def _size_hint(line):
    hint = {}
    for key, val in re.findall(r"\b([nm])\s*=\s*(\d+)", line):
        hint[key] = int(val)
    return hint


def read_network(path, n=None, m=None):
    """Read an edge list into a :class:`GraphCollection`.

    Pairs must be listed once with ``i != j``; weights are nonnegative
    integers.  The collection is binary when every weight is 0 or 1.
    """
    rows, hint = [], {}
    for k, line in enumerate(_lines(path), 1):
        if line.lstrip().startswith("#"):
            hint.update(_size_hint(line))
            continue
        toks = _fields(line)
        if not toks:
            continue
        if len(toks) not in (3, 4):
            raise InvalidInputError(f"{path}:{k}: expected 'layer i j [weight]'")
        where = f"{path}:{k}"
        l, i, j = (_number(t, int, where) for t in toks[:3])
        w = _number(toks[3], float, where) if len(toks) == 4 else 1.0
        if w < 0 or w != int(w):
            raise InvalidInputError(f"{where}: weight must be a nonnegative integer, got {toks[3]}")
        if min(l, i, j) < 1:
            raise InvalidInputError(f"{where}: indices are 1-based")
        if i == j:
            raise InvalidInputError(f"{where}: self-loop {i}-{j}")
        rows.append((l, i, j, int(w)))
    n = n or hint.get("n") or max((max(r[1], r[2]) for r in rows), default=0)
    m = m or hint.get("m") or max((r[0] for r in rows), default=0)
    if n < 2 or m < 1:
        raise InvalidInputError(f"{path}: no usable data (n={n}, m={m})")
    A = np.zeros((n, n, m), dtype=np.int64)
    seen = set()
    for l, i, j, w in rows:
        if i > n or j > n or l > m:
            raise InvalidInputError(f"{path}: entry ({l}, {i}, {j}) outside n={n}, m={m}")
        key = (l, min(i, j), max(i, j))
        if key in seen:
            raise InvalidInputError(f"{path}: pair {key[1]}-{key[2]} listed twice in layer {l}")
        seen.add(key)
        A[i - 1, j - 1, l - 1] = A[j - 1, i - 1, l - 1] = w
    binary = bool(np.all(A <= 1))
    return GraphCollection(A.astype(np.int8) if binary else A, binary=binary)


def write_network(path, G):
    """Edge list of the nonzero pairs, with a size header."""
    n, m = G.n, G.m
    iu, ju = np.triu_indices(n, k=1)
    with open(path, "w") as fh:
        fh.write(f"# n={n} m={m}\n")
        fh.write("# layer\ti\tj\tweight\n")
        for l in range(m):
            w = G.A[iu, ju, l]
            for a, b, v in zip(iu[w != 0], ju[w != 0], w[w != 0]):
                fh.write(f"{l + 1}\t{a + 1}\t{b + 1}\t{int(v)}\n")


def read_covariates(path, m=None):
    """``layer value`` lines into a length-``m`` vector (every layer exactly once)."""
    vals = {}
    for k, line in enumerate(_lines(path), 1):
        if line.lstrip().startswith("#") or not line.strip():
            continue
        toks = _fields(line)
        if len(toks) != 2:
            raise InvalidInputError(f"{path}:{k}: expected 'layer value'")
        l = _number(toks[0], int, f"{path}:{k}")
        if l in vals:
            raise InvalidInputError(f"{path}:{k}: layer {l} repeated")
        vals[l] = _number(toks[1], float, f"{path}:{k}")
    m = m or max(vals, default=0)
    if sorted(vals) != list(range(1, m + 1)):
        raise InvalidInputError(f"{path}: need one value for each layer 1..{m}")
    return np.array([vals[l] for l in range(1, m + 1)])


def write_covariates(path, values):
    with open(path, "w") as fh:
        fh.write("# layer\tvalue\n")
        for l, v in enumerate(values, 1):
            fh.write(f"{l}\t{float(v)!r}\n")


# -- distances, embeddings, fits ---------------------------------------------------


def write_distance(path, D):
    Dm = getattr(D, "D", D)
    with open(path, "w") as fh:
        fh.write(f"{Dm.shape[0]}\n")
        np.savetxt(fh, Dm, fmt="%.17g")


def read_distance(path):
    lines = [l for l in _lines(path) if l.strip() and not l.lstrip().startswith("#")]
    if not lines:
        raise InvalidInputError(f"{path}: empty distance file")
    n = _number(lines[0].strip(), int, path)
    rows = [[_number(t, float, path) for t in _fields(l)] for l in lines[1:]]
    D = np.array(rows, dtype=float)
    if D.shape != (n, n):
        raise InvalidInputError(f"{path}: header says n={n}, matrix is {D.shape}")
    return DistanceMatrix(D)


def write_positions(path, positions):
    """Two columns: 1-based node id and position."""
    with open(path, "w") as fh:
        fh.write("# node_id\tposition\n")
        for i, p in enumerate(positions, 1):
            fh.write(f"{i}\t{float(p)!r}\n")


def read_positions(path, n=None):
    return read_covariates(path, n)


def write_fit(out_dir, fit):
    """Per-layer ``P_hat`` matrices, node positions and a manifest.

    ``manifest.tsv`` lists ``layer``, ``netpos`` and the matrix file;
    ``fit.conf`` records the smoother settings and ``rho_hat``.
    """
    os.makedirs(out_dir, exist_ok=True)
    m = fit.P_hat.shape[2]
    with open(os.path.join(out_dir, "manifest.tsv"), "w") as fh:
        fh.write("layer\tnetpos\tfile\n")
        for l in range(m):
            name = f"phat_layer{l + 1:04d}.txt"
            np.savetxt(os.path.join(out_dir, name), fit.P_hat[:, :, l], fmt="%.17g")
            fh.write(f"{l + 1}\t{float(fit.netpos[l])!r}\t{name}\n")
    write_positions(os.path.join(out_dir, "positions.tsv"), fit.positions)
    cfg = {k: v for k, v in vars(fit.config).items()}
    cfg.update(kind=fit.kind, rho_hat=repr(float(fit.rho_hat)), widenings=fit.widenings)
    write_config(os.path.join(out_dir, "fit.conf"), cfg)


def read_fit(out_dir):
    """Return ``(P_hat, netpos, positions, settings)`` written by :func:`write_fit`."""
    lines = _lines(os.path.join(out_dir, "manifest.tsv"))[1:]
    netpos, mats = [], []
    for line in lines:
        if not line.strip():
            continue
        _, z, name = line.split("\t")
        netpos.append(float(z))
        mats.append(np.loadtxt(os.path.join(out_dir, name), ndmin=2))
    positions = read_positions(os.path.join(out_dir, "positions.tsv"))
    settings = read_config(os.path.join(out_dir, "fit.conf"))
    return np.stack(mats, axis=2), np.array(netpos), positions, settings
