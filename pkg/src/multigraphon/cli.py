"""Command-line entry point: ``multigraphon <subcommand> [options]``.

Every subcommand accepts ``--config FILE`` with flat ``key=value`` lines;
keys are option names (``bw-x`` or ``bw_x``), and explicit flags win over
the file.  Validation problems exit with status 2.
"""

import argparse
import os
import sys

import numpy as np

from . import io as mio
from .baselines import nbs, usvt
from .bench import ARMS, FORMATS, Scenario, emit_report, paper_context_records, run_scenario
from .distance import distance_matrix
from .embedding import embed_1d
from .exceptions import InvalidInputError, MultigraphonError
from .model import MODES, MultiGraphonSpec, sample
from .netstats import resample_stats
from .smoother import (
    KERNELS,
    LINKS,
    METHODS,
    SmootherConfig,
    bootstrap_ci,
    fit_multigraphon,
    fit_per_edge,
    fit_per_network,
    fit_replicated,
    select_regime,
)


def _bandwidth(text):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bandwidth must be a number or 'auto', got {text!r}")


def _common(p):
    p.add_argument("--config", help="flat key=value file of option defaults")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("--out-dir", default=".")


def _spec_opts(p):
    p.add_argument("--spec", help="kernel config file (kind=, beta=, grid=)")
    p.add_argument("--kind", choices=("f1", "f2", "f3"), default="f2")
    p.add_argument("--beta", type=float, default=0.0)


def _smoother_opts(p):
    p.add_argument("--method", choices=METHODS + ("usvt", "nbs"), default="nadaraya_watson")
    p.add_argument("--kernel", choices=KERNELS, default="epanechnikov")
    p.add_argument("--bw-x", type=_bandwidth, default="auto")
    p.add_argument("--bw-z", type=_bandwidth, default="auto")
    p.add_argument("--link", choices=LINKS, default="identity")
    p.add_argument("--cv", action="store_true", help="5-fold CV over bandwidth multipliers")


def _embed_opts(p):
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--embed-seed", type=int, default=0)


def _data_opts(p, covariates=True):
    p.add_argument("--network", required=True, help="edge list: layer i j weight")
    if covariates:
        p.add_argument("--covariates", help="network positions: layer value")
        p.add_argument("--positions", help="node positions: node_id position")


def build_parser():
    ap = argparse.ArgumentParser(prog="multigraphon", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a graph collection from a kernel")
    _common(p)
    _spec_opts(p)
    p.add_argument("--n", type=int, default=150)
    p.add_argument("--m", type=int, default=150)
    p.add_argument("--rho", type=float)
    p.add_argument("--mode", choices=MODES, default="replicated")
    p.add_argument("--sigma-cov", type=float, default=0.0)

    p = sub.add_parser("distance", help="pairwise node distances")
    _common(p)
    _data_opts(p, covariates=False)
    p.add_argument("--e", type=int, default=1, help="path half-length")
    p.add_argument("--split", choices=("first_half", "seeded_random"), default="first_half")

    p = sub.add_parser("embed", help="1-D node positions from distances")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--distance", help="distance matrix file")
    src.add_argument("--network", help="edge list (distances computed first)")
    _embed_opts(p)

    p = sub.add_parser("fit", help="estimate the multi-graphon")
    _common(p)
    _data_opts(p)
    _smoother_opts(p)
    _embed_opts(p)
    p.add_argument("--regime", choices=("auto", "standard", "replicated", "per_edge", "per_network"),
                   default="auto")

    p = sub.add_parser("bench", help="simulation benchmark")
    _common(p)
    _spec_opts(p)
    _smoother_opts(p)
    p.add_argument("--n", type=int, default=150)
    p.add_argument("--m", type=int, default=150)
    p.add_argument("--rho", type=float)
    p.add_argument("--mode", choices=MODES, default="replicated")
    p.add_argument("--sigma-cov", type=float, default=0.0)
    p.add_argument("--arms", default="proposed,nbs", help=f"comma list from {','.join(ARMS)}")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--format", choices=FORMATS, default="delimited-table")
    p.add_argument("--with-paper-context", action="store_true",
                   help="append published SBA/SAS values, labelled source=paper")
    p.add_argument("--with-runtime", action="store_true")

    p = sub.add_parser("resample", help="small-world statistics of resampled graphs")
    _common(p)
    p.add_argument("--network")
    p.add_argument("--covariates")
    p.add_argument("--positions")
    p.add_argument("--constant-p", type=float, help="use a constant edge probability instead")
    p.add_argument("--n", type=int, help="node count with --constant-p")
    p.add_argument("--z", type=float, action="append", help="network position (repeatable)")
    p.add_argument("--B", type=int, default=10000)
    p.add_argument("--level", type=float, default=0.95)
    _smoother_opts(p)
    _embed_opts(p)

    p = sub.add_parser("ci", help="bootstrap band for one node pair")
    _common(p)
    _data_opts(p)
    _smoother_opts(p)
    _embed_opts(p)
    p.add_argument("--pair", type=int, nargs=2, required=True, metavar=("I", "J"),
                   help="1-based node ids")
    p.add_argument("--zgrid", default="0:1:21", help="start:stop:count")
    p.add_argument("--B", type=int, default=200)
    p.add_argument("--level", type=float, default=0.95)
    return ap


def _config_path(argv):
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            return argv[k + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(ap, argv):
    """Parse ``argv`` with ``--config`` values installed as subcommand defaults."""
    argv = list(sys.argv[1:] if argv is None else argv)
    path = _config_path(argv)
    choices = ap._subparsers._group_actions[0].choices
    if path is None or not argv or argv[0] not in choices:
        return ap.parse_args(argv)
    command = argv[0]
    sub = choices[command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in mio.read_config(path).items():
        if key not in known or key in ("help", "config"):
            raise InvalidInputError(f"{path}: unknown option {key!r} for {command}")
        act = known[key]
        if act.type is not None:
            try:
                value = act.type(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise InvalidInputError(f"{path}: bad value for {key}: {exc}") from None
        elif isinstance(act, argparse._StoreTrueAction):
            value = value.lower() in ("1", "true", "yes")
        if act.choices is not None and value not in act.choices:
            raise InvalidInputError(f"{path}: {key}={value!r} not in {list(act.choices)}")
        # a value from the file satisfies a required flag
        act.required = False
        defaults[key] = value
    sub.set_defaults(**defaults)
    return ap.parse_args(argv)


# -- subcommand bodies -----------------------------------------------------------


def _spec(args):
    if getattr(args, "spec", None):
        return mio.read_spec(args.spec)
    return MultiGraphonSpec(args.kind, args.beta)


def _out(args, name):
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _smoother(args):
    if args.method in ("usvt", "nbs"):
        return SmootherConfig(kernel=args.kernel, link=args.link)
    return SmootherConfig(method=args.method, kernel=args.kernel, bandwidth_x=args.bw_x,
                          bandwidth_z=args.bw_z, link=args.link, cv=args.cv, cv_seed=args.seed)


def _positions(args, G):
    if getattr(args, "positions", None):
        return mio.read_positions(args.positions, G.n)
    D = distance_matrix(G)
    return embed_1d(D, restarts=args.restarts, seed=args.embed_seed).positions


def cmd_simulate(args):
    spec = _spec(args)
    G, lat = sample(spec, args.n, args.m, rho=args.rho, sigma_cov=args.sigma_cov,
                    mode=args.mode, seed=args.seed)
    mio.write_network(_out(args, "network.tsv"), G)
    mio.write_covariates(_out(args, "covariates.tsv"), lat.z_check)
    mio.write_covariates(_out(args, "z.tsv"), lat.z)
    mio.write_positions(_out(args, "x.tsv"), lat.x)
    mio.write_spec(_out(args, "spec.conf"), spec)
    print(f"wrote n={G.n} m={G.m} rho={G.rho:.6g} to {args.out_dir}")


def cmd_distance(args):
    G = mio.read_network(args.network)
    D = distance_matrix(G, split=args.split, e=args.e, seed=args.seed)
    mio.write_distance(_out(args, "distance.txt"), D)
    print(f"wrote {D.n}x{D.n} distance matrix")


def cmd_embed(args):
    if args.distance:
        D = mio.read_distance(args.distance)
    else:
        D = distance_matrix(mio.read_network(args.network))
    emb = embed_1d(D, restarts=args.restarts, seed=args.embed_seed)
    mio.write_positions(_out(args, "embedding.tsv"), emb.positions)
    print(f"stress={emb.stress:.6g} violated_fraction={emb.violated_fraction:.4f}")


def _fit(args, G, netpos, positions):
    cfg = _smoother(args)
    regime = getattr(args, "regime", "auto")
    if regime == "auto":
        if netpos is None:
            regime = "replicated"
        else:
            rho = G.A.sum() / (G.m * G.n * (G.n - 1))
            regime = {"Standard": "standard", "PerEdge": "per_edge",
                      "PerNetwork": "per_network"}[select_regime(G.n, G.m, rho)]
    if regime != "replicated" and netpos is None:
        raise InvalidInputError(f"regime {regime!r} needs --covariates")
    if regime == "per_edge":
        return fit_per_edge(G, netpos, cfg, positions=positions)
    if regime == "per_network":
        return fit_per_network(G, netpos, cfg, positions=positions)
    if positions is None:
        positions = _positions(args, G)
    if regime == "replicated":
        return fit_replicated(G, positions, cfg, netpos=netpos)
    return fit_multigraphon(G, positions, netpos, cfg)


def cmd_fit(args):
    G = mio.read_network(args.network)
    netpos = mio.read_covariates(args.covariates, G.m) if args.covariates else None
    if args.method in ("usvt", "nbs"):
        est = usvt(G.mean_layer(), m_eff=G.m) if args.method == "usvt" else nbs(G.mean_layer())
        from .smoother import FitResult, oracle_positions

        rho = G.A.sum() / (G.m * G.n * (G.n - 1))
        P = np.repeat(est[:, :, None], G.m, axis=2)
        fit = FitResult(P, P / rho if rho > 0 else P * 0, rho, oracle_positions(G.n),
                        netpos if netpos is not None else np.arange(1, G.m + 1) / G.m,
                        _smoother(args), kind=args.method)
    else:
        positions = mio.read_positions(args.positions, G.n) if args.positions else None
        fit = _fit(args, G, netpos, positions)
    mio.write_fit(args.out_dir, fit)
    print(f"wrote {fit.kind} fit ({G.m} layers) to {args.out_dir}")


def cmd_bench(args):
    arms = tuple(a.strip() for a in args.arms.split(",") if a.strip())
    cfg = _smoother(args)
    scn = Scenario(spec=_spec(args), n=args.n, m=args.m, rho=args.rho, mode=args.mode,
                   sigma_cov=args.sigma_cov, arms=arms, replications=args.reps,
                   seed=args.seed, config=cfg, restarts=args.restarts)
    records = run_scenario(scn, workers=args.threads)
    if args.with_paper_context:
        records += paper_context_records(scn)
    fit = None
    if args.format == "heatmap-grid":
        G, lat = sample(scn.spec, scn.n, scn.m, rho=scn.rho, sigma_cov=scn.sigma_cov,
                        mode=scn.mode, seed=args.seed)
        netpos = lat.z_check if scn.mode == "cross_section" else lat.z
        positions = embed_1d(distance_matrix(G), restarts=scn.restarts, seed=args.seed).positions
        fit = (fit_replicated(G, positions, cfg) if scn.mode == "replicated"
               else fit_multigraphon(G, positions, netpos, cfg))
    paths = emit_report(records, args.format, args.out_dir, include_runtime=args.with_runtime,
                        fit=fit)
    for r in records:
        print(f"{r.scenario_id}\t{r.arm}\t{r.mse_overall:.4f}\t({r.std_dev:.4f})\t{r.source}")
    print(f"wrote {paths[0]}")


def cmd_resample(args):
    zs = args.z or [0.5]
    if args.constant_p is not None:
        if not args.n:
            raise InvalidInputError("--constant-p needs --n")
        source, positions = float(args.constant_p), np.arange(1, args.n + 1) / (args.n + 1)
    else:
        if not args.network:
            raise InvalidInputError("resample needs --network or --constant-p")
        G = mio.read_network(args.network)
        netpos = mio.read_covariates(args.covariates, G.m) if args.covariates else None
        positions = mio.read_positions(args.positions, G.n) if args.positions else None
        source = _fit(args, G, netpos, positions)
        positions = source.positions
    path = _out(args, "resample.tsv")
    with open(path, "w") as fh:
        fh.write("zvalue\tstatistic\tmean\tlo\thi\tskipped\n")
        for z in zs:
            summary = resample_stats(source, positions, z, B=args.B, seed=args.seed,
                                     level=args.level)
            for row in summary.rows():
                fh.write("\t".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    print(open(path).read(), end="")


def _zgrid(text):
    try:
        a, b, k = text.split(":")
        return np.linspace(float(a), float(b), int(k))
    except ValueError:
        raise InvalidInputError(f"--zgrid must be start:stop:count, got {text!r}") from None


def cmd_ci(args):
    G = mio.read_network(args.network)
    if not args.covariates:
        raise InvalidInputError("ci needs --covariates")
    netpos = mio.read_covariates(args.covariates, G.m)
    positions = _positions(args, G)
    i, j = args.pair
    if not (1 <= i <= G.n and 1 <= j <= G.n) or i == j:
        raise InvalidInputError(f"--pair must name two distinct nodes in 1..{G.n}")
    band = bootstrap_ci(G, positions, netpos, _smoother(args), (i - 1, j - 1), _zgrid(args.zgrid),
                        B=args.B, level=args.level, seed=args.seed)
    path = _out(args, "ci.tsv")
    with open(path, "w") as fh:
        fh.write("z\tcurve\tlower\tupper\n")
        for row in zip(band.zgrid, band.curve, band.lower, band.upper):
            fh.write("\t".join(repr(float(v)) for v in row) + "\n")
    print(open(path).read(), end="")


COMMANDS = {
    "simulate": cmd_simulate,
    "distance": cmd_distance,
    "embed": cmd_embed,
    "fit": cmd_fit,
    "bench": cmd_bench,
    "resample": cmd_resample,
    "ci": cmd_ci,
}


def main(argv=None):
    ap = build_parser()
    try:
        args = _apply_config(ap, argv)
        COMMANDS[args.command](args)
    except (MultigraphonError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
