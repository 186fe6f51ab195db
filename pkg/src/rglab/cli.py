"""``rglab`` command-line interface.

Exit status: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

import argparse
import csv
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from rglab import __version__
from rglab.asymptotics import (
    MAX_DENSE_K,
    char_poly_roots,
    delta_method_stages,
    gaussian_condition,
    independence_lhs,
    isserlis_pair_moments,
)
from rglab.config import (
    ConfigError,
    load_config,
    require_choice,
    require_float,
    require_int,
)
from rglab.correlation import correlate_all
from rglab.diagnostics import histogram, normality_summary, qq_normal
from rglab.exceptions import RglabError
from rglab.models import GaussianSpec, SparseLinearSpec, sample_sparse_dataset
from rglab.output import dumps, write_csv, write_json, write_manifest
from rglab.random import substream
from rglab.selection import (
    ESTIMATORS,
    MODES,
    SCALES,
    RobustnessCriterion,
    minimal_sample_size,
    resolve_workers,
    run_experiment,
)

logger = logging.getLogger("rglab")

SEED_MAX = 2 ** 64 - 1

FIGURE1_DEFAULTS = {"model": "sparse_linear", "n": 59, "k": 20000, "u": 100,
                    "output_dir": "rglab-out"}
FIGURE2_DEFAULTS = {"model": "sparse_linear", "n_grid": [600, 800, 1000, 1200], "k": 20000,
                    "u": 100, "B": 10, "mode": "paper_literal", "scale": "raw",
                    "output_dir": "rglab-out"}
SAMPLE_SIZE_DEFAULTS = {"model": "sparse_linear", "k": 20000, "u": 100, "B": 10,
                        "mode": "paper_literal", "scale": "raw", "target_overlap": 0.5,
                        "estimator": "straightforward", "n_lo": 100, "n_hi": 3200,
                        "resolution": 25, "output_dir": "rglab-out"}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# shared validation
# ---------------------------------------------------------------------------

def _common_overrides(args):
    return {
        "seed": args.seed,
        "output_dir": args.out,
        "workers": args.workers,
        "mode": getattr(args, "mode", None),
        "scale": getattr(args, "scale", None),
    }


def _sparse_model(cfg):
    require_choice(cfg, "model", ("sparse_linear",))
    k = require_int(cfg, "k", minimum=2)
    u = require_int(cfg, "u", minimum=1)
    if u >= k:
        cfg.fail("u", f"must be < k={k}, got {u}")
    return SparseLinearSpec(k, u)


def _seed(cfg):
    return require_int(cfg, "seed", minimum=0, maximum=SEED_MAX)


def _workers(cfg):
    try:
        return resolve_workers(cfg.get("workers"))
    except RglabError as exc:
        cfg.fail("workers", str(exc))


def _out_dir(cfg):
    out = Path(str(cfg.get("output_dir")))
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# figure1
# ---------------------------------------------------------------------------

def prepare_figure1(args):
    cfg = load_config(args.config, FIGURE1_DEFAULTS,
                      {**_common_overrides(args), "n": args.n, "k": args.k, "u": args.u,
                       "bins": args.bins})
    spec = _sparse_model(cfg)
    n = require_int(cfg, "n", minimum=4)
    seed = _seed(cfg)
    bins = cfg.get("bins")
    if bins is not None:
        bins = require_int(cfg, "bins", minimum=1)
    return cfg, dict(spec=spec, n=n, seed=seed, bins=bins)


def run_figure1(cfg, spec, n, seed, bins):
    start = time.perf_counter()
    out = _out_dir(cfg)
    data, support = sample_sparse_dataset(spec, n, substream(seed, "figure1", "data"))
    r = correlate_all(data)
    z = r.fisher().values
    active = np.zeros(spec.k, dtype=bool)
    active[support] = True
    hist = histogram(z, bins)
    qq = qq_normal(z)
    summary = normality_summary(z)

    files = [
        write_csv(out / "fisher_values.csv", ["index", "r", "fisher", "active"],
                  zip(range(spec.k), r.values.tolist(), z.tolist(), active.tolist())),
        write_csv(out / "histogram.csv", ["bin_left", "bin_right", "count"],
                  zip(hist.edges[:-1].tolist(), hist.edges[1:].tolist(), hist.counts.tolist())),
        write_csv(out / "qq.csv", ["theoretical", "sample"], qq.tolist()),
        write_json(out / "summary.json", {
            "command": "figure1",
            "config": cfg.echo(execution=False),
            "normality": summary.as_dict(),
            "histogram_total": hist.total,
            "support": support.tolist(),
            "active_fisher_mean": float(z[active].mean()),
            "null_fisher_sd": float(z[~active].std()),
        }),
    ]
    write_manifest(out, cfg.echo(), files, time.perf_counter() - start, __version__)
    print(f"figure1: wrote {len(files)} files to {out} "
          f"(ks_distance={summary.ks_distance:.4g}, skewness={summary.skewness:.4g})")
    return 0


# ---------------------------------------------------------------------------
# figure2
# ---------------------------------------------------------------------------

def _n_grid(cfg):
    grid = cfg.get("n_grid")
    if isinstance(grid, str):
        try:
            grid = [int(tok) for tok in grid.split(",") if tok.strip()]
        except ValueError:
            cfg.fail("n_grid", f"must be a comma-separated list of integers, got {grid!r}")
    if not isinstance(grid, list) or not grid:
        cfg.fail("n_grid", "must be a non-empty list of sample sizes")
    for n in grid:
        if isinstance(n, bool) or not isinstance(n, int) or n < 4:
            cfg.fail("n_grid", f"every entry must be an integer >= 4, got {n!r}")
    return grid


def prepare_figure2(args):
    cfg = load_config(args.config, FIGURE2_DEFAULTS,
                      {**_common_overrides(args), "n_grid": args.n_grid, "k": args.k,
                       "u": args.u, "B": args.B})
    spec = _sparse_model(cfg)
    return cfg, dict(
        spec=spec,
        n_grid=_n_grid(cfg),
        B=require_int(cfg, "B", minimum=1),
        mode=require_choice(cfg, "mode", MODES),
        scale=require_choice(cfg, "scale", SCALES),
        seed=_seed(cfg),
        workers=_workers(cfg),
    )


def run_figure2(cfg, spec, n_grid, B, mode, scale, seed, workers):
    start = time.perf_counter()
    out = _out_dir(cfg)
    summaries = run_experiment(spec, n_grid, B, mode, scale, seed, workers)
    curves = [(s.n, s.d_mean, s.d_sd, s.c_mean, s.c_sd, s.mode, s.scale) for s in summaries]
    replicates = [
        (s.n, t, s.d_values[t], s.c_values[t], s.sigma_q_hats[t])
        for s in summaries for t in range(s.B)
    ]
    max_sd = max(max(s.d_sd, s.c_sd) for s in summaries)
    files = [
        write_csv(out / "curves.csv", ["n", "d_mean", "d_sd", "c_mean", "c_sd", "mode", "scale"],
                  curves),
        write_csv(out / "replicates.csv", ["n", "t", "d_t", "c_t", "sigma_q_hat"], replicates),
        write_json(out / "summary.json", {
            "command": "figure2",
            "config": cfg.echo(execution=False),
            "curves": [
                {"n": s.n, "d_mean": s.d_mean, "d_sd": s.d_sd, "c_mean": s.c_mean,
                 "c_sd": s.c_sd}
                for s in summaries
            ],
            "max_sd": max_sd,
            "mode": mode,
            "scale": scale,
        }),
    ]
    write_manifest(out, cfg.echo(), files, time.perf_counter() - start, __version__)
    for s in summaries:
        print(f"n={s.n:5d}  d_mean={s.d_mean:.4f} (sd {s.d_sd:.4f})  "
              f"c_mean={s.c_mean:.4f} (sd {s.c_sd:.4f})")
    return 0


# ---------------------------------------------------------------------------
# sample-size
# ---------------------------------------------------------------------------

def prepare_sample_size(args):
    cfg = load_config(args.config, SAMPLE_SIZE_DEFAULTS,
                      {**_common_overrides(args), "k": args.k, "u": args.u, "B": args.B,
                       "target_overlap": args.target, "estimator": args.estimator,
                       "n_lo": args.n_lo, "n_hi": args.n_hi, "resolution": args.resolution})
    spec = _sparse_model(cfg)
    n_lo = require_int(cfg, "n_lo", minimum=4)
    n_hi = require_int(cfg, "n_hi", minimum=5)
    if n_hi <= n_lo:
        cfg.fail("n_hi", f"must exceed n_lo={n_lo}, got {n_hi}")
    return cfg, dict(
        spec=spec,
        criterion=RobustnessCriterion(require_float(cfg, "target_overlap", 0.0, 1.0)),
        estimator=require_choice(cfg, "estimator", ESTIMATORS),
        n_lo=n_lo,
        n_hi=n_hi,
        B=require_int(cfg, "B", minimum=1),
        seed=_seed(cfg),
        mode=require_choice(cfg, "mode", MODES),
        scale=require_choice(cfg, "scale", SCALES),
        resolution=require_int(cfg, "resolution", minimum=1),
        workers=_workers(cfg),
    )


def run_sample_size(cfg, **kwargs):
    start = time.perf_counter()
    out = _out_dir(cfg)
    res = minimal_sample_size(**kwargs)
    payload = {
        "command": "sample-size",
        "config": cfg.echo(execution=False),
        "estimator": res.estimator,
        "target": res.target,
        "n_star": res.n_star,
        "exhausted": res.exhausted,
        "best_n": res.best_n,
        "best_mean": res.best_mean,
        "resolution": res.resolution,
        "mode": kwargs["mode"],
        "scale": kwargs["scale"],
        "trace": list(res.trace),
    }
    path = write_json(out / "samplesize.json", payload)
    write_manifest(out, cfg.echo(), [path], time.perf_counter() - start, __version__)
    if res.exhausted:
        print(f"sample-size: target {res.target} not reached by n={kwargs['n_hi']} "
              f"(best mean {res.best_mean:.4f} at n={res.best_n})")
    else:
        print(f"sample-size: n_star = {res.n_star} (resolution {res.resolution})")
    return 0


# ---------------------------------------------------------------------------
# analytic subcommands
# ---------------------------------------------------------------------------

def _open_unit(name, value):
    if not (math.isfinite(value) and -1.0 < value < 1.0):
        raise UsageError(f"{name} must lie in (-1, 1), got {value}")


def independence_report(rho1, rho2, rho_x1x2=None):
    """Structured description of the Gaussian independence condition for one gene pair."""
    _open_unit("rho1", rho1)
    _open_unit("rho2", rho2)
    quad = gaussian_condition(rho1, rho2)
    roots = quad.real_roots()
    report = {
        "rho1": rho1,
        "rho2": rho2,
        "a": quad.a,
        "b": quad.b,
        "c": quad.c,
        "discriminant": quad.discriminant,
        "linear": quad.a == 0,
        "real_roots": list(roots),
        "roots_in_domain": list(quad.roots_in_domain()),
        "solvable": quad.solvable,
    }
    if rho_x1x2 is not None:
        _open_unit("rho_x1x2", rho_x1x2)
        min_eig = char_poly_roots(rho1, rho2, rho_x1x2).min_real
        report["rho_x1x2"] = rho_x1x2
        report["min_eigenvalue"] = min_eig
        report["quadratic_value"] = quad.evaluate(rho_x1x2)
        try:
            sigma = np.array([[1.0, rho_x1x2, rho1], [rho_x1x2, 1.0, rho2], [rho1, rho2, 1.0]])
            report["lhs"] = independence_lhs(isserlis_pair_moments(sigma))
            report["valid_structure"] = True
        except RglabError:
            report["lhs"] = None
            report["valid_structure"] = False
    return report


def _format_report(rep):
    g = lambda x: format(x, ".6g")  # noqa: E731
    lines = [
        f"rho1 = {g(rep['rho1'])}, rho2 = {g(rep['rho2'])}",
        f"condition: a*x^2 + b*x + c = 0 with a = {g(rep['a'])}, b = {g(rep['b'])}, "
        f"c = {g(rep['c'])}  (x = gene-gene correlation)",
        f"discriminant = {g(rep['discriminant'])}",
    ]
    if rep["linear"]:
        inside = rep["roots_in_domain"]
        if inside == [0.0] or (len(inside) == 1 and inside[0] == 0):
            lines.append("unique root 0: a gene uncorrelated with the target "
                         "forces uncorrelated genes")
        elif inside:
            lines.append(f"unique root {g(inside[0])}")
        else:
            lines.append("no root in (-1, 1): asymptotic independence impossible")
    elif not rep["real_roots"]:
        lines.append("no real solution: asymptotic independence impossible")
    else:
        for x in rep["real_roots"]:
            where = "inside (-1, 1)" if -1 < x < 1 else "outside (-1, 1)"
            lines.append(f"root {g(x)} ({where})")
        if not rep["solvable"]:
            lines.append("no root in (-1, 1): asymptotic independence impossible")
    if "rho_x1x2" in rep:
        lines.append(f"rho_x1x2 = {g(rep['rho_x1x2'])}: min eigenvalue of correlation matrix "
                     f"= {g(rep['min_eigenvalue'])}")
        if rep["valid_structure"]:
            lines.append(f"independence LHS under the Gaussian model = {g(rep['lhs'])}")
        else:
            lines.append("not a valid correlation structure (matrix not PSD); LHS undefined")
    return "\n".join(lines)


def cmd_check_independence(args):
    try:
        rep = independence_report(args.rho1, args.rho2, args.rho_x1x2)
    except (UsageError, RglabError) as exc:
        raise UsageError(str(exc))
    if args.json:
        sys.stdout.write(dumps(rep))
    else:
        print(_format_report(rep))
    return 0


def _read_covariance(path):
    path = Path(path)
    if not path.exists():
        raise UsageError(f"{path}: no such file")
    if path.suffix == ".toml":
        cfg = load_config(path)
        cov = cfg.get("covariance")
        if cov is None:
            raise UsageError(f"{path}: missing key 'covariance'")
    else:
        with open(path, encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh) if row]
        try:
            cov = [[float(x) for x in row] for row in rows]
        except ValueError as exc:
            raise UsageError(f"{path}: non-numeric entry ({exc})")
    try:
        cov = np.array(cov, dtype=float)
    except ValueError:
        raise UsageError(f"{path}: covariance rows have unequal lengths")
    return cov


def cmd_asymptotic_cov(args):
    cov = _read_covariance(args.spec_file)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise UsageError(f"size: covariance must be square, got shape {cov.shape}")
    if cov.shape[0] - 1 > MAX_DENSE_K:
        raise UsageError(f"size: k={cov.shape[0] - 1} exceeds the cap of {MAX_DENSE_K}")
    try:
        sigma4 = delta_method_stages(GaussianSpec(cov))["sigma4"]
    except RglabError as exc:
        raise UsageError(str(exc))
    diag_err = float(np.max(np.abs(np.diag(sigma4) - 1.0)))
    if diag_err > 1e-9:
        raise RuntimeError(f"asymptotic covariance diagonal deviates from 1 by {diag_err:.3e}")
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    k = sigma4.shape[0]
    path = write_csv(out / "sigma4.csv", ["feature"] + [str(i) for i in range(k)],
                     ([i] + sigma4[i].tolist() for i in range(k)))
    print(f"asymptotic-cov: wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _add_common(p, modes=False):
    p.add_argument("--config", metavar="FILE", help="TOML config file")
    p.add_argument("--seed", type=int, help="root seed (required here or in the config)")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--workers", help="worker processes, an integer or 'auto' "
                                     "(default: $RGLAB_WORKERS or 1)")
    if modes:
        p.add_argument("--mode", choices=MODES)
        p.add_argument("--scale", choices=SCALES)


def _grid(text):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(prog="rglab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rglab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("figure1", help="histogram / QQ data of Fisher-transformed correlations")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--u", type=int)
    p.add_argument("--bins", type=int)

    p = sub.add_parser("figure2", help="straightforward vs approximated estimator curves")
    _add_common(p, modes=True)
    p.add_argument("--n-grid", type=_grid, dest="n_grid", help="e.g. 600,800,1000,1200")
    p.add_argument("--k", type=int)
    p.add_argument("--u", type=int)
    p.add_argument("--B", type=int)

    p = sub.add_parser("check-independence", help="Gaussian asymptotic-independence condition")
    p.add_argument("rho1", type=float)
    p.add_argument("rho2", type=float)
    p.add_argument("rho_x1x2", type=float, nargs="?")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("asymptotic-cov", help="delta-method covariance of Fisher correlations")
    p.add_argument("spec_file", help="CSV (k+1)x(k+1) covariance, target last, or TOML "
                                     "with a 'covariance' key")
    p.add_argument("--out", metavar="DIR")

    p = sub.add_parser("sample-size", help="minimal n reaching a target overlap")
    _add_common(p, modes=True)
    p.add_argument("--k", type=int)
    p.add_argument("--u", type=int)
    p.add_argument("--B", type=int)
    p.add_argument("--target", type=float)
    p.add_argument("--estimator", choices=ESTIMATORS)
    p.add_argument("--n-lo", type=int, dest="n_lo")
    p.add_argument("--n-hi", type=int, dest="n_hi")
    p.add_argument("--resolution", type=int)
    return parser


EXPERIMENTS = {
    "figure1": (prepare_figure1, run_figure1),
    "figure2": (prepare_figure2, run_figure2),
    "sample-size": (prepare_sample_size, run_sample_size),
}

ANALYTIC = {
    "check-independence": cmd_check_independence,
    "asymptotic-cov": cmd_asymptotic_cov,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command in ANALYTIC:
        try:
            return ANALYTIC[args.command](args)
        except (UsageError, ConfigError) as exc:
            print(f"rglab {args.command}: error: {exc}", file=sys.stderr)
            return 2
        except Exception as exc:  # noqa: BLE001
            print(f"rglab {args.command}: failed: {exc}", file=sys.stderr)
            return 1

    prepare, run = EXPERIMENTS[args.command]
    try:
        cfg, kwargs = prepare(args)
    except (ConfigError, RglabError) as exc:
        print(f"rglab {args.command}: config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg, **kwargs)
    except Exception as exc:  # noqa: BLE001
        logger.debug("run failed", exc_info=True)
        print(f"rglab {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
