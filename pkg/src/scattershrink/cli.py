"""Command-line interface.

``scattershrink estimate DATA --estimator NAME`` prints a scatter estimate;
``scattershrink run --config FILE`` runs the configured experiments and
writes CSV tables plus a JSON manifest.

Exit codes: 0 success, 1 estimator or numerical failure, 2 input error.
"""

import argparse
import json
import logging
import os
import platform
import sys
import time

import numpy as np
import scipy

from . import __version__
from .config import FULL_FIDELITY_TRIALS, env_seed, load_config
from .detection import TABLE_COLUMNS, run_pd_experiment, run_pfa_experiment
from .errors import InputError, ScatterShrinkError
from .estimators import cwh, glc, reg_tyler, scm, solve_regularized_m, tyler
from .hpd import is_positive_definite
from .io import format_matrix, format_value, read_samples, write_atomic, write_csv
from .parallel import default_workers
from .rho import Gaussian, Huber
from .shape_experiment import MARKER_COLUMNS, SWEEP_COLUMNS, run_shape_sweep
from .tuning import plugin_alpha

__all__ = ["main", "estimate"]

log = logging.getLogger("scattershrink")

EXIT_OK, EXIT_FAILURE, EXIT_INPUT = 0, 1, 2


def estimate(Z, estimator, alpha=None, beta=None, q=0.9, tol=1e-9, max_iter=1000, oracle=False):
    """Run one named estimator; returns ``(matrix, info)``."""
    info = {}
    p = Z.shape[1]
    if oracle or (estimator in ("reg-tyler", "cwh") and alpha is None):
        info["alpha_hat"] = plugin_alpha(Z, tol, max_iter)

    if estimator == "scm":
        S = scm(Z)
        info["positive_definite"] = is_positive_definite(S)
        return S, info
    if estimator == "glc":
        return glc(Z, alpha or 0.0, 1.0 if beta is None else beta), info

    if estimator in ("gaussian", "huber"):
        family = Gaussian() if estimator == "gaussian" else Huber(p, q)
        report = solve_regularized_m(
            Z, family, alpha or 0.0, 1.0 if beta is None else beta, tol=tol, max_iter=max_iter, strict=True
        )
    elif estimator == "tyler":
        report = tyler(Z, tol=tol, max_iter=max_iter, strict=True)
    elif estimator == "reg-tyler":
        a = info["alpha_hat"] if alpha is None else alpha
        if alpha is None and a >= 1:
            return np.eye(p, dtype=complex), info
        report = reg_tyler(Z, a, beta, tol=tol, max_iter=max_iter, strict=True)
    elif estimator == "cwh":
        a = info["alpha_hat"] if alpha is None else alpha
        if alpha is None and a >= 1:
            return np.eye(p, dtype=complex), info
        report = cwh(Z, a, tol=tol, max_iter=max_iter, strict=True)
    else:
        raise InputError(f"unknown estimator {estimator!r}")
    info.update(
        iterations=report.iterations,
        residual=report.residual,
        converged=report.converged,
        trace_identity_residual=report.trace_identity_residual,
    )
    return report.sigma_hat, info


def _render_estimate(S, info):
    lines = [format_matrix(S)]
    for key, value in info.items():
        lines.append(f"# {key}: {format_value(value)}\n")
    return "".join(lines)


def _cmd_estimate(args):
    Z = read_samples(args.input)
    S, info = estimate(
        Z, args.estimator, args.alpha, args.beta, args.q, args.tol, args.max_iter, args.oracle
    )
    text = _render_estimate(S, info)
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _resolve_seed(cli_seed, params):
    if cli_seed is not None:
        return cli_seed
    if "master_seed" in params:
        return params["master_seed"]
    seed = env_seed()
    return 0 if seed is None else seed


def _run_one(cfg, outdir, args):
    seed = _resolve_seed(args.seed, cfg.params)
    if cfg.experiment == "estimate":
        p = cfg.params
        Z = read_samples(p["input"])
        S, info = estimate(
            Z, p["estimator"], p.get("alpha"), p.get("beta"), p.get("q", 0.9),
            p.get("tol", 1e-9), p.get("max_iter", 1000), p.get("oracle", False),
        )
        path = os.path.join(outdir, p.get("output_path", "estimate.txt"))
        write_atomic(path, _render_estimate(S, info))
        return {"experiment": "estimate", "outputs": [path]}

    trials = args.trials_override
    if trials is None and args.full_fidelity:
        trials = FULL_FIDELITY_TRIALS[cfg.experiment]
    run_cfg = cfg.build(master_seed=seed, trials=trials)
    path = os.path.join(outdir, cfg.output_name)
    outputs = [path]
    if cfg.experiment == "shape_sweep":
        rows, markers = run_shape_sweep(run_cfg, args.threads)
        write_csv(path, rows, SWEEP_COLUMNS)
        root, ext = os.path.splitext(path)
        marker_path = f"{root}_markers{ext or '.csv'}"
        write_csv(marker_path, markers, MARKER_COLUMNS)
        outputs.append(marker_path)
    elif cfg.experiment == "pfa":
        write_csv(path, run_pfa_experiment(run_cfg, args.threads), TABLE_COLUMNS)
    elif cfg.experiment == "pd":
        write_csv(path, run_pd_experiment(run_cfg, args.threads), TABLE_COLUMNS)
    return {"experiment": cfg.experiment, "master_seed": seed, "trials": run_cfg.trials, "outputs": outputs}


def _cmd_run(args):
    configs, digest = load_config(args.config)
    outdir = args.output or os.path.dirname(os.path.abspath(args.config))
    start = time.time()
    runs = [_run_one(cfg, outdir, args) for cfg in configs]
    manifest = {
        "config": os.path.abspath(args.config),
        "config_sha256": digest,
        "runs": runs,
        "versions": {
            "scattershrink": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "threads": args.threads,
        "wall_time_s": round(time.time() - start, 3),
    }
    write_atomic(os.path.join(outdir, "manifest.json"), json.dumps(manifest, indent=2) + "\n")
    return EXIT_OK


def _parser():
    parser = argparse.ArgumentParser(
        prog="scattershrink", description="Regularized scatter estimation and simulation experiments."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate a scatter matrix from a data file")
    est.add_argument("input", help="CSV file, one sample per row, re/im interleaved")
    est.add_argument(
        "--estimator", required=True,
        choices=["scm", "glc", "gaussian", "huber", "tyler", "reg-tyler", "cwh"],
    )
    est.add_argument("--alpha", type=float, default=None)
    est.add_argument("--beta", type=float, default=None)
    est.add_argument("--q", type=float, default=0.9, help="Huber quantile level")
    est.add_argument("--tol", type=float, default=1e-9)
    est.add_argument("--max-iter", type=int, default=1000)
    est.add_argument("--oracle", action="store_true", help="also report the plug-in shrinkage")
    est.add_argument("--output", default=None)
    est.set_defaults(func=_cmd_estimate)

    run = sub.add_parser("run", help="run experiments from an INI configuration")
    run.add_argument("--config", required=True)
    run.add_argument("--output", default=None, help="output directory (default: config's)")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--threads", type=int, default=default_workers())
    run.add_argument("--trials-override", type=int, default=None)
    run.add_argument("--full-fidelity", action="store_true")
    run.set_defaults(func=_cmd_run)
    return parser


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ScatterShrinkError, np.linalg.LinAlgError) as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
