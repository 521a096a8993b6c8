"""Shape-distance sweep over the shrinkage parameter.

For Toeplitz scatter matrices and complex normal samples, compare Tyler's
estimator with the regularized Tyler estimator (``beta = 1 - alpha``) and
the CWH iteration across a grid of ``alpha`` values, scoring each estimate
by its shape distance to the truth.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import parallel
from .errors import DomainError, ScatterShrinkError
from .estimators import cwh, reg_tyler, tyler
from .metrics import shape_distance
from .sampling import SeedSpec, complex_normal, sample_ces, toeplitz_cov
from .tuning import oracle_alpha_complex, plugin_alpha, shape_matrix

__all__ = [
    "ShapeSweepConfig",
    "SWEEP_COLUMNS",
    "MARKER_COLUMNS",
    "default_alpha_grid",
    "true_oracle_alpha",
    "simulate_shape_trials",
    "run_shape_sweep",
]

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ("rho", "n", "estimator", "alpha", "mean_d2", "stderr", "trials", "seed")
MARKER_COLUMNS = ("rho", "n", "alpha_oracle", "regtyl_alpha_min_mc", "cwh_alpha_min_mc", "seed")


def default_alpha_grid():
    return tuple(round(0.01 * k, 2) for k in range(1, 100))


@dataclass
class ShapeSweepConfig:
    """``estimators`` may contain ``TYL``, ``RegTYL``, ``CWH`` (swept over
    ``alpha_grid``), ``RegTYL-oracle`` (at the true-shape oracle) and
    ``RegTYL-plugin`` (at the per-trial plug-in estimate)."""

    p: int = 12
    n_list: tuple = (24, 48)
    rho_list: tuple = (0.05, 0.5, 0.8)
    alpha_grid: tuple = default_alpha_grid()
    trials: int = 200
    estimators: tuple = ("TYL", "RegTYL", "CWH", "RegTYL-oracle", "RegTYL-plugin")
    master_seed: int = 0
    tol: float = 1e-9
    max_iter: int = 2000

    def __post_init__(self):
        known = {"TYL", "RegTYL", "CWH", "RegTYL-oracle", "RegTYL-plugin"}
        bad = [e for e in self.estimators if e not in known]
        if bad:
            raise DomainError(f"unknown estimators {bad}")
        if any(not 0 < a < 1 for a in self.alpha_grid):
            raise DomainError("alpha grid must lie in (0, 1)")
        if self.trials < 0 or self.p < 2:
            raise DomainError("invalid shape-sweep configuration")


def true_oracle_alpha(p, rho, n):
    """Oracle shrinkage computed from the exact Toeplitz shape."""
    return oracle_alpha_complex(shape_matrix(toeplitz_cov(p, rho)), n)


def _sweep(fn, Z, Sigma, grid):
    """Evaluate ``fn`` along the grid from large to small alpha, warm-starting."""
    out = {}
    init = None
    for alpha in sorted(grid, reverse=True):
        report = fn(Z, alpha, init)
        init = report.sigma_hat
        out[alpha] = shape_distance(Sigma, report.sigma_hat)
    return out


def _shape_trial(cfg, trial, rho_idx, n):
    """D^2 values of one trial as ``{(estimator, alpha): d2}``."""
    rho = cfg.rho_list[rho_idx]
    Sigma = toeplitz_cov(cfg.p, rho)
    Z = sample_ces(complex_normal(Sigma), n, SeedSpec(cfg.master_seed, trial).rng(rho_idx, n))
    tol, max_iter = cfg.tol, cfg.max_iter
    est = set(cfg.estimators)
    res = {}

    def guarded(name, thunk):
        try:
            thunk()
        except ScatterShrinkError as exc:
            log.info("trial %d rho=%g n=%d: %s failed: %s", trial, rho, n, name, exc)

    def do_tyl():
        res[("TYL", None)] = shape_distance(Sigma, tyler(Z, tol, max_iter, strict=True).sigma_hat)

    def do_regtyl():
        d = _sweep(
            lambda Z, a, init: reg_tyler(Z, a, init=init, tol=tol, max_iter=max_iter, strict=True),
            Z, Sigma, cfg.alpha_grid,
        )
        res.update({("RegTYL", a): v for a, v in d.items()})

    def do_cwh():
        d = _sweep(
            lambda Z, a, init: cwh(Z, a, init=init, tol=tol, max_iter=max_iter, strict=True),
            Z, Sigma, cfg.alpha_grid,
        )
        res.update({("CWH", a): v for a, v in d.items()})

    def do_oracle():
        a = true_oracle_alpha(cfg.p, rho, n)
        S = np.eye(cfg.p) if a >= 1 else reg_tyler(Z, a, tol=tol, max_iter=max_iter, strict=True).sigma_hat
        res[("RegTYL-oracle", a)] = shape_distance(Sigma, S)

    def do_plugin():
        a = plugin_alpha(Z, tol, max_iter)
        S = np.eye(cfg.p) if a >= 1 else reg_tyler(Z, a, tol=tol, max_iter=max_iter, strict=True).sigma_hat
        res[("RegTYL-plugin", "plugin")] = (shape_distance(Sigma, S), a)

    for name, fn in (
        ("TYL", do_tyl),
        ("RegTYL", do_regtyl),
        ("CWH", do_cwh),
        ("RegTYL-oracle", do_oracle),
        ("RegTYL-plugin", do_plugin),
    ):
        if name in est:
            guarded(name, fn)
    return res


def _shape_chunk(cfg, start, stop):
    out = []
    for trial in range(start, stop):
        for rho_idx in range(len(cfg.rho_list)):
            for n in cfg.n_list:
                out.append((rho_idx, n, trial, _shape_trial(cfg, trial, rho_idx, n)))
    return out


def simulate_shape_trials(cfg, workers=1):
    """Per-trial results ``(rho_index, n, trial, {(estimator, alpha): d2})``."""
    return parallel.map_trials(_shape_chunk, cfg, cfg.trials, workers)


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return float("nan"), float("nan")
    se = float(np.std(v, ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("nan")
    return float(np.mean(v)), se


def run_shape_sweep(cfg, workers=1):
    """Aggregate the sweep.

    Returns ``(rows, markers)``: rows keyed by :data:`SWEEP_COLUMNS` and one
    marker row per ``(rho, n)`` keyed by :data:`MARKER_COLUMNS`. The
    ``*_alpha_min_mc`` markers are grid minimizers of the Monte-Carlo mean
    curves; ``alpha_oracle`` is exact.
    """
    results = simulate_shape_trials(cfg, workers)
    rows, markers = [], []
    for rho_idx, rho in enumerate(cfg.rho_list):
        for n in cfg.n_list:
            trials = [r for (ri, nn, _, r) in results if ri == rho_idx and nn == n]
            collected = {}
            for res in trials:
                for key, val in res.items():
                    collected.setdefault(key, []).append(val)

            def emit(name, alpha, values):
                mean, se = _mean_se(values)
                rows.append({
                    "rho": rho, "n": n, "estimator": name, "alpha": alpha,
                    "mean_d2": mean, "stderr": se, "trials": len(values),
                    "seed": cfg.master_seed,
                })
                return mean

            curves = {"RegTYL": {}, "CWH": {}}
            if ("TYL", None) in collected:
                emit("TYL", "", collected[("TYL", None)])
            for name in ("RegTYL", "CWH"):
                if name not in cfg.estimators:
                    continue
                for alpha in cfg.alpha_grid:
                    curves[name][alpha] = emit(name, alpha, collected.get((name, alpha), []))
            for (name, alpha), values in collected.items():
                if name == "RegTYL-oracle":
                    emit(name, alpha, values)
            if ("RegTYL-plugin", "plugin") in collected:
                vals = collected[("RegTYL-plugin", "plugin")]
                emit("RegTYL-plugin", float(np.mean([a for _, a in vals])), [d for d, _ in vals])

            def argmin(curve):
                finite = {a: m for a, m in curve.items() if np.isfinite(m)}
                return min(finite, key=finite.get) if finite else ""

            markers.append({
                "rho": rho, "n": n,
                "alpha_oracle": true_oracle_alpha(cfg.p, rho, n),
                "regtyl_alpha_min_mc": argmin(curves["RegTYL"]),
                "cwh_alpha_min_mc": argmin(curves["CWH"]),
                "seed": cfg.master_seed,
            })
    return rows, markers
