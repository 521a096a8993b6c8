"""Adaptive normalized matched filter (NMF) detection experiments.

The NMF statistic ``|p^H S^{-1} z|^2 / ((z^H S^{-1} z)(p^H S^{-1} p))`` is
Beta(1, p-1) distributed under any CES clutter when ``S`` is the true
scatter matrix, which gives the closed-form CFAR threshold
``1 - pfa^(1/(p-1))``. The experiment engines replace ``S`` by an estimate
from secondary (signal-free) data and measure the empirical false alarm
and detection rates.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from . import parallel
from .errors import DomainError, ScatterShrinkError, ZeroVector
from .estimators import cwh, glc, reg_tyler, scm, tyler
from .hpd import cholesky
from .sampling import CesModel, SeedSpec, random_cov, sample_ces
from .tuning import oracle_alpha_complex, oracle_alpha_cwh, pilot_shape, shape_matrix

__all__ = [
    "nmf_statistic",
    "nmf_statistics",
    "threshold_for_pfa",
    "steering_vector",
    "estimate_scatter",
    "TrialRecord",
    "PfaConfig",
    "PdConfig",
    "simulate_pfa_trials",
    "simulate_pd_trials",
    "run_pfa_experiment",
    "run_pd_experiment",
    "decision_vector",
    "TABLE_COLUMNS",
    "KNOWN",
    "ESTIMATORS",
]

log = logging.getLogger(__name__)

KNOWN = "known"
ESTIMATORS = ("TYL", "GLC", "RegTYL", "CWH")
TABLE_COLUMNS = (
    "experiment_id",
    "estimator",
    "n",
    "pfa_target_or_scr_db",
    "trials",
    "hits",
    "empirical_rate",
    "seed",
    "skipped",
)
# GLC and CWH are tuned by stand-in rules; their table labels say so
OUTPUT_LABELS = {"GLC": "GLC-fallback", "CWH": "CWH-fallback"}


def nmf_statistics(Z, steer, S):
    """NMF statistic for every row of ``Z``; values lie in [0, 1]."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    steer = np.asarray(steer, dtype=complex)
    if not np.any(steer):
        raise ZeroVector("steering vector is zero")
    if not np.all(np.any(Z != 0, axis=1)):
        raise ZeroVector("observation is zero")
    L = cholesky(S)
    a = linalg.solve_triangular(L, steer, lower=True, check_finite=False)
    B = linalg.solve_triangular(L, Z.T, lower=True, check_finite=False)
    num = np.abs(a.conj() @ B) ** 2
    den = np.sum(np.abs(B) ** 2, axis=0) * np.sum(np.abs(a) ** 2)
    return np.clip(num / den, 0.0, 1.0)


def nmf_statistic(z, steer, S):
    return float(nmf_statistics(z, steer, S)[0])


def threshold_for_pfa(pfa, p):
    """Threshold ``1 - pfa^(1/(p-1))`` giving false alarm rate ``pfa``."""
    if not 0 < pfa < 1:
        raise DomainError(f"pfa must lie in (0, 1), got {pfa}")
    if p < 2:
        raise DomainError("the NMF threshold needs p >= 2")
    return 1.0 - pfa ** (1.0 / (p - 1))


def steering_vector(p, freq=0.0):
    """``exp(2j pi freq k)``, k = 0..p-1; squared norm equals ``p``."""
    return np.exp(2j * np.pi * freq * np.arange(p))


@dataclass
class TrialRecord:
    """One adaptive-detector evaluation.

    ``statistic`` is NaN and ``skipped`` True when the estimator failed on
    this trial's secondary data.
    """

    trial_id: int
    estimator: str
    n: float
    statistic: float
    alpha_used: float = float("nan")
    scr_db: float = None
    skipped: bool = False

    def decision(self, threshold):
        return bool(self.statistic > threshold)


def estimate_scatter(name, Z, tol=1e-9, max_iter=1000, _cache=None):
    """Scatter estimate used by the adaptive detector.

    Returns ``(Sigma_hat, alpha_used)``. ``RegTYL`` and ``CWH`` pick their
    shrinkage from the pilot shape (Tyler when ``n >= p``); ``GLC`` uses
    ``beta = 1`` and ``alpha = tr(S)/(p n)``.
    """
    cache = {} if _cache is None else _cache
    n, p = Z.shape

    def pilot():
        if "pilot" not in cache:
            if "TYL" in cache and n >= p:
                cache["pilot"] = shape_matrix(cache["TYL"])
            else:
                cache["pilot"] = pilot_shape(Z, tol, max_iter)
        return cache["pilot"]

    if name == "TYL":
        if "TYL" not in cache:
            cache["TYL"] = tyler(Z, tol=tol, max_iter=max_iter, strict=True).sigma_hat
        return cache["TYL"], float("nan")
    if name == "GLC":
        alpha = float(np.trace(scm(Z)).real) / (p * n)
        return glc(Z, alpha, 1.0), alpha
    if name == "RegTYL":
        alpha = oracle_alpha_complex(pilot(), n)
        if alpha >= 1.0:
            return np.eye(p, dtype=complex), alpha
        return reg_tyler(Z, alpha, tol=tol, max_iter=max_iter, strict=True).sigma_hat, alpha
    if name == "CWH":
        alpha = oracle_alpha_cwh(pilot(), n)
        if alpha >= 1.0:
            return np.eye(p, dtype=complex), alpha
        return cwh(Z, alpha, tol=tol, max_iter=max_iter, strict=True).sigma_hat, alpha
    raise DomainError(f"unknown estimator {name!r}")


def _model(clutter, Sigma, nu):
    if clutter == "k":
        return CesModel("k", Sigma, nu)
    if clutter == "normal":
        return CesModel("normal", Sigma)
    raise DomainError(f"unknown clutter {clutter!r}")


def _adaptive(records, trial, estimators, Zs, z, steer, tol, max_iter, scr=None):
    cache = {}
    n = Zs.shape[0]
    for name in estimators:
        try:
            S, alpha = estimate_scatter(name, Zs, tol, max_iter, cache)
            stat = nmf_statistic(z, steer, S)
        except (ScatterShrinkError, np.linalg.LinAlgError) as exc:
            log.info("trial %d: %s failed on n=%d: %s", trial, name, n, exc)
            records.append(TrialRecord(trial, name, n, float("nan"), scr_db=scr, skipped=True))
            continue
        records.append(TrialRecord(trial, name, n, stat, alpha, scr))


@dataclass
class PfaConfig:
    p: int = 8
    n_list: tuple = (8, 16, 32)
    nu: float = 4.5
    pfa_targets: tuple = (0.001, 0.005, 0.01, 0.02, 0.05, 0.1)
    trials: int = 10000
    estimators: tuple = ESTIMATORS
    master_seed: int = 0
    clutter: str = "k"
    include_known: bool = False
    tol: float = 1e-9
    max_iter: int = 1000
    experiment_id: str = "pfa"

    def __post_init__(self):
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad:
            raise DomainError(f"unknown estimators {bad}")
        if self.p < 2 or self.trials < 0 or self.nu <= 0:
            raise DomainError("invalid PFA configuration")


def _pfa_trial(cfg, trial):
    seed = SeedSpec(cfg.master_seed, trial)
    Sigma = random_cov(cfg.p, seed.rng(0))
    model = _model(cfg.clutter, Sigma, cfg.nu)
    steer = steering_vector(cfg.p)
    z = sample_ces(model, 1, seed.rng(1))[0]
    records = []
    if cfg.include_known:
        records.append(TrialRecord(trial, KNOWN, np.inf, nmf_statistic(z, steer, Sigma)))
    for n in cfg.n_list:
        Zs = sample_ces(model, n, seed.rng(2, n))
        _adaptive(records, trial, cfg.estimators, Zs, z, steer, cfg.tol, cfg.max_iter)
    return records


def _pfa_chunk(cfg, start, stop):
    out = []
    for trial in range(start, stop):
        out.extend(_pfa_trial(cfg, trial))
    return out


def simulate_pfa_trials(cfg, workers=1):
    """All per-trial records under H0, ordered by trial."""
    return parallel.map_trials(_pfa_chunk, cfg, cfg.trials, workers)


def _groups(records):
    groups = {}
    for r in records:
        groups.setdefault((r.estimator, r.n), []).append(r)
    return groups


def _group_order(cfg_estimators, include_known, n_list):
    keys = [(KNOWN, np.inf)] if include_known else []
    keys += [(e, n) for n in n_list for e in cfg_estimators]
    return keys


def _row(experiment_id, estimator, n, x, group, threshold, seed):
    valid = [r for r in group if not r.skipped]
    hits = sum(r.decision(threshold) for r in valid)
    rate = hits / len(valid) if valid else float("nan")
    return {
        "experiment_id": experiment_id,
        "estimator": OUTPUT_LABELS.get(estimator, estimator),
        "n": "inf" if np.isinf(n) else int(n),
        "pfa_target_or_scr_db": x,
        "trials": len(valid),
        "hits": hits,
        "empirical_rate": rate,
        "seed": seed,
        "skipped": len(group) - len(valid),
    }


def run_pfa_experiment(cfg, workers=1):
    """Empirical false alarm rate per (estimator, n, target).

    Returns a list of row dicts with keys :data:`TABLE_COLUMNS`. The
    ``known`` rows (``n = inf``) use the true scatter matrix.
    """
    records = simulate_pfa_trials(cfg, workers)
    groups = _groups(records)
    rows = []
    for estimator, n in _group_order(cfg.estimators, cfg.include_known, cfg.n_list):
        group = groups.get((estimator, n), [])
        for pfa in cfg.pfa_targets:
            lam = threshold_for_pfa(pfa, cfg.p)
            rows.append(_row(cfg.experiment_id, estimator, n, pfa, group, lam, cfg.master_seed))
    return rows


@dataclass
class PdConfig:
    """Detection-probability experiment.

    Clutter scatter is ``sigma2 * I``; the signal is ``gamma * steer`` with
    ``|gamma|`` Rayleigh of scale ``sqrt(SCR * sigma2)`` and uniform phase.
    Each trial draws clutter, secondary data and a unit-scale signal once
    and reuses them at every SCR point (common random numbers).
    """

    p: int = 8
    n: int = 16
    nu: float = 4.5
    sigma2: float = 1.0
    pfa: float = 0.01
    scr_grid_db: tuple = tuple(float(x) for x in range(-20, 21))
    trials: int = 5000
    estimators: tuple = ("RegTYL",)
    master_seed: int = 0
    clutter: str = "k"
    include_known: bool = False
    tol: float = 1e-9
    max_iter: int = 1000
    experiment_id: str = "pd"

    def __post_init__(self):
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad:
            raise DomainError(f"unknown estimators {bad}")
        if self.p < 2 or self.trials < 0 or self.sigma2 <= 0 or not 0 < self.pfa < 1:
            raise DomainError("invalid PD configuration")


def _pd_trial(cfg, trial):
    seed = SeedSpec(cfg.master_seed, trial)
    p = cfg.p
    Sigma = cfg.sigma2 * np.eye(p, dtype=complex)
    model = _model(cfg.clutter, Sigma, cfg.nu)
    steer = steering_vector(p)
    clutter = sample_ces(model, 1, seed.rng(1))[0]
    Zs = sample_ces(model, cfg.n, seed.rng(2, cfg.n))
    sig_rng = seed.rng(3)
    # unit-scale Rayleigh amplitude with uniform phase
    gamma = sig_rng.rayleigh(1.0) * np.exp(2j * np.pi * sig_rng.uniform())

    estimates = {}
    cache = {}
    for name in cfg.estimators:
        try:
            estimates[name] = estimate_scatter(name, Zs, cfg.tol, cfg.max_iter, cache)
        except (ScatterShrinkError, np.linalg.LinAlgError) as exc:
            log.info("trial %d: %s failed: %s", trial, name, exc)
            estimates[name] = None

    records = []
    for scr in cfg.scr_grid_db:
        scale = np.sqrt(10.0 ** (scr / 10.0) * cfg.sigma2) if np.isfinite(scr) else 0.0
        z = scale * gamma * steer + clutter
        if cfg.include_known:
            records.append(TrialRecord(trial, KNOWN, np.inf, nmf_statistic(z, steer, Sigma), scr_db=scr))
        for name in cfg.estimators:
            est = estimates[name]
            if est is None:
                records.append(TrialRecord(trial, name, cfg.n, float("nan"), scr_db=scr, skipped=True))
                continue
            S, alpha = est
            records.append(TrialRecord(trial, name, cfg.n, nmf_statistic(z, steer, S), alpha, scr))
    return records


def _pd_chunk(cfg, start, stop):
    out = []
    for trial in range(start, stop):
        out.extend(_pd_trial(cfg, trial))
    return out


def simulate_pd_trials(cfg, workers=1):
    return parallel.map_trials(_pd_chunk, cfg, cfg.trials, workers)


def run_pd_experiment(cfg, workers=1):
    """Empirical detection probability per (estimator, SCR in dB)."""
    records = simulate_pd_trials(cfg, workers)
    lam = threshold_for_pfa(cfg.pfa, cfg.p)
    groups = {}
    for r in records:
        groups.setdefault((r.estimator, r.scr_db), []).append(r)
    names = ([KNOWN] if cfg.include_known else []) + list(cfg.estimators)
    rows = []
    for name in names:
        n = np.inf if name == KNOWN else cfg.n
        for scr in cfg.scr_grid_db:
            group = groups.get((name, scr), [])
            rows.append(_row(cfg.experiment_id, name, n, scr, group, lam, cfg.master_seed))
    return rows


def decision_vector(records, estimator, n, threshold):
    """Decisions of one (estimator, n) arm ordered by trial id."""
    sel = sorted((r for r in records if r.estimator == estimator and r.n == n), key=lambda r: r.trial_id)
    return np.array([r.decision(threshold) for r in sel], dtype=bool)

