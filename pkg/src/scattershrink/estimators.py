"""Scatter matrix estimators.

Samples are passed as a complex array ``Z`` of shape ``(n, p)``, one
observation per row. The regularized M-estimator solves

    Sigma = (beta / n) * sum_i u(z_i^H Sigma^{-1} z_i) z_i z_i^H + alpha * I

by plain fixed-point iteration, which converges from any positive definite
starting point whenever the solution is unique.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import (
    ConditionViolated,
    DomainError,
    MaxIterationsExceeded,
    NotPositiveDefinite,
    RankDeficient,
)
from .hpd import cholesky, hermitian, log_det_inverse, trace_inverse
from .rho import Gaussian, Tyler

__all__ = [
    "ConvergenceWarning",
    "EstimateReport",
    "as_samples",
    "drop_zero_rows",
    "scm",
    "glc",
    "fixed_point_map",
    "fixed_point_residual",
    "trace_identity_residual",
    "penalized_cost",
    "solve_regularized_m",
    "tyler",
    "reg_tyler",
    "cwh",
]

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 1000


class ConvergenceWarning(UserWarning):
    pass


@dataclass
class EstimateReport:
    """Outcome of an iterative scatter estimate.

    ``residual`` is the relative Frobenius change between the last two
    iterates. ``trace_identity_residual`` is
    ``|alpha tr(S^{-1}) - p + beta mean(psi(t_i))|`` at the returned matrix,
    which vanishes at any exact solution (NaN where it does not apply).
    """

    sigma_hat: np.ndarray
    iterations: int
    residual: float
    converged: bool
    trace_identity_residual: float = float("nan")


def as_samples(Z):
    Z = np.asarray(Z)
    if Z.ndim == 1:
        Z = Z[np.newaxis, :]
    if Z.ndim != 2 or Z.shape[0] < 1 or Z.shape[1] < 1:
        raise DomainError(f"samples must be an (n, p) array, got shape {Z.shape}")
    Z = Z.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(Z)):
        raise DomainError("samples contain non-finite values")
    return Z


def drop_zero_rows(Z):
    """Remove exactly-zero observations; ``len`` of the result is ``n*``."""
    Z = as_samples(Z)
    keep = np.any(Z != 0, axis=1)
    return Z[keep]


def _outer_sum(Z, w):
    # sum_i w_i z_i z_i^H for rows z_i of Z
    return (Z.T * w) @ Z.conj()


def scm(Z):
    """Sample covariance ``(1/n) sum z_i z_i^H`` (may be singular)."""
    Z = as_samples(Z)
    return hermitian(_outer_sum(Z, np.full(Z.shape[0], 1.0 / Z.shape[0])))


def glc(Z, alpha, beta=1.0):
    """General linear combination ``beta * S + alpha * I``."""
    _check_params(alpha, beta)
    Z = as_samples(Z)
    n, p = Z.shape
    S = hermitian(_outer_sum(Z, np.full(n, beta / n)) + alpha * np.eye(p))
    cholesky(S)
    return S


def _check_params(alpha, beta):
    if not alpha >= 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    if not beta > 0:
        raise DomainError(f"beta must be > 0, got {beta}")


def _quad_forms(Sigma, Z):
    """``t_i = z_i^H Sigma^{-1} z_i`` for every row of ``Z``."""
    L = cholesky(Sigma)
    W = linalg.solve_triangular(L, Z.T, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", W.real, W.real) + np.einsum("ij,ij->j", W.imag, W.imag)


def _prepare(Z, family):
    Z = as_samples(Z)
    if family.scale_free:
        Z = drop_zero_rows(Z)
        if Z.shape[0] == 0:
            raise DomainError("all observations are zero")
    return Z


def fixed_point_map(Z, family, alpha, beta, Sigma):
    """One application of the regularized M-estimating equation's right side."""
    n, p = Z.shape
    u = family.weight(_quad_forms(Sigma, Z))
    return hermitian(_outer_sum(Z, (beta / n) * u) + alpha * np.eye(p))


def fixed_point_residual(Z, family, alpha, beta, Sigma):
    """``||Sigma - RHS(Sigma)|| / ||Sigma||`` in the Frobenius norm."""
    Z = _prepare(Z, family)
    rhs = fixed_point_map(Z, family, alpha, beta, Sigma)
    return float(np.linalg.norm(Sigma - rhs) / np.linalg.norm(Sigma))


def trace_identity_residual(Z, family, alpha, beta, Sigma):
    Z = _prepare(Z, family)
    p = Z.shape[1]
    psi = family.psi(_quad_forms(Sigma, Z))
    return float(abs(alpha * trace_inverse(Sigma) - p + beta * np.mean(psi)))


def penalized_cost(Z, family, alpha, beta, Sigma):
    """``(beta/n) sum rho(t_i) - ln|Sigma^{-1}| + alpha tr(Sigma^{-1})``."""
    Z = _prepare(Z, family)
    t = _quad_forms(Sigma, Z)
    return float(
        beta * np.mean(family.rho(t)) - log_det_inverse(Sigma) + alpha * trace_inverse(Sigma)
    )


def _finish(report, strict):
    if not report.converged:
        if np.isfinite(report.residual):
            msg = (
                f"no convergence after {report.iterations} iterations "
                f"(relative change {report.residual:.3e})"
            )
        else:
            msg = f"iterates diverged after {report.iterations} iterations"
        if strict:
            raise MaxIterationsExceeded(msg, report)
        warnings.warn(msg, ConvergenceWarning, stacklevel=3)
    return report


def _initial(init, p):
    if init is None:
        return np.eye(p, dtype=complex)
    init = hermitian(init)
    if init.shape != (p, p):
        raise DomainError(f"initial matrix must be {p}x{p}")
    cholesky(init)
    return init


def _tyler_admissibility(Z, alpha, beta, check_conditions):
    """Validate (alpha, beta) for the regularized Tyler cost."""
    p = Z.shape[1]
    if not alpha > 0:
        raise DomainError("regularized Tyler requires alpha > 0")
    if not 0 < beta < 1:
        raise DomainError(f"regularized Tyler requires 0 < beta < 1, got {beta}")
    if beta < 1.0 / p or not check_conditions:
        return
    from .metrics import check_condition_a, check_condition_b

    cond_b = check_condition_b(Z, beta)
    if not cond_b.holds:
        raise ConditionViolated(
            "Condition B fails: the penalized Tyler cost has no minimum", cond_b.witness
        )
    if not check_condition_a(Z, beta).holds:
        warnings.warn(
            "existence indeterminate: Condition B holds but Condition A fails",
            ConvergenceWarning,
            stacklevel=3,
        )


def solve_regularized_m(
    Z,
    family,
    alpha,
    beta=1.0,
    init=None,
    tol=DEFAULT_TOL,
    max_iter=DEFAULT_MAX_ITER,
    check_conditions=False,
    strict=False,
):
    """Regularized M-estimator of scatter by fixed-point iteration.

    Parameters
    ----------
    Z : array_like of shape (n, p)
        Complex observations, one per row. For Tyler-type weights exactly
        zero rows are dropped and ``n*`` replaces ``n``.
    family : RhoFamily
        Loss family supplying the weight ``u(t)``.
    alpha, beta : float
        Ridge (``alpha >= 0``) and robustness (``beta > 0``) parameters.
    init : array_like, optional
        Positive definite starting point; the identity by default.
    tol : float
        Stop when the relative Frobenius change falls below ``tol``.
    max_iter : int
        Iteration cap.
    check_conditions : bool
        For Tyler weights with ``beta >= 1/p``, verify the sample
        conditions exactly before solving (exponential cost).
    strict : bool
        Raise :class:`MaxIterationsExceeded` instead of warning on failure.

    Returns
    -------
    EstimateReport
    """
    _check_params(alpha, beta)
    Z = _prepare(Z, family)
    n, p = Z.shape
    if not family.bounded_below:
        _tyler_admissibility(Z, alpha, beta, check_conditions)
    Sigma = _initial(init, p)
    constant_map = isinstance(family, Gaussian)
    # For scale-free weights the overall scale relaxes at rate beta, which
    # is slow as beta -> 1. Every fixed point satisfies
    # alpha tr(Sigma^-1) = p (1 - beta), so impose it on each iterate.
    rescale = family.scale_free and alpha > 0

    residual = np.inf
    k = 0
    for k in range(1, max_iter + 1):
        try:
            new = fixed_point_map(Z, family, alpha, beta, Sigma)
            if rescale:
                new = new * (alpha * trace_inverse(new) / (p * (1.0 - beta)))
        except NotPositiveDefinite as exc:
            if alpha == 0:
                raise NotPositiveDefinite(
                    f"iterate {k} lost positive definiteness; use alpha > 0"
                ) from exc
            # Every exact iterate dominates alpha*I, so this is numerical
            # blow-up of an unbounded (divergent) sequence.
            k -= 1
            residual = np.inf
            break
        residual = float(np.linalg.norm(new - Sigma) / np.linalg.norm(Sigma))
        Sigma = new
        if constant_map:
            # u is constant, so the first image is already the fixed point
            residual = 0.0
        if residual <= tol:
            break

    report = EstimateReport(
        sigma_hat=Sigma,
        iterations=k,
        residual=residual,
        converged=residual <= tol,
        trace_identity_residual=_safe_trace_identity(Z, family, alpha, beta, Sigma),
    )
    return _finish(report, strict)


def _safe_trace_identity(Z, family, alpha, beta, Sigma):
    try:
        return trace_identity_residual(Z, family, alpha, beta, Sigma)
    except NotPositiveDefinite:
        return float("nan")


def _normalize_trace_inverse(Sigma):
    p = Sigma.shape[0]
    return Sigma * (trace_inverse(Sigma) / p)


def tyler(Z, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, init=None, strict=False):
    """Tyler's M-estimator normalized so that ``tr(Sigma^{-1}) = p``.

    Zero observations are ignored. Raises :class:`RankDeficient` when the
    nonzero observations do not span ``C^p``.
    """
    Z = drop_zero_rows(Z)
    n, p = Z.shape
    if n < p or np.linalg.matrix_rank(Z) < p:
        raise RankDeficient(f"{n} nonzero observations do not span C^{p}")
    family = Tyler(p)
    Sigma = _initial(init, p)
    Sigma = Sigma * (p / np.trace(Sigma).real)

    residual = np.inf
    k = 0
    for k in range(1, max_iter + 1):
        new = fixed_point_map(Z, family, 0.0, 1.0, Sigma)
        new = new * (p / np.trace(new).real)
        residual = float(np.linalg.norm(new - Sigma) / np.linalg.norm(Sigma))
        Sigma = new
        if residual <= tol:
            break

    Sigma = _normalize_trace_inverse(Sigma)
    report = EstimateReport(
        sigma_hat=Sigma,
        iterations=k,
        residual=residual,
        converged=residual <= tol,
        trace_identity_residual=trace_identity_residual(Z, family, 0.0, 1.0, Sigma),
    )
    return _finish(report, strict)


def reg_tyler(
    Z,
    alpha,
    beta=None,
    init=None,
    tol=DEFAULT_TOL,
    max_iter=DEFAULT_MAX_ITER,
    check_conditions=False,
    strict=False,
):
    """Regularized Tyler's M-estimator.

    With the default ``beta = 1 - alpha`` the solution satisfies
    ``tr(Sigma^{-1}) = p``; any other ``beta`` gives the multiple
    ``beta / (1 - alpha)`` of that solution.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if beta is None:
        beta = 1.0 - alpha
    Z = drop_zero_rows(Z)
    return solve_regularized_m(
        Z,
        Tyler(Z.shape[1]),
        alpha,
        beta,
        init=init,
        tol=tol,
        max_iter=max_iter,
        check_conditions=check_conditions,
        strict=strict,
    )


def cwh(Z, alpha, init=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, strict=False):
    """Trace-normalized diagonally loaded Tyler iteration (CWH estimator).

    Iterates ``S <- (1-alpha)(p/n) sum z z^H / (z^H V^{-1} z) + alpha I`` and
    ``V <- p S / tr(S)``; convergence is judged on ``V``, which is returned
    with ``tr(V) = p``.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    Z = drop_zero_rows(Z)
    n, p = Z.shape
    family = Tyler(p)
    V = _initial(init, p)
    V = V * (p / np.trace(V).real)

    residual = np.inf
    k = 0
    for k in range(1, max_iter + 1):
        S = fixed_point_map(Z, family, alpha, 1.0 - alpha, V)
        new = S * (p / np.trace(S).real)
        residual = float(np.linalg.norm(new - V) / np.linalg.norm(V))
        V = new
        if residual <= tol:
            break

    report = EstimateReport(sigma_hat=V, iterations=k, residual=residual, converged=residual <= tol)
    return _finish(report, strict)
