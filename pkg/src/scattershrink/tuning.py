"""Selection of the shrinkage parameter of the regularized Tyler estimator.

A shape matrix ``M`` is a scatter matrix rescaled so that
``tr(M^{-1}) = p``. The oracle shrinkage minimizes the expected squared
distance between ``M^{-1} Sigma_alpha`` and a multiple of the identity,
where ``Sigma_alpha = (1 - alpha) C + alpha I`` is the one-step
(clairvoyant) estimator built with the true shape, and
``C = (p/n) sum z z^H / (z^H M^{-1} z)``.
"""

import numpy as np

from .errors import DomainError, NormalizationViolated, NotReal
from .estimators import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    _outer_sum,
    _quad_forms,
    drop_zero_rows,
    reg_tyler,
    tyler,
)
from .hpd import as_hpd, hermitian, inverse, trace_inverse

__all__ = [
    "NORMALIZATION_RTOL",
    "scale_measure",
    "shape_matrix",
    "check_shape",
    "oracle_alpha_complex",
    "oracle_alpha_real",
    "oracle_alpha_cwh",
    "clairvoyant_estimate",
    "pilot_shape",
    "plugin_alpha",
    "plugin_alpha_cwh",
]

NORMALIZATION_RTOL = 1e-6


def scale_measure(S):
    """``tau(S) = p / tr(S^{-1})``."""
    S = np.asarray(S)
    return S.shape[0] / trace_inverse(S)


def shape_matrix(S):
    """``S / tau(S)``, which satisfies ``tr(V^{-1}) = p``."""
    S = as_hpd(S)
    return S / scale_measure(S)


def check_shape(M, rtol=NORMALIZATION_RTOL):
    """Return ``M`` as an HPD array, or raise if ``tr(M^{-1}) != p``."""
    M = as_hpd(M)
    p = M.shape[0]
    err = abs(trace_inverse(M) - p)
    if err > rtol * p:
        raise NormalizationViolated(f"tr(M^-1) differs from p={p} by {err:.3e}")
    return M


def _oracle_terms(M):
    Minv = inverse(M)
    p = M.shape[0]
    tr_m = float(np.trace(M).real)
    # tr(M^-2) = ||M^-1||_F^2 for Hermitian M^-1
    dispersion = float(np.sum(np.abs(Minv) ** 2)) / p - 1.0
    return p, tr_m, max(dispersion, 0.0)


def oracle_alpha_complex(M, n):
    """Oracle shrinkage for complex data.

    ``(p tr(M) - 1) / (p tr(M) - 1 + n (p+1) (tr(M^{-2})/p - 1))``, equal to
    one exactly when ``M = I``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    p, tr_m, dispersion = _oracle_terms(check_shape(M))
    if p == 1:
        return 1.0
    a = p * tr_m - 1.0
    return a / (a + n * (p + 1) * dispersion)


def oracle_alpha_real(M, n):
    """Oracle shrinkage for real-valued data."""
    if n < 1:
        raise DomainError("n must be >= 1")
    M = np.asarray(M)
    if np.iscomplexobj(M) and np.max(np.abs(M.imag)) > 1e-12 * np.max(np.abs(M)):
        raise NotReal("real-case oracle requires a real shape matrix")
    p, tr_m, dispersion = _oracle_terms(check_shape(M.real))
    if p == 1:
        return 1.0
    a = p - 2.0 + p * tr_m
    return a / (a + n * (p + 2) * dispersion)


def oracle_alpha_cwh(M, n):
    """Oracle shrinkage for the trace-normalized (CWH) iteration.

    ``M`` is normalized to ``tr(M) = p``. The value minimizes
    ``E||(1-alpha) C + alpha I - M||^2`` over alpha using the complex
    moments of ``C``, giving
    ``(p^3 - tr M^2) / (p^3 - tr M^2 + n (p+1) (tr M^2 - p))``.
    """
    M = as_hpd(M)
    p = M.shape[0]
    M = M * (p / np.trace(M).real)
    tr_m2 = float(np.sum(np.abs(M) ** 2))
    a = p**3 - tr_m2
    b = n * (p + 1) * max(tr_m2 - p, 0.0)
    if a + b == 0:
        return 1.0
    return a / (a + b)


def clairvoyant_estimate(Z, M, alpha):
    """``(1 - alpha) (p/n) sum z z^H / (z^H M^{-1} z) + alpha I``."""
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    Z = drop_zero_rows(Z)
    n, p = Z.shape
    M = as_hpd(M)
    t = _quad_forms(M, Z)
    C = _outer_sum(Z, (p / n) / t)
    return hermitian((1.0 - alpha) * C + alpha * np.eye(p))


def pilot_shape(Z, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Pilot shape estimate used by the plug-in shrinkage rule.

    Tyler's estimator when ``n* >= p``; otherwise the regularized Tyler
    estimator with ``beta = n*/(2p)`` and ``alpha = 1 - beta``. Either way
    the result is rescaled to ``tr(Sigma^{-1}) = p``.
    """
    Z = drop_zero_rows(Z)
    n, p = Z.shape
    if n >= p:
        report = tyler(Z, tol=tol, max_iter=max_iter)
    else:
        beta = 0.5 * n / p
        report = reg_tyler(Z, 1.0 - beta, beta, tol=tol, max_iter=max_iter)
    return shape_matrix(report.sigma_hat)


def plugin_alpha(Z, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Data-driven shrinkage: the complex oracle evaluated at the pilot shape."""
    Z = drop_zero_rows(Z)
    return oracle_alpha_complex(pilot_shape(Z, tol, max_iter), Z.shape[0])


def plugin_alpha_cwh(Z, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    Z = drop_zero_rows(Z)
    return oracle_alpha_cwh(pilot_shape(Z, tol, max_iter), Z.shape[0])
