"""Loss families for M-estimation of scatter.

A family supplies the loss ``rho(t)``, its derivative, the weight
``u(t) = rho'(t)``, and ``psi(t) = t * u(t)``, all evaluated at the
quadratic forms ``t = z^H Sigma^{-1} z``. New families subclass
:class:`RhoFamily` and implement :meth:`rho` and :meth:`weight`.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .errors import DomainError

__all__ = [
    "RhoFamily",
    "Gaussian",
    "Tyler",
    "Huber",
    "chi2_cdf",
    "chi2_quantile",
    "huber_constants",
    "Condition1Report",
    "check_condition1",
]


def chi2_cdf(x, k):
    """CDF of the chi-squared distribution with ``k`` degrees of freedom."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("chi2_cdf requires x >= 0")
    out = special.gammainc(k / 2.0, x / 2.0)
    return float(out) if out.ndim == 0 else out


def chi2_quantile(q, k):
    return float(stats.chi2.ppf(q, k))


def huber_constants(p, q):
    """Threshold ``c^2`` and consistency factor ``b`` of the complex Huber weight.

    ``c^2`` is half the ``q``-quantile of chi-squared with ``2p`` degrees of
    freedom, and ``b = F_{2(p+1)}(2 c^2) + c^2 (1 - q) / p`` makes the
    estimator consistent for the covariance under complex normal data.
    """
    if not 0 < q < 1:
        raise DomainError(f"Huber q must lie in (0, 1), got {q}")
    if p < 1:
        raise DomainError(f"dimension must be positive, got {p}")
    c2 = chi2_quantile(q, 2 * p) / 2.0
    b = chi2_cdf(2.0 * c2, 2 * (p + 1)) + c2 * (1.0 - q) / p
    return c2, b


class RhoFamily:
    """Base class. Subclasses define ``rho`` and ``weight``.

    ``bounded_below`` is True when ``rho`` has a finite infimum on
    ``(0, inf)``; ``scale_free`` is True when the weight is ``p / t`` so that
    the estimator depends only on the directions ``z / ||z||``.
    """

    name = "custom"
    bounded_below = True
    scale_free = False

    def rho(self, t):
        raise NotImplementedError

    def weight(self, t):
        raise NotImplementedError

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        return t * self.weight(t)


@dataclass(frozen=True)
class Gaussian(RhoFamily):
    """``rho(t) = t``; gives the sample covariance (and GLC when penalized)."""

    name = "gaussian"

    def rho(self, t):
        return np.asarray(t, dtype=float) * 1.0

    def weight(self, t):
        return np.ones_like(np.asarray(t, dtype=float))


def _positive(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("argument must be strictly positive")
    return t


def _nonnegative(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("argument must be nonnegative")
    return t


@dataclass(frozen=True)
class Tyler(RhoFamily):
    """``rho(t) = p ln t``, ``u(t) = p / t``."""

    p: int
    name = "tyler"
    bounded_below = False
    scale_free = True

    def rho(self, t):
        return self.p * np.log(_positive(t))

    def weight(self, t):
        return self.p / _positive(t)

    def psi(self, t):
        return np.full_like(_positive(t), float(self.p))


@dataclass(frozen=True)
class Huber(RhoFamily):
    """Complex Huber weight: ``1/b`` below ``c^2`` and ``c^2 / (t b)`` above."""

    p: int
    q: float
    c2: float = field(init=False)
    b: float = field(init=False)
    name = "huber"

    def __post_init__(self):
        c2, b = huber_constants(self.p, self.q)
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "b", b)

    def rho(self, t):
        # Continuous antiderivative of the weight with rho(c^2) = c^2 / b.
        t = _nonnegative(t)
        c2, b = self.c2, self.b
        return np.where(t <= c2, t / b, (c2 / b) * (1.0 + np.log(np.maximum(t, c2) / c2)))

    def weight(self, t):
        # finite at 0, so zero observations are admissible
        t = _nonnegative(t)
        return self.c2 / (np.maximum(t, self.c2) * self.b)


@dataclass
class Condition1Report:
    holds: bool
    violation_at: float = None
    reason: str = ""

    def __bool__(self):
        return self.holds


def check_condition1(family, grid=None, rtol=1e-12):
    """Check on a grid that ``rho`` is nondecreasing and log-convex.

    With ``rho`` differentiable this amounts to ``u(t) >= 0`` and
    ``psi(t) = t u(t)`` nondecreasing. The default grid is 2000 log-spaced
    points on ``[1e-6, 1e6]``.
    """
    if grid is None:
        grid = np.logspace(-6, 6, 2000)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise DomainError("grid must be one-dimensional with at least 3 points")
    if np.any(np.diff(grid) <= 0) or grid[0] <= 0:
        raise DomainError("grid must be positive and strictly increasing")

    u = np.asarray(family.weight(grid), dtype=float)
    bad = np.flatnonzero(u < 0)
    if bad.size:
        return Condition1Report(False, float(grid[bad[0]]), "negative weight")

    r = np.asarray(family.rho(grid), dtype=float)
    slack = rtol * np.maximum(np.abs(r[:-1]), 1.0)
    bad = np.flatnonzero(r[1:] < r[:-1] - slack)
    if bad.size:
        return Condition1Report(False, float(grid[bad[0] + 1]), "rho decreasing")

    psi = np.asarray(family.psi(grid), dtype=float)
    slack = rtol * np.maximum(np.abs(psi[:-1]), 1.0)
    bad = np.flatnonzero(psi[1:] < psi[:-1] - slack)
    if bad.size:
        return Condition1Report(False, float(grid[bad[0] + 1]), "psi decreasing")
    return Condition1Report(True)
