"""Reproducible generation of elliptical samples and scatter matrices.

Every draw is a function of ``(master_seed, stream_id, substream...)``.
Streams come from a counter-based Philox generator keyed by a
``numpy.random.SeedSequence`` spawn key, so trial ``i`` produces the same
numbers no matter which worker runs it or in what order.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DomainError
from .hpd import as_hpd, cholesky

__all__ = [
    "SeedSpec",
    "CesModel",
    "complex_normal",
    "k_distribution",
    "sample_ces",
    "sample_uniform_sphere",
    "toeplitz_cov",
    "random_cov",
    "haar_unitary",
]


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_id: int = 0

    def rng(self, *substream):
        """Generator for this stream, optionally for a numbered substream."""
        ss = np.random.SeedSequence(
            entropy=int(self.master_seed), spawn_key=(int(self.stream_id), *map(int, substream))
        )
        return np.random.Generator(np.random.Philox(ss))


def _rng(seed):
    if isinstance(seed, SeedSpec):
        return seed.rng()
    if isinstance(seed, np.random.Generator):
        return seed
    return SeedSpec(int(seed)).rng()


@dataclass(frozen=True, eq=False)
class CesModel:
    """Complex elliptical model: ``kind`` is ``"normal"`` or ``"k"``.

    The K-distribution is the compound Gaussian ``sqrt(tau) * x`` with
    ``x ~ CN(0, scatter)`` and unit-mean texture ``tau ~ Gamma(nu, 1/nu)``.
    """

    kind: str
    scatter: np.ndarray
    nu: float = None

    def __post_init__(self):
        if self.kind not in ("normal", "k"):
            raise DomainError(f"unknown CES kind {self.kind!r}")
        if self.kind == "k" and not (self.nu is not None and self.nu > 0):
            raise DomainError("K-distribution requires nu > 0")
        object.__setattr__(self, "scatter", as_hpd(self.scatter))


def complex_normal(scatter):
    return CesModel("normal", scatter)


def k_distribution(scatter, nu):
    return CesModel("k", scatter, nu)


def _complex_gaussian(rng, shape):
    # real and imaginary parts each N(0, 1/2), so E|x|^2 = 1
    x = rng.standard_normal(shape + (2,))
    return (x[..., 0] + 1j * x[..., 1]) / np.sqrt(2.0)


def sample_ces(model, n, seed):
    """Draw ``n`` observations (rows) from ``model``.

    The Gaussian part is drawn before the texture, so for a fixed seed the
    normal and K-distributed samples share their directions exactly up to
    the positive factors ``sqrt(tau_i)``.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    rng = _rng(seed)
    p = model.scatter.shape[0]
    L = cholesky(model.scatter)
    Z = _complex_gaussian(rng, (n, p)) @ L.T
    if model.kind == "k":
        tau = rng.gamma(model.nu, 1.0 / model.nu, size=n)
        Z = Z * np.sqrt(tau)[:, np.newaxis]
    return Z


def sample_uniform_sphere(p, n, seed, field="complex"):
    """``n`` vectors uniformly distributed on the unit sphere of C^p or R^p."""
    rng = _rng(seed)
    if field == "complex":
        X = _complex_gaussian(rng, (n, p))
    elif field == "real":
        X = rng.standard_normal((n, p))
    else:
        raise DomainError(f"field must be 'complex' or 'real', got {field!r}")
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def toeplitz_cov(p, rho):
    """Correlation matrix with entries ``rho^|i-j|``."""
    if not 0 < rho < 1:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    return linalg.toeplitz(rho ** np.arange(p)).astype(complex)


def haar_unitary(p, rng):
    """Haar-distributed unitary matrix via phase-corrected QR of a Ginibre matrix."""
    Q, R = np.linalg.qr(_complex_gaussian(rng, (p, p)))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_cov(p, seed, return_factors=False):
    """``P diag(d) P^H`` with ``P`` Haar unitary and ``d_i ~ Unif(0, 1)``.

    Eigenvalues below 1e-12 are redrawn from the same stream.
    """
    if p < 1:
        raise DomainError("p must be >= 1")
    rng = _rng(seed)
    P = haar_unitary(p, rng)
    d = rng.uniform(size=p)
    while np.any(d < 1e-12):
        small = d < 1e-12
        d[small] = rng.uniform(size=int(small.sum()))
    Sigma = (P * d) @ P.conj().T
    Sigma = (Sigma + Sigma.conj().T) / 2
    if return_factors:
        return Sigma, P, d
    return Sigma
