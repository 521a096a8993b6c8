"""Shape distance and exact sample-condition checks for regularized Tyler."""

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch
from .estimators import drop_zero_rows
from .hpd import as_hpd

__all__ = [
    "shape_distance",
    "SubspaceVerdict",
    "check_condition_a",
    "check_condition_b",
    "RANK_RTOL",
    "MEMBERSHIP_RTOL",
    "DEFAULT_BUDGET",
]

RANK_RTOL = 1e-10
MEMBERSHIP_RTOL = 1e-10
DEFAULT_BUDGET = 10**6


def shape_distance(M, S):
    """Scale-free distance ``||(p / tr(M^{-1} S)) M^{-1} S - I||_F^2``.

    Zero exactly when ``S`` is proportional to ``M``; invariant to
    positive rescaling of either argument.
    """
    M = as_hpd(M)
    S = as_hpd(S)
    if M.shape != S.shape:
        raise DimensionMismatch(f"shapes differ: {M.shape} vs {S.shape}")
    p = M.shape[0]
    A = np.linalg.solve(M, S)
    A = A * (p / np.trace(A).real)
    return float(np.linalg.norm(A - np.eye(p)) ** 2)


@dataclass
class SubspaceVerdict:
    """Result of a subspace-concentration check.

    On failure ``witness`` holds an orthonormal basis (``p x dim``) of a
    violating subspace and ``count`` the number of observations in it.
    """

    holds: bool
    witness: np.ndarray = None
    count: int = 0
    dim: int = 0

    def __bool__(self):
        return self.holds


def _subspace_check(Z, beta, strict, budget):
    Z = drop_zero_rows(Z)
    n, p = Z.shape
    if p == 1:
        return SubspaceVerdict(True)
    work = sum(comb(n, k) for k in range(1, p))
    if work > budget:
        raise BudgetExceeded(f"{work} candidate subsets exceed the budget of {budget}")

    norms = np.linalg.norm(Z, axis=1)
    seen = set()
    for k in range(1, p):
        for subset in combinations(range(n), k):
            B = Z[list(subset)].T
            s = np.linalg.svd(B, compute_uv=False)
            if np.sum(s > RANK_RTOL * s[0]) < k:
                # span is generated by a smaller subset, already visited
                continue
            Q, _ = np.linalg.qr(B)
            resid = np.linalg.norm(Z.T - Q @ (Q.conj().T @ Z.T), axis=0)
            members = frozenset(np.flatnonzero(resid <= MEMBERSHIP_RTOL * norms).tolist())
            if (k, members) in seen:
                continue
            seen.add((k, members))
            count = len(members)
            # count / n  vs  k / (p beta), compared without division
            lhs, rhs = count * p * beta, float(k * n)
            equal = abs(lhs - rhs) <= 1e-12 * max(lhs, rhs)
            violated = (lhs > rhs and not equal) or (strict and equal)
            if violated:
                return SubspaceVerdict(False, Q, count, k)
    return SubspaceVerdict(True)


def check_condition_a(Z, beta, budget=DEFAULT_BUDGET):
    """Sufficient condition: ``#{z_i in V}/n < dim(V)/(p beta)`` for every proper subspace.

    Exact: only subspaces spanned by observations can maximize the count
    at a given dimension, so those are enumerated.
    """
    return _subspace_check(Z, beta, strict=True, budget=budget)


def check_condition_b(Z, beta, budget=DEFAULT_BUDGET):
    """Necessary condition: as :func:`check_condition_a` with ``<=``."""
    return _subspace_check(Z, beta, strict=False, budget=budget)
