import warnings

import numpy as np
import pytest

from scattershrink.errors import (
    ConditionViolated,
    DomainError,
    MaxIterationsExceeded,
    NotPositiveDefinite,
    RankDeficient,
)
from scattershrink.estimators import (
    ConvergenceWarning,
    cwh,
    fixed_point_map,
    fixed_point_residual,
    glc,
    penalized_cost,
    reg_tyler,
    scm,
    solve_regularized_m,
    trace_identity_residual,
    tyler,
)
from scattershrink.hpd import geodesic_point, inverse, is_positive_definite, matrix_power, random_hpd
from scattershrink.rho import Gaussian, Huber, Tyler
from scattershrink.sampling import haar_unitary

from conftest import cgauss


def basis_data(c1=2.0, c2=-0.5j):
    return np.array([[c1, 0], [0, c2]], dtype=complex)


# --- scm / glc ---------------------------------------------------------------

def test_scm_examples(rng):
    np.testing.assert_allclose(scm(np.array([[1, 0]], dtype=complex)), np.diag([1, 0]))
    Z = np.sqrt(2) * np.eye(2, dtype=complex)
    np.testing.assert_allclose(scm(Z), np.eye(2), atol=1e-15)
    S = scm(cgauss(rng, 5000, 3))
    assert np.linalg.norm(S - np.eye(3)) < 0.15


def test_scm_singular_reported_not_raised():
    S = scm(np.array([[1, 1j]], dtype=complex))
    assert not is_positive_definite(S)


def test_glc_examples(rng):
    Z = cgauss(rng, 10, 3)
    np.testing.assert_allclose(glc(Z, 0.0, 1.0), scm(Z), atol=1e-14)
    Z = np.sqrt(2) * np.eye(2, dtype=complex)
    np.testing.assert_allclose(glc(Z, 2.0, 1.0), 3 * np.eye(2), atol=1e-14)


def test_glc_eigenvalue_map(rng):
    Z = cgauss(rng, 7, 4)
    a, b = 0.3, 0.7
    lam = np.linalg.eigvalsh(glc(Z, a, b))
    np.testing.assert_allclose(lam, b * np.linalg.eigvalsh(scm(Z)) + a, atol=1e-10)


def test_glc_singular_without_loading():
    with pytest.raises(NotPositiveDefinite):
        glc(np.array([[1, 0]], dtype=complex), 0.0, 1.0)


# --- general solver ----------------------------------------------------------

def test_gaussian_family_one_step(rng):
    Z = cgauss(rng, 6, 3)
    init = random_hpd(3, rng)
    rep = solve_regularized_m(Z, Gaussian(), 0.4, 0.8, init=init)
    assert rep.iterations == 1 and rep.converged
    np.testing.assert_allclose(rep.sigma_hat, glc(Z, 0.4, 0.8), rtol=0, atol=1e-15)


def test_tyler_trace_identity_specialization(rng):
    p, alpha, beta = 4, 0.3, 0.2
    Z = cgauss(rng, 12, p)
    rep = solve_regularized_m(Z, Tyler(p), alpha, beta, tol=1e-12)
    tr_inv = np.trace(inverse(rep.sigma_hat)).real
    assert abs(alpha * tr_inv - p * (1 - beta)) < 1e-8
    assert rep.trace_identity_residual < 1e-8


def test_huber_uniqueness_two_inits(rng):
    Z = cgauss(rng, 20, 4)
    fam = Huber(4, 0.5)
    a = solve_regularized_m(Z, fam, 0.1, 1.0, init=random_hpd(4, rng), tol=1e-12)
    b = solve_regularized_m(Z, fam, 0.1, 1.0, init=10 * random_hpd(4, rng), tol=1e-12)
    assert np.linalg.norm(a.sigma_hat - b.sigma_hat) < 1e-8


@pytest.mark.parametrize("family", ["gaussian", "huber", "tyler"])
@pytest.mark.parametrize("p", [2, 5, 8])
def test_residuals_at_convergence(family, p):
    rng = np.random.default_rng(p)
    for n in (p, 2 * p, 4 * p):
        Z = cgauss(rng, n, p)
        fam = {"gaussian": Gaussian(), "huber": Huber(p, 0.5), "tyler": Tyler(p)}[family]
        beta = 0.5 / p if family == "tyler" else 1.0
        tol = 1e-10
        rep = solve_regularized_m(Z, fam, 0.5, beta, tol=tol)
        assert rep.converged
        assert fixed_point_residual(Z, fam, 0.5, beta, rep.sigma_hat) <= 10 * tol
        assert rep.trace_identity_residual <= 1e-8


def test_zero_rows_dropped_for_tyler_kept_for_huber(rng):
    Z = cgauss(rng, 8, 3)
    Z0 = np.vstack([Z, np.zeros((2, 3))])
    a = solve_regularized_m(Z, Tyler(3), 0.2, 0.3, tol=1e-12).sigma_hat
    b = solve_regularized_m(Z0, Tyler(3), 0.2, 0.3, tol=1e-12).sigma_hat
    assert np.linalg.norm(a - b) < 1e-9
    # zero rows still count toward n for bounded weights
    a = solve_regularized_m(Z, Huber(3, 0.5), 0.2, 1.0, tol=1e-12).sigma_hat
    b = solve_regularized_m(Z0, Huber(3, 0.5), 0.2, 1.0, tol=1e-12).sigma_hat
    np.testing.assert_allclose(b, solve_regularized_m(Z0, Huber(3, 0.5), 0.2, 1.0, tol=1e-12).sigma_hat)
    assert np.linalg.norm(a - b) > 1e-3


def test_tyler_family_admissibility(rng):
    Z = cgauss(rng, 8, 3)
    with pytest.raises(DomainError):
        solve_regularized_m(Z, Tyler(3), 0.0, 0.2)
    with pytest.raises(DomainError):
        solve_regularized_m(Z, Tyler(3), 0.2, 1.0)


def test_condition_check_raises_when_b_fails():
    Z = np.outer(np.arange(1, 5), [1, 1j]).astype(complex)
    with pytest.raises(ConditionViolated) as exc:
        solve_regularized_m(Z, Tyler(2), 0.1, 0.9, check_conditions=True)
    assert exc.value.witness is not None


def test_condition_boundary_warns_indeterminate():
    # B holds with equality while A fails
    Z = np.array([[1, 1j], [2, 2j]], dtype=complex)
    with pytest.warns(UserWarning) as record:
        rep = solve_regularized_m(Z, Tyler(2), 0.5, 0.5, check_conditions=True, max_iter=50)
    assert any("indeterminate" in str(w.message) for w in record)
    assert not rep.converged


def test_max_iterations_strict(rng):
    Z = cgauss(rng, 10, 3)
    with pytest.raises(MaxIterationsExceeded) as exc:
        solve_regularized_m(Z, Huber(3, 0.5), 0.01, 1.0, max_iter=2, strict=True)
    assert not exc.value.report.converged
    with pytest.warns(ConvergenceWarning):
        rep = solve_regularized_m(Z, Huber(3, 0.5), 0.01, 1.0, max_iter=2)
    assert not rep.converged and rep.iterations == 2


def test_condition_b_violated_diverges():
    Z = np.outer(np.arange(1, 5), [1, 1j]).astype(complex)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        rep = solve_regularized_m(Z, Tyler(2), 0.1, 0.9, max_iter=5000)
    assert not rep.converged


# --- Tyler -------------------------------------------------------------------

def test_tyler_basis_gives_identity():
    rep = tyler(basis_data(3.0, 1j * 0.2), tol=1e-12)
    np.testing.assert_allclose(rep.sigma_hat, np.eye(2), atol=1e-10)
    # direct substitution into the unregularized equation
    T = fixed_point_map(basis_data(), Tyler(2), 0.0, 1.0, np.eye(2))
    np.testing.assert_allclose(T, np.eye(2), atol=1e-14)


def test_tyler_scale_invariance(rng):
    Z = cgauss(rng, 30, 3)
    a = tyler(Z, tol=1e-12).sigma_hat
    b = tyler((7 + 3j) * Z, tol=1e-12).sigma_hat
    assert np.linalg.norm(a - b) < 1e-9


def test_tyler_residual_and_normalization(rng):
    Z = cgauss(rng, 30, 3)
    rep = tyler(Z, tol=1e-12)
    S = rep.sigma_hat
    assert np.trace(inverse(S)).real == pytest.approx(3.0, abs=1e-10)
    # Eq. with alpha = 0, beta = 1 is scale free: residual of the shape
    T = fixed_point_map(Z, Tyler(3), 0.0, 1.0, S)
    assert np.linalg.norm(T - S) / np.linalg.norm(S) < 1e-8


def test_tyler_rank_deficient(rng):
    with pytest.raises(RankDeficient):
        tyler(cgauss(rng, 2, 3))
    Z = cgauss(rng, 6, 1) @ np.array([[1, 1j, 0]])
    with pytest.raises(RankDeficient):
        tyler(Z)


# --- regularized Tyler -------------------------------------------------------

def test_reg_tyler_scale_relation(rng):
    # rescaling a solution rescales alpha, so the (alpha, beta) solution is a
    # multiple of the shape-constrained solution that shares its beta
    for _ in range(5):
        Z = cgauss(rng, 10, 4)
        alpha, beta = 0.3, 0.15
        a = reg_tyler(Z, alpha, beta, tol=1e-13).sigma_hat
        b = reg_tyler(Z, 1 - beta, beta, tol=1e-13).sigma_hat
        assert np.linalg.norm(a - alpha / (1 - beta) * b) < 1e-8


def test_reg_tyler_shape_depends_on_beta_only(rng):
    Z = cgauss(rng, 10, 4)
    a = reg_tyler(Z, 0.1, 0.2, tol=1e-13).sigma_hat
    b = reg_tyler(Z, 0.6, 0.2, tol=1e-13).sigma_hat
    assert np.linalg.norm(a / np.trace(a) - b / np.trace(b)) < 1e-10
    c = reg_tyler(Z, 0.1, 0.5, tol=1e-13).sigma_hat
    assert np.linalg.norm(a / np.trace(a) - c / np.trace(c)) > 1e-3


def test_reg_tyler_shape_constraint(rng):
    Z = cgauss(rng, 10, 5)
    S = reg_tyler(Z, 0.4, tol=1e-12).sigma_hat
    assert abs(np.trace(inverse(S)).real - 5) < 1e-8


def test_reg_tyler_insufficient_support(rng):
    Z = cgauss(rng, 2, 4)
    rep = reg_tyler(Z, 0.5, 0.4, tol=1e-12)
    assert rep.converged
    assert fixed_point_residual(Z, Tyler(4), 0.5, 0.4, rep.sigma_hat) < 1e-8


def test_reg_tyler_alpha_range(rng):
    Z = cgauss(rng, 10, 3)
    for a in (0.0, 1.0, 1.5):
        with pytest.raises(DomainError):
            reg_tyler(Z, a)


# --- CWH ---------------------------------------------------------------------

def test_cwh_trace_and_basis():
    rep = cwh(basis_data(), 0.3, tol=1e-12)
    np.testing.assert_allclose(rep.sigma_hat, np.eye(2), atol=1e-10)
    assert np.trace(rep.sigma_hat).real == pytest.approx(2.0, abs=1e-12)


def test_cwh_initialization_independence(rng):
    Z = cgauss(rng, 12, 4)
    a = cwh(Z, 0.2, init=random_hpd(4, rng), tol=1e-12).sigma_hat
    b = cwh(Z, 0.2, init=5 * random_hpd(4, rng), tol=1e-12).sigma_hat
    assert np.linalg.norm(a - b) < 1e-8
    assert np.trace(a).real == pytest.approx(4.0, abs=1e-10)


# --- invariants --------------------------------------------------------------

def test_spectral_sandwich(rng):
    p = 4
    Z = cgauss(rng, 12, p)
    fam, alpha, beta = Huber(p, 0.5), 0.2, 1.0
    S_hat = solve_regularized_m(Z, fam, alpha, beta, tol=1e-14, max_iter=5000).sigma_hat
    W = matrix_power(S_hat, -0.5)
    S = 5 * random_hpd(p, rng)
    lam_max, lam_min = [], []
    for _ in range(60):
        lam = np.linalg.eigvalsh(W @ S @ W)
        lam_max.append(lam[-1])
        lam_min.append(lam[0])
        S = fixed_point_map(Z, fam, alpha, beta, S)
    for k in range(len(lam_max) - 1):
        if lam_max[k] > 1 + 1e-9:
            assert lam_max[k + 1] < lam_max[k]
        else:
            assert lam_max[k + 1] <= 1 + 1e-9
        if lam_min[k] < 1 - 1e-9:
            assert lam_min[k + 1] > lam_min[k]
        else:
            assert lam_min[k + 1] >= 1 - 1e-9


def test_geodesic_midpoint_convexity(rng):
    p = 3
    Z = cgauss(rng, 9, p)
    fam = Huber(p, 0.5)
    for _ in range(100):
        S0, S1 = random_hpd(p, rng), random_hpd(p, rng)
        mid = penalized_cost(Z, fam, 0.3, 1.0, geodesic_point(S0, S1, 0.5))
        ends = 0.5 * (penalized_cost(Z, fam, 0.3, 1.0, S0) + penalized_cost(Z, fam, 0.3, 1.0, S1))
        assert mid <= ends + 1e-9
        assert mid < ends


def test_global_optimality_spot_check(rng):
    p = 4
    Z = cgauss(rng, 16, p)
    fam = Huber(p, 0.5)
    S = solve_regularized_m(Z, fam, 0.2, 1.0, tol=1e-13).sigma_hat
    base = penalized_cost(Z, fam, 0.2, 1.0, S)
    for _ in range(50):
        E = cgauss(rng, p, p)
        E = E + E.conj().T
        E *= 1e-3 / np.linalg.norm(E)
        assert base <= penalized_cost(Z, fam, 0.2, 1.0, S + E) + 1e-12


@pytest.mark.parametrize("fam", [Gaussian(), Huber(4, 0.5), Tyler(4)])
def test_unitary_equivariance(rng, fam):
    p = 4
    Z = cgauss(rng, 12, p)
    U = haar_unitary(p, rng)
    beta = 0.1 if isinstance(fam, Tyler) else 1.0
    a = solve_regularized_m(Z, fam, 0.3, beta, tol=1e-13).sigma_hat
    b = solve_regularized_m(Z @ U.T, fam, 0.3, beta, tol=1e-13).sigma_hat
    assert np.linalg.norm(b - U @ a @ U.conj().T) < 1e-8


def test_trace_identity_function(rng):
    Z = cgauss(rng, 10, 3)
    S = solve_regularized_m(Z, Huber(3, 0.9), 0.5, 1.0, tol=1e-13).sigma_hat
    assert trace_identity_residual(Z, Huber(3, 0.9), 0.5, 1.0, S) < 1e-9
    assert trace_identity_residual(Z, Huber(3, 0.9), 0.5, 1.0, 2 * S) > 1e-3
