import math
import warnings

import numpy as np
import pytest

from gofgamma.gof import cov_k, cov_k0
from gofgamma.specfun import DomainError, laguerre_norm
from gofgamma.spectrum import (InterlacingWarning, PoleProximityError, conjecture_gap,
                               eigenfunction_s, eigenfunction_s0, eigenvalues_to_trace,
                               fourier_e, g_components, g_sign_function, log_rho, rho,
                               scree_m, solve_eigenvalues, spectral_params, trace_s, trace_s0)

TABLE_ONE = {0.5: 15, 0.75: 12, 1.0: 10, 3.0: 6, 5.0: 4, 10.0: 3, 20.0: 2, 50.0: 1}


def _rho(k, p):
    return math.exp(float(log_rho(k, p)))


@pytest.fixture(scope="module")
def solutions():
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("error", InterlacingWarning)
        for a in (0.5, 1.0, 2.3, 5.0, 100.0):
            out[a] = eigenvalues_to_trace(spectral_params(a))
    return out


# ---- parameters and S0 -------------------------------------------------------------

def test_params_closed_forms():
    p = spectral_params(1.0)
    assert p.beta == pytest.approx(math.sqrt(5), rel=1e-15)
    assert p.b2 == pytest.approx((3 - math.sqrt(5)) / 2, rel=1e-14)
    p = spectral_params(4.0)
    assert p.beta == pytest.approx(math.sqrt(2), rel=1e-15)
    assert p.b_alpha == pytest.approx(math.sqrt(2) - 1, rel=1e-14)


@pytest.mark.parametrize("alpha", [0.5, 0.75, 1.0, 2.3, 7.0, 100.0, 1e4])
def test_params_quadratic_identity(alpha):
    p = spectral_params(alpha)
    assert p.beta > 1 and 0 < p.b_alpha < 1 and 0 < p.r < 1
    assert p.r - (alpha + 2) * math.sqrt(p.r) + 1 == pytest.approx(0.0, abs=1e-12)
    # the cancellation-free b^2 agrees with 1 + alpha (1 - beta) / 2
    if alpha < 100:
        assert p.b2 == pytest.approx(1 + alpha * (1 - p.beta) / 2, rel=1e-10)


def test_rho_sequence():
    p = spectral_params(1.0)
    assert rho(0, p).value == pytest.approx((3 - math.sqrt(5)) / 2, rel=1e-14)
    for k in range(10):
        assert rho(k + 1, p).value / rho(k, p).value == pytest.approx(p.r, rel=1e-13)
    with pytest.raises(DomainError):
        rho(-1, p)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.3, 5.0, 100.0])
def test_trace_s0_sum(alpha):
    p = spectral_params(alpha)
    total = math.fsum(rho(k, p).value for k in range(200))
    assert total == pytest.approx(trace_s0(p), rel=1e-12)
    assert trace_s(p) < trace_s0(p)


def test_trace_s_geiger():
    assert trace_s(spectral_params(100.0)) == pytest.approx(6.721718e-6, rel=1e-6)


@pytest.mark.parametrize("alpha", [1.0, 2.3])
def test_traces_by_quadrature(alpha, rules):
    rule = rules(alpha)
    p = spectral_params(alpha)
    s = rule.nodes
    assert rule.integrate(lambda x: cov_k0(x, x, alpha)) == pytest.approx(trace_s0(p), rel=1e-8)
    assert rule.integrate(lambda x: cov_k(x, x, alpha)) == pytest.approx(trace_s(p), rel=1e-8)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.3, 5.0])
def test_eigenfunctions_s0_orthonormal(alpha, rules):
    p = spectral_params(alpha)
    rule = rules(alpha)
    assert eigenfunction_s0(0, p, 0.0) == pytest.approx(p.beta ** (alpha / 2), rel=1e-15)
    phi = np.array([eigenfunction_s0(k, p, rule.nodes) for k in range(9)])
    gram = (phi * rule.weights) @ phi.T
    assert np.allclose(gram, np.eye(9), atol=1e-9)


@pytest.mark.parametrize("alpha", [1.0, 2.3])
@pytest.mark.parametrize("k", range(5))
def test_s0_eigen_equation(alpha, k, rules):
    p = spectral_params(alpha)
    rule = rules(alpha)
    for s in (0.0, 0.4, 1.3, 3.0, 6.5):
        lhs = rule.integrate(lambda t: cov_k0(s, t, alpha) * eigenfunction_s0(k, p, t))
        rhs = rho(k, p).value * eigenfunction_s0(k, p, s)
        assert lhs == pytest.approx(rhs, abs=1e-7)


@pytest.mark.parametrize("alpha", [1.0, 2.3])
def test_poisson_kernel_resummation(alpha):
    p = spectral_params(alpha)
    s = np.linspace(0, 3 * alpha + 3, 9)
    phi = np.array([eigenfunction_s0(k, p, s) for k in range(61)])
    rk = np.exp(log_rho(np.arange(61), p))
    series = (phi * rk[:, None]).T @ phi
    exact = cov_k0(s[:, None], s[None, :], alpha)
    assert np.max(np.abs(series - exact)) < 1e-8


@pytest.mark.parametrize("alpha", [1.0, 2.3, 5.0])
def test_fourier_expansions(alpha, rules):
    p = spectral_params(alpha)
    ek, fk = fourier_e(p, 80)
    s = np.linspace(0, 4 * alpha + 4, 11)
    phi = np.array([eigenfunction_s0(k, p, s) for k in range(80)])
    assert np.allclose(ek @ phi, np.exp(-s / alpha), atol=1e-8)
    assert np.allclose(fk @ phi, alpha**-1.5 * s * np.exp(-s / alpha), atol=1e-8)
    # the coefficients themselves are inner products with e^{-t/alpha}
    rule = rules(alpha)
    for k in range(6):
        ip = rule.integrate(lambda t: np.exp(-t / alpha) * eigenfunction_s0(k, p, t))
        assert ip == pytest.approx(ek[k], abs=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.3, 5.0])
def test_oscillation_determinants(alpha, rng):
    p = spectral_params(alpha)
    for r in (2, 3):
        for _ in range(200):
            s = np.sort(rng.uniform(0, 6 * alpha + 6, size=r))
            mat = np.array([[eigenfunction_s0(i, p, sj) for sj in s] for i in range(r)])
            assert (-1) ** (r * (r - 1) // 2) * np.linalg.det(mat) >= -1e-10


# ---- scree bound ------------------------------------------------------------------------

def test_scree_table():
    assert {a: scree_m(a, 1e-10) for a in TABLE_ONE} == TABLE_ONE


def test_scree_floor():
    assert scree_m(1.0, 1 - 1e-12) == 1
    with pytest.raises(DomainError):
        scree_m(1.0, 1.0)


# ---- secular function -------------------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.5, 2.3, 100.0])
def test_g_large_delta_limit(alpha):
    c = g_components(1e12, spectral_params(alpha))
    assert c.A == pytest.approx(1.0, abs=1e-7)
    assert c.B == pytest.approx(1.0, abs=1e-7)
    assert c.D == pytest.approx(0.0, abs=1e-7)
    assert c.G == pytest.approx(alpha**3, rel=1e-6)


@pytest.mark.parametrize("alpha", [1.0, 2.3])
def test_g_components_consistent(alpha):
    p = spectral_params(alpha)
    for d in (_rho(0, p) * 1.5, _rho(2, p) * 1.3, _rho(4, p) * 0.7):
        c = g_components(d, p)
        assert c.G == pytest.approx(alpha**3 * c.A * c.B - c.D**2, rel=1e-8, abs=1e-12)


def test_g_series_against_direct_sums():
    # A, B, D summed term by term straight from their definitions
    alpha = 2.3
    p = spectral_params(alpha)
    d = 0.6 * _rho(1, p)
    k = np.arange(400)
    ek, fk = fourier_e(p, 400)
    rk = np.exp(log_rho(k, p))
    A = 1 - math.fsum(ek * ek / (rk - d))
    D = math.fsum(ek * fk / (rk - d)) * alpha ** 1.5
    B = 1 - math.fsum(fk * fk / (rk - d))
    c = g_components(d, p)
    assert c.A == pytest.approx(A, rel=1e-11)
    assert c.B == pytest.approx(B, rel=1e-11)
    assert c.D == pytest.approx(D, rel=1e-10)


def test_pole_guard():
    p = spectral_params(1.0)
    with pytest.raises(PoleProximityError):
        g_components(_rho(3, p) * (1 + 1e-10), p)
    with pytest.raises(DomainError):
        g_components(-1.0, p)


def _dense_sign_changes(p, lo, hi, n=4000):
    g = np.geomspace(lo, hi, n)[1:-1]
    vals = np.array([g_sign_function(d, p) for d in g])
    return int(np.sum(np.sign(vals[1:]) != np.sign(vals[:-1])))


def test_g_sign_change_per_bracket():
    p = spectral_params(1.0)
    for k in range(1, 7):
        lo, mid, hi = _rho(k + 1, p), _rho(k, p), _rho(k - 1, p)
        total = (_dense_sign_changes(p, lo * (1 + 1e-7), mid * (1 - 1e-7))
                 + _dense_sign_changes(p, mid * (1 + 1e-7), hi * (1 - 1e-7)))
        assert total >= 1


def test_root_count_matches_dense_scan():
    p = spectral_params(1.0)
    e = solve_eigenvalues(p, 6)  # occupies (rho_7, rho_1)
    scan = 0
    for k in range(7):
        scan += _dense_sign_changes(p, _rho(k + 1, p) * (1 + 1e-7), _rho(k, p) * (1 - 1e-7))
    scan += _dense_sign_changes(p, _rho(0, p) * (1 + 1e-7), _rho(0, p) / p.r)
    assert scan == e.m


# ---- eigenvalues of S ---------------------------------------------------------------------

def _matrix_oracle(alpha, rules, n=90):
    # S in the orthonormal basis of S0: diag(rho) - e e^T - f f^T, inner products by quadrature
    p = spectral_params(alpha)
    rule = rules(alpha)
    t = rule.nodes
    phi = np.array([eigenfunction_s0(k, p, t) for k in range(n)])
    e = (phi * rule.weights) @ np.exp(-t / alpha)
    f = (phi * rule.weights) @ (alpha**-1.5 * t * np.exp(-t / alpha))
    mat = np.diag(np.exp(log_rho(np.arange(n), p))) - np.outer(e, e) - np.outer(f, f)
    return np.sort(np.linalg.eigvalsh(mat))[::-1]


@pytest.mark.parametrize("alpha", [1.0, 2.3, 5.0])
def test_eigenvalues_match_matrix_oracle(alpha, solutions, rules):
    ev = _matrix_oracle(alpha, rules)
    d = solutions[alpha].deltas
    for k in range(min(6, len(d))):
        assert d[k] == pytest.approx(ev[k], rel=1e-8, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.3, 5.0, 100.0])
def test_eigenvalue_sum_is_trace(alpha, solutions):
    e = solutions[alpha]
    tr = trace_s(spectral_params(alpha))
    assert math.fsum(e.deltas) == pytest.approx(tr, rel=1e-6)


def test_geiger_leading_eigenvalue(solutions):
    assert solutions[100.0].deltas[0] == pytest.approx(6.721718e-6, rel=1e-3)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.3, 5.0, 100.0])
def test_interlacing_and_decay(alpha, solutions):
    p = spectral_params(alpha)
    e = solutions[alpha]
    assert e.interlacing_violations == ()
    assert all(a > b for a, b in zip(e.deltas, e.deltas[1:]))
    for k, d in enumerate(e.deltas, start=1):
        assert _rho(k + 1, p) <= d <= _rho(k - 1, p)
        lo, hi = e.brackets[k - 1]
        assert lo <= d <= hi


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.3, 5.0, 100.0])
def test_strict_interlacing_observed(alpha, solutions):
    # the stronger rho_k > delta_k > rho_{k+1}; observed, not guaranteed
    p = spectral_params(alpha)
    for k, d in enumerate(solutions[alpha].deltas, start=1):
        assert _rho(k + 1, p) < d < _rho(k, p)


def test_interlacing_twelve_terms():
    for alpha in (1.0, 2.3, 5.0):
        p = spectral_params(alpha)
        e = solve_eigenvalues(p, 12)
        for k, d in enumerate(e.deltas, start=1):
            assert _rho(k + 1, p) <= d <= _rho(k - 1, p)


def test_solution_serialises(solutions):
    d = solutions[2.3].to_dict()
    assert d["m"] == len(d["deltas"]) == len(d["brackets"]) == len(d["residuals"])


def test_solver_rejects_bad_m():
    with pytest.raises(DomainError):
        solve_eigenvalues(spectral_params(1.0), 0)


@pytest.mark.parametrize("alpha", [1.0, 2.3])
def test_eigenfunctions_of_s(alpha, solutions, rules):
    p = spectral_params(alpha)
    rule = rules(alpha)
    for delta in solutions[alpha].deltas[:3]:
        _, coef = eigenfunction_s(delta, p, 0.0)
        phi_t, _ = eigenfunction_s(delta, p, rule.nodes)
        assert rule.integrate(lambda t: phi_t * phi_t) == pytest.approx(1.0, abs=1e-8)
        for s in (0.2, 1.0, 2.7):
            lhs = rule.integrate(lambda t: cov_k(s, t, alpha) * phi_t)
            phi_s, _ = eigenfunction_s(delta, p, s)
            assert lhs == pytest.approx(delta * phi_s, abs=1e-8)


# ---- conjecture probe -------------------------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.3, 100.0])
def test_conjecture_gap_l0_negative(alpha):
    assert conjecture_gap(spectral_params(alpha), 0) < 0


@pytest.mark.parametrize("l", range(1, 7))
def test_conjecture_gap_alpha_one(l):
    assert conjecture_gap(spectral_params(1.0), l) > 0


def test_conjecture_gap_alpha_two():
    assert conjecture_gap(spectral_params(2.0), 1) > 0
