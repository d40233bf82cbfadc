import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.legendre import leggauss

from levylab import constants as K
from levylab import sphere_spectral as S

# measured on l in [50, 200] at α = 1/2: l|g_l| lies in [0.495, 0.499]
PARITY_BAND = (0.45, 0.55)


@pytest.fixture(scope="module")
def tab05():
    return S.sphere_multipliers(201, 0.5)


@pytest.fixture(scope="module")
def tab02_400():
    return S.sphere_multipliers(400, 0.2, quad_nodes=6000)


def test_legendre_table_endpoints_and_values():
    x = np.array([-1.0, -0.3, 0.0, 0.7, 1.0])
    P = S.legendre_table(30, x)
    np.testing.assert_array_equal(np.abs(P[:, [0, -1]]), 1.0)
    from scipy.special import eval_legendre

    for l in (0, 1, 5, 30):
        np.testing.assert_allclose(P[l], eval_legendre(l, x), atol=1e-13)


def test_basic_structure(tab05):
    lam = tab05.lambdas
    assert lam[0] == 0.0
    assert np.all(lam[1:] < 0)
    assert np.all(np.diff(lam[1:]) < 0)


def test_lambda_one_half_closed_form(tab05):
    # the cosine-series route gives λ_1 = -π/2 at α = 1/2
    assert tab05.lambdas[1] == pytest.approx(-math.pi / 2, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.7])
@pytest.mark.parametrize("l", [1, 2, 7, 40, 150])
def test_against_cosine_series_oracle(alpha, l):
    val, err = S.sphere_multiplier(l, alpha)
    ref = S.multiplier_cosine_series(l, alpha)
    # agreement within the reported quadrature error plus a rounding allowance
    assert abs(val - ref) <= err + 1e-9 * abs(ref)


def test_quadrature_error_estimate_is_conservative():
    a = S.sphere_multipliers(120, 0.3, quad_nodes=1500)
    b = S.sphere_multipliers(120, 0.3, quad_nodes=3000)
    # the doubled-node change of the finer table is below the coarser table's estimate
    assert np.all(np.abs(b.lambdas - a.lambdas) <= a.quad_error + 1e-13)


def test_single_multiplier_tolerance():
    assert S.sphere_multiplier(0, 0.4) == (0.0, 0.0)
    v, e = S.sphere_multiplier(10, 0.4, tol=1e-10)
    assert e <= 1e-10
    with pytest.raises(RuntimeError):
        S.sphere_multiplier(10, 0.4, quad_nodes=50, tol=1e-30)
    with pytest.raises(NotImplementedError):
        S.sphere_multipliers(10, 0.4, n=3)


def test_principal_symbol(tab05):
    assert abs(tab05.lambdas[200] / (200 * 201) ** 0.5 + 1) < 0.05


def test_parity_gap_alternates_in_band(tab05):
    ls = np.arange(50, 201)
    g = np.array([S.parity_gap(tab05, l) for l in ls])
    assert np.all(np.sign(g[1:]) == -np.sign(g[:-1]))
    lg = ls * np.abs(g)
    assert PARITY_BAND[0] < lg.min() and lg.max() < PARITY_BAND[1]


def test_parity_gap_domain(tab05):
    with pytest.raises(ValueError):
        S.parity_gap(tab05, 0)
    with pytest.raises(ValueError):
        S.parity_gap(tab05, tab05.L)


def test_torus_control_has_no_parity_term():
    ctrl = S.torus_control_multipliers(400, 0.5)
    ls = np.arange(50, 399)
    lg = ls * np.abs(S.parity_gaps(ctrl.lambdas, ctrl.principal)[ls - 1])
    assert lg.max() < 0.02
    assert lg[-1] < lg[0] / 5


@pytest.mark.slow
def test_lambda_one_monte_carlo():
    est, hw = S.monte_carlo_multiplier(0.5, 0.2, 20000, seed=3)
    assert abs(est + math.pi / 2) < 3 * hw


@settings(max_examples=15, deadline=None)
@given(st.integers(8, 60), st.floats(0.5, 3.0), st.integers(0, 2**31))
def test_zonal_system_recovers_manufactured_coefficients(L, decay, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(L + 1) * np.exp(-decay * np.arange(L + 1) / L * 5)
    lam = -(np.arange(L + 1) * (np.arange(L + 1) + 1.0)) ** 0.3
    x, _ = leggauss(L + 1)
    cap = np.arccos(x) <= 0.3
    P = S.legendre_table(L, x).T
    # build data so that the system's right-hand side matches the generated coefficients
    lhs = np.where(cap[:, None], P, P * lam)
    b = lhs @ a
    sol = np.linalg.solve(lhs, b)
    np.testing.assert_allclose(sol, a, atol=1e-8 * max(1, np.abs(a).max()))
    # the solver itself with its own right-hand side reproduces its equations
    coeffs, res = S.solve_zonal_system(lam, cap, x)
    assert res < 1e-8


def test_zonal_rejects_unresolved_cap():
    with pytest.raises(ValueError):
        S.solve_capture_zonal(0.2, 0.1, 30)


@pytest.fixture(scope="module")
def zonal(tab02_400):
    return {e: S.solve_capture_zonal(0.2, e, 400, table=tab02_400) for e in (0.3, 0.2, 0.15, 0.1)}


def test_zonal_mean_matches_prediction(zonal):
    pred = 4 * math.pi * K.capture_constant(2, 0.2) * 0.1 ** (-1.6)
    assert zonal[0.1].mean == pytest.approx(pred, rel=0.2)


def test_zonal_cap_and_sign(zonal):
    for e, sol in zonal.items():
        assert sol.residual < 1e-8
        theta = np.arccos(sol.nodes)
        u = sol.evaluate(theta)
        assert np.max(np.abs(u[theta <= e])) < 1e-8
        assert u.min() >= -1e-6
        outside = np.linspace(e + 0.02, math.pi, 500)
        assert sol.evaluate(outside).min() > 0


def test_zonal_mean_is_average_over_sphere(zonal):
    sol = zonal[0.2]
    z, w = leggauss(900)
    avg = 0.5 * np.sum(w * sol.evaluate(np.arccos(z)))
    assert avg == pytest.approx(sol.mean, rel=1e-10)


def test_antipodal_deviation_negative_and_growing(zonal):
    devs = [S.antipodal_deviation(zonal[e]) for e in (0.3, 0.2, 0.15, 0.1)]
    assert all(d < 0 for d in devs)
    assert np.all(np.diff(np.abs(devs)) > 0)
    sol = zonal[0.2]
    assert S.antipodal_deviation(sol) == pytest.approx(sol.evaluate(math.pi) - sol.mean, abs=1e-9)


def test_control_without_parity_term_has_no_blow_up():
    L = 400
    l = np.arange(L + 1.0)
    lam = -((l * (l + 1)) ** 0.2)
    x, _ = leggauss(L + 1)
    devs = []
    for e in (0.3, 0.2, 0.15, 0.1):
        a, _ = S.solve_zonal_system(lam, np.arccos(x) <= e, x)
        devs.append(np.sum(a[1:] * (-1.0) ** l[1:]))
    # settles to a Green's-function value instead of growing
    assert abs(devs[-1] - devs[1]) < 0.01 * abs(devs[-1])


def test_under_resolved_flag(zonal):
    sol = zonal[0.1]
    ratio = abs(sol.coeffs[-1]) / np.abs(sol.coeffs).max()
    assert sol.under_resolved == (ratio >= 1e-4)
