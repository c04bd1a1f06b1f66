import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toda2d import deformed as D
from toda2d.checks import random_vector
from toda2d.errors import ZetaOutOfDisc
from toda2d.frobenius import directional_derivative, flat_coordinate
from toda2d.manifold import pairing

ALPHAS = [-3, -2, -1, 0, 1, 2, "v", "u"]


def test_raise_index_and_exponents():
    assert D.raise_index(2) == -3 and D.raise_index("v") == "u" and D.raise_index("u") == "v"
    for a in ALPHAS:
        assert D.raise_index(D.raise_index(a)) == a
        # μ_α̂ + μ_{raised} = 0 and e = −μ
        assert D.mu(a) + D.mu(D.raise_index(a)) == 0
        assert D.exponent(a) == -D.mu(a)
    assert D.mu(0) == Fraction(-1, 2) and D.mu("v") == Fraction(1, 2)


def test_monodromy_data():
    md = D.monodromy_data(6)
    assert all(md.checks.values())
    assert md.R[md.indices.index("v"), md.indices.index("u")] == 2
    assert sum(1 for x in md.R.flat if x != 0) == 1


@pytest.mark.parametrize("a", ALPHAS)
def test_theta_at_zero_is_flat_coordinate(generic_point, a):
    t = flat_coordinate(D.raise_index(a), generic_point)
    assert abs(D.theta(a, 0, generic_point) - t) < 1e-13
    # Richardson limit from the punctured disc
    h = 1e-4
    lim = 2 * D.theta(a, h / 2, generic_point) - D.theta(a, h, generic_point)
    assert abs(lim - t) < 1e-8


@pytest.mark.parametrize("a", ALPHAS)
@pytest.mark.parametrize("zeta", [0.3, 0.2 + 0.25j, -0.4j])
def test_two_routes_to_y(generic_point, a, zeta):
    assert abs(D.y(a, zeta, generic_point) - D.y_from_theta(a, zeta, generic_point)) < 1e-12


@pytest.mark.parametrize("a", ["u", "v", -1, 0, 2])
def test_dy_matches_finite_differences(generic_point, a):
    X = random_vector(np.random.default_rng(4))
    zeta = 0.3 + 0.1j
    d = directional_derivative(lambda p: D.y(a, zeta, p), generic_point, X)
    assert abs(d - pairing(D.dy_differential(a, zeta, generic_point), X, generic_point)) < 1e-9
    d = directional_derivative(lambda p: D.theta(a, zeta, p), generic_point, X)
    assert abs(d - pairing(D.dtheta(a, zeta, generic_point), X, generic_point)) < 1e-9


@pytest.mark.parametrize("a", ALPHAS)
def test_horizontality_conditions(generic_point, a):
    res = D.f_horizontality_residual(a, 0.35 - 0.2j, generic_point)
    assert max(res.values()) < 1e-10
    for which in ("F", "Fx", "Fxb"):
        assert D.z_derivation_residual(a, 0.35 - 0.2j, generic_point, which) < 1e-10


@pytest.mark.parametrize("a", [-1, 1, "v"])
def test_deformed_flatness_and_zeta_equation(generic_point, a):
    X = random_vector(np.random.default_rng(8))
    assert D.deformed_flatness_residual(a, 0.3, X, generic_point).max_abs() < 1e-5
    assert D.zeta_ode_residual(a, 0.3, generic_point).max_abs() < 1e-5
    assert D.zeta_ode_residual(a, 0.3, generic_point, form="gradient").max_abs() < 1e-5


def test_zeta_outside_disc(generic_point):
    with pytest.raises(ZetaOutOfDisc):
        D.theta(0, 0.9, generic_point)
    with pytest.raises(ZetaOutOfDisc):
        D.y(0, 0, generic_point)


@pytest.mark.parametrize("zeta", [0.3, 0.3j])
def test_levelt_form(generic_point, zeta):
    assert D.levelt_residual(zeta, generic_point, A=6) < 1e-8
    T = D.theta_matrix(0.0, generic_point, 6, method="analytic").matrix
    assert np.abs(T - np.eye(T.shape[0])).max() < 1e-12


def test_analyticity(generic_point):
    neg, closure, direct = D.analyticity_residual(generic_point)
    assert neg < 1e-6 and closure < 1e-9 and direct < 1e-9


def test_y_v_monodromy(generic_point):
    assert D.y_v_monodromy_residual(0.3, generic_point) < 1e-9


@pytest.mark.parametrize("a", [-2, -1, 0, 1, "v", "u"])
def test_theta_coefficients(generic_point, a):
    for p in range(4):
        direct = D.theta_coeff(a, p, generic_point)
        assert abs(direct - D.theta_coeff(a, p, generic_point, "cauchy")) < 1e-12
        dq = D.dtheta_coeff(a, p, generic_point, "q")
        assert (D.dtheta_coeff(a, p, generic_point) - dq).max_abs() < 1e-11


def _c_minus_one_oracle(gmax):
    """C^γ_{−1} = −c_{γ+1}(γ+1)/2^{γ+1} with c_k the coefficients of 1 − e^{−s}(1 − Ein(−s))."""
    K = gmax + 2
    fact = [1]
    for k in range(1, K + 1):
        fact.append(fact[-1] * k)
    one_minus_ein = [Fraction(1)] + [Fraction(1, k * fact[k]) for k in range(1, K + 1)]
    emin = [Fraction((-1) ** j, fact[j]) for j in range(K + 1)]
    prod = [sum(emin[j] * one_minus_ein[k - j] for j in range(k + 1)) for k in range(K + 1)]
    c = [(1 if k == 0 else 0) - prod[k] for k in range(K + 1)]
    return [-c[g + 1] * (g + 1) / Fraction(2) ** (g + 1) for g in range(gmax + 1)]


def test_c_entries():
    ref = _c_minus_one_oracle(10)
    assert ref[:4] == [0, Fraction(-1, 8), Fraction(5, 96), Fraction(-13, 1152)]
    for g in range(11):
        assert D.c_entry(g, -1) == ref[g]
    assert D.c_entry(0, -1) == 0
    assert D.c_entry("u", "u") == 1 and D.c_entry(-3, -3) == 1 and D.c_entry(-2, -1) == 0
    assert D.c_entry(2, 0) == Fraction(1, 8) and D.c_entry(3, 1) == Fraction(2, 48) and D.c_entry(1, 0) == 0
    assert D.c_entry(0, "v") == 0 and D.c_entry(1, "v") == 0
    assert D.c_entry(2, "v") == Fraction(5, 6) / 8


def test_theta_tilde_examples(generic_point):
    for zeta in (0.2, 0.3j):
        assert D.theta_tilde("u", zeta, generic_point) == D.theta("u", zeta, generic_point)
        assert D.theta_tilde(-3, zeta, generic_point) == D.theta(-3, zeta, generic_point)
    for p in range(4):
        assert D.q_tilde_consistency("u", p, generic_point) == (pytest.approx(0, abs=1e-13), 0)
    for a in (-1, 0, 1, "v"):
        for p in range(4):
            r1, r2 = D.q_tilde_consistency(a, p, generic_point)
            assert r1 < 1e-12 and r2 < 1e-12


def test_orthogonality(generic_point):
    assert np.abs(D.orthogonality_residual(0.3 + 0.1j, generic_point, A=5)).max() < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.7), st.floats(-np.pi, np.pi), st.sampled_from([-1, 0, 1, 2, "v", "u"]))
def test_c_relation_property(r, phi, a):
    from toda2d.manifold import LaxPoint
    pt = LaxPoint.from_dicts({0: 0.1, -1: 0.05 + 0.02j}, {-1: 0.25, 0: 0.03})
    assert D.c_relation_residual(a, r * cmath.exp(1j * phi), pt) < 1e-12


def test_omega_symmetry_and_routes(generic_point):
    a, b = "v,0", "-1,1"
    w1 = D.omega(a, b, generic_point)
    assert abs(w1 - D.omega(b, a, generic_point)) < 1e-12
    assert abs(w1 - D.omega(a, b, generic_point, method="q")) < 1e-12
