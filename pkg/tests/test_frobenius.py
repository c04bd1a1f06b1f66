import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toda2d import frobenius as F
from toda2d.checks import random_covector, random_vector
from toda2d.deformed import mu
from toda2d.errors import NotInM0
from toda2d.manifold import CotangentRep, LaxPoint, TangentRep, as_triple
from toda2d.spectral import LaurentSeries


def _w_poly(pt):
    """w(z) evaluated straight from its nonzero coefficients."""
    c = pt.w.coeffs
    n = pt.n_modes
    ks = [k for k in range(-n, n + 1) if abs(c[k + n]) > 0]
    return lambda z: sum(c[k + n] * z ** k for k in ks)


def _shifted_mean(f, r, n=4096):
    z = r * np.exp(2j * np.pi * np.arange(n) / n)
    return complex(np.mean(f(z)))


def test_frozen_flat_coordinates(sample_point):
    pt = sample_point
    t = {a: F.flat_coordinate(a, pt) for a in (-3, -2, -1, 0, 1, "v", "u")}
    assert abs(t[-1] + 0.1) < 1e-15
    assert abs(t[-2] + 0.255) < 1e-15
    assert abs(t[-3] + 0.151 / 3) < 1e-15
    assert abs(t[0]) < 1e-15 and abs(t[1]) < 1e-15
    assert t["v"] == 0 and abs(t["u"] - math.log(0.25)) < 1e-15


@pytest.mark.parametrize("a", [-3, -1, 0, 1, 2, 4])
def test_flat_coordinates_on_shifted_contour(generic_point, a):
    # the constant Laurent coefficient is the same on every circle of the annulus
    w = _w_poly(generic_point)
    r = 1.04
    if a == 0:
        ref = -_shifted_mean(lambda z: np.log(w(z) / z), r)
    else:
        ref = _shifted_mean(lambda z: w(z) ** -a, r) / a
    assert abs(F.flat_coordinate(a, generic_point) - ref) < 1e-13


def test_t1_geometric_series():
    # w = (1+d)z + b + cz⁻¹ and 1/w = Σₙ (−(b + c/z))ⁿ / ((1+d)z)ⁿ⁺¹ has no z⁰ term
    pt = LaxPoint.from_dicts({0: 0.1}, {-1: 0.25, 1: 0.1})
    assert abs(F.flat_coordinate(1, pt)) < 1e-15
    # w = z + b + cz⁻¹ + ez² = z(1 + g) with g = b/z + ez + c/z², so (1/w)₀ is the z¹ coefficient of Σ (−g)ⁿ
    b, e, c = 0.1, 0.05, 0.25
    pt = LaxPoint.from_dicts({0: b}, {-1: c, 2: e})
    ref = 0.0
    for n in range(80):
        for l in range(n + 1):
            # −i + j − 2l = 1 with i + j + l = n  ⇒  j = (n + 1 + l)/2
            if (n + 1 + l) % 2:
                continue
            jj = (n + 1 + l) // 2
            ii = n - jj - l
            if ii < 0:
                continue
            ref += ((-1) ** n * math.factorial(n) / (math.factorial(ii) * math.factorial(jj) * math.factorial(l))
                    * b ** ii * e ** jj * c ** l)
    assert abs(ref) > 1e-3
    assert abs(F.flat_coordinate(1, pt) - ref) < 1e-14


def test_metric_on_basis(generic_point):
    pt = generic_point
    zero = LaurentSeries.zeros(pt.n_modes)
    X = F.eta_sharp(CotangentRep.triple(zero, 1.0, 0.0), pt)
    assert X.z.max_abs() == 0 and X.v == 0 and X.u == 1
    for a in (-2, -1, 0, 1, "v", "u"):
        for b in (-2, -1, 0, 1, "v", "u"):
            val = F.eta_cotangent(F.dt_differential(a, pt), F.dt_differential(b, pt), pt)
            assert abs(val - F.eta_up(a, b)) < 1e-12


def test_gram_and_duality(generic_point):
    fr = F.FlatFrame.build(generic_point, 6)
    assert np.abs(fr.gram(generic_point) - fr.eta_matrix()).max() < 1e-10
    assert np.abs(fr.duality(generic_point) - np.eye(len(fr.indices))).max() < 1e-10


def test_flat_differentials(generic_point):
    pt = generic_point
    X = random_vector(np.random.default_rng(5))
    for a in (-2, 0, 1, "v"):
        d = F.cotangent_direction(lambda p, a=a: F.dt_differential(a, p), pt, X)
        assert F.covariant_deriv(d, X, F.dt_differential(a, pt), pt).max_abs() < 1e-6


def test_rh_factorization(generic_point):
    rh = F.rh_factorize(generic_point, 16)
    assert rh.residual < 1e-8 and rh.coefficient_residual < 1e-10 and rh.series_residual < 1e-8
    assert set(rh.f0) == set(range(17)) and set(rh.finf) == set(range(-16, 0))


def test_not_in_m0():
    pt = LaxPoint.from_dicts({}, {-1: 1.0})
    with pytest.raises(NotInM0):
        F.rh_factorize(pt)
    with pytest.raises(NotInM0):
        F.FlatFrame.build(pt)


def test_unit_and_euler_operators(generic_point):
    pt = generic_point
    a = random_covector(np.random.default_rng(2))
    ident = F.mult_operator(F.coordinate_vector("v", pt), a, pt)
    assert (ident - as_triple(a, pt)).max_abs() < 1e-13
    d0 = F.dt_differential(0, pt)
    assert (F.v_operator(d0, pt) - d0.scale(0.5)).max_abs() < 1e-13
    for al in (-2, 1, "v", "u"):
        d = F.dt_differential(al, pt)
        assert (F.v_operator(d, pt) - d.scale(-float(mu(al)))).max_abs() < 1e-12
    X = random_vector(np.random.default_rng(9))
    assert (F.v_operator_tangent(X, pt) - F.v_operator_from_euler(X, pt)).max_abs() < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_product_axioms(seed):
    pt = LaxPoint.from_dicts({0: 0.1, -1: 0.05 + 0.02j}, {-1: 0.25, 1: 0.02})
    rng = np.random.default_rng(seed)
    a, b, c = random_covector(rng), random_covector(rng), random_covector(rng)
    X = random_vector(rng)

    def prod(x, y):
        return as_triple(F.cotangent_product(x, y, pt), pt)

    assert (prod(a, b) - prod(b, a)).max_abs() < 1e-9
    assert (prod(F.cotangent_product(a, b, pt), c) - prod(a, F.cotangent_product(b, c, pt))).max_abs() < 1e-9
    assert abs(F.eta_cotangent(F.cotangent_product(a, b, pt), c, pt)
               - F.eta_cotangent(a, F.cotangent_product(b, c, pt), pt)) < 1e-9
    assert (F.mult_operator(X, a, pt) - prod(F.eta_flat(X, pt), a)).max_abs() < 1e-9
    assert abs(F.eta_cotangent(a, F.u_operator(b, pt), pt) - F.eta_cotangent(F.u_operator(a, pt), b, pt)) < 1e-9
    assert abs(F.eta_cotangent(a, F.v_operator(b, pt), pt) + F.eta_cotangent(F.v_operator(a, pt), b, pt)) < 1e-9
