import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toda2d.errors import InvalidPoint
from toda2d.manifold import (CotangentRep, LaxPoint, TangentRep, as_pair, as_triple, euler_field,
                             from_w_coords, pairing, to_w_coords, unit_field, validate)
from toda2d.spectral import LaurentSeries


def test_w_coordinates(sample_point):
    wc = to_w_coords(sample_point)
    assert wc.w == LaurentSeries.from_dict({1: 1, 0: 0.1, -1: 0.25})
    assert wc.v == 0 and abs(wc.u - math.log(0.25)) < 1e-15
    wc = to_w_coords(LaxPoint.from_dicts({}, {-1: 1.0}))
    assert wc.w == LaurentSeries.from_dict({1: 1, -1: 1}) and wc.v == 0 and wc.u == 0


def test_w_round_trip(generic_point):
    back = from_w_coords(to_w_coords(generic_point))
    assert np.abs(back.lam.coeffs - generic_point.lam.coeffs).max() < 1e-16
    assert np.abs(back.lamb.coeffs - generic_point.lamb.coeffs).max() < 1e-16


def test_membership_examples(sample_point):
    rep = validate(sample_point)
    assert rep.in_M1 and rep.in_M0
    rep = validate(LaxPoint.from_dicts({0: 3}, {-1: 0.5}))
    assert not rep.in_M0
    rep = validate(LaxPoint.from_dicts({0: -2}, {-1: 1.0}))
    assert not rep.in_M1
    rep = validate(LaxPoint.from_dicts({0: 0.1}, {}))
    assert not rep.in_M1


def test_symbol_shape_is_enforced():
    with pytest.raises(InvalidPoint):
        LaxPoint.from_dicts({1: 2.0}, {-1: 1})
    with pytest.raises(InvalidPoint):
        LaxPoint.from_dicts({2: 1.0}, {-1: 1})
    with pytest.raises(InvalidPoint):
        LaxPoint.from_dicts({}, {-2: 1})


def test_unit_and_euler_fields(generic_point):
    pt = generic_point
    e = as_triple(unit_field(pt), pt)
    assert e.z.max_abs() < 1e-16 and e.v == 1 and e.u == 0
    E = as_triple(euler_field(pt), pt)
    w = pt.w
    assert (E.z - (w - w.z_deriv())).max_abs() < 1e-15
    assert abs(E.v - pt.lamb.coeff(0)) < 1e-15 and abs(E.u - 2) < 1e-15
    zero = TangentRep.pair(LaurentSeries.zeros(), LaurentSeries.zeros())
    assert as_triple(zero, pt).max_abs() == 0


def _rand(rng, lo, hi):
    return LaurentSeries.from_dict({k: complex(rng.normal(), rng.normal()) * 0.5 ** abs(k)
                                    for k in range(lo, hi + 1)})


def test_pairing_example():
    one = LaurentSeries.constant(1.0)
    zero = LaurentSeries.zeros()
    assert pairing(CotangentRep.pair(one, zero), TangentRep.pair(one, zero)) == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pair_and_triple_pairings_agree(seed):
    rng = np.random.default_rng(seed)
    pt = LaxPoint.from_dicts({0: 0.1, -1: 0.05}, {-1: 0.25, 0: 0.02})
    X = TangentRep.pair(_rand(rng, -5, 0), _rand(rng, -1, 5))
    a = CotangentRep.pair(_rand(rng, 0, 6), _rand(rng, -6, 1))
    ref = pairing(a, X)
    assert abs(pairing(as_triple(a, pt), as_triple(X, pt), pt) - ref) < 1e-12
    assert abs(pairing(as_triple(a, pt), X, pt) - ref) < 1e-12
    # round trips
    assert (as_triple(as_pair(as_triple(X, pt), pt), pt) - as_triple(X, pt)).max_abs() < 1e-14
    assert (as_triple(as_pair(as_triple(a, pt), pt), pt) - as_triple(a, pt)).max_abs() < 1e-14
