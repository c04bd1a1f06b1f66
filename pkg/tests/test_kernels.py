import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toda2d import _kernels as K

pytestmark = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")

seeds = st.integers(0, 2**32 - 1)


def _c(rng, n, s=1.0):
    return s * (rng.normal(size=n) + 1j * rng.normal(size=n))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_phase_increment_twins(seed):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    vals = np.exp(1j * t * rng.integers(-3, 4)) * (2 + 0.5 * np.cos(3 * t)) + _c(rng, 200, 0.01)
    a = K.NUMPY_KERNELS["phase_increment"](vals)
    b = K.NUMBA_KERNELS["phase_increment"](vals)
    assert np.allclose(a, b, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_segment_scan_twins(seed):
    rng = np.random.default_rng(seed)
    xs, ys = rng.normal(size=40), rng.normal(size=40)
    a = K.NUMPY_KERNELS["segment_scan"](xs, ys)
    b = K.NUMBA_KERNELS["segment_scan"](xs, ys)
    assert a[0] == b[0] and abs(a[1] - b[1]) < 1e-14


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_cauchy_boundary_twins(seed):
    rng = np.random.default_rng(seed)
    t = 2 * np.pi * np.arange(64) / 64
    w = (1 + 0.1 * rng.random()) * np.exp(1j * t) + 0.1
    g = np.exp(1j * t) * 0.3 + _c(rng, 1, 0.1)[0]
    dg = 0.3 * np.ones(64, dtype=complex) / (1 + 0.1)
    dw = 1j * (w - 0.1)
    a = K.NUMPY_KERNELS["cauchy_boundary"](w, g, dg, dw)
    b = K.NUMBA_KERNELS["cauchy_boundary"](w, g, dg, dw)
    assert np.allclose(a, b, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(0.1, 15))
def test_ein_twins(seed, scale):
    x = _c(np.random.default_rng(seed), 50, scale / 2)
    a, b = K.NUMPY_KERNELS["ein_series"](x), K.NUMBA_KERNELS["ein_series"](x)
    # rounding in the power series scales with Σ|terms| ≤ e^{|x|}
    assert np.all(np.abs(a - b) <= 1e-15 * np.exp(np.abs(x)))


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(0, 6), st.floats(-0.7, 0.7))
def test_stride2_twins(seed, m, zeta):
    s = _c(np.random.default_rng(seed), 30)
    a = K.NUMPY_KERNELS["stride2_series"](s, zeta, m)
    b = K.NUMBA_KERNELS["stride2_series"](s, zeta, m)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-15)


def test_stride2_closed_form():
    # Σ ζ^{2n} s^{2n+1}/(2n+1)! = sinh(ζs)/ζ
    s = np.linspace(-2, 2, 9) + 0.3j
    for name in ("numpy", "numba"):
        kern = (K.NUMPY_KERNELS if name == "numpy" else K.NUMBA_KERNELS)["stride2_series"]
        assert np.allclose(kern(s, 0.4, 1), np.sinh(0.4 * s) / 0.4, rtol=1e-14)
        assert np.allclose(kern(s, 0.4, 0), np.cosh(0.4 * s), rtol=1e-14)


def test_backend_flag():
    assert K.backend() in ("numba", "numpy")
