"""Truncated Laurent series on the unit circle and loop fields on S¹ × S¹.

A :class:`LaurentSeries` stores c_k for k in [−N, N].  A :class:`LoopField`
adds a periodic variable x ∈ [0, 2π) resolved by M Fourier modes
m ∈ [−M/2, M/2 − 1]; its coefficient array has shape (M, 2N + 1).

Nonlinear work (products, logarithms, exponentials, rational functions of the
symbols) is done by sampling on a padded grid, applying the function
pointwise and transforming back.  The z-grid has 2(2N+1) points and the
x-grid 2M points, which makes products of in-band fields exact.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number

import numpy as np

from . import _kernels
from .errors import NearZeroOnCircle, OutOfDomain

DEFAULT_N = 64
DEFAULT_M = 64
TAIL_TOL = 1e-10
NEAR_ZERO = 1e-8


def grid_size(n):
    return 2 * (2 * n + 1)


def zgrid(L):
    return np.exp(2j * np.pi * np.arange(L) / L)


def xgrid(M):
    return 2 * np.pi * np.arange(M) / M


def _spread(c, L, lo, axis):
    c = np.moveaxis(c, axis, -1)
    buf = np.zeros(c.shape[:-1] + (L,), dtype=complex)
    buf[..., np.arange(lo, lo + c.shape[-1]) % L] = c
    return np.moveaxis(buf, -1, axis)


def _gather(buf, lo, n, axis):
    buf = np.moveaxis(buf, axis, -1)
    out = buf[..., np.arange(lo, lo + n) % buf.shape[-1]]
    return np.moveaxis(out, -1, axis)


def modes_to_grid(c, L, lo, axis=-1):
    """Values Σ_k c_k e^{2πijk/L} for the modes lo, lo+1, ... stored on ``axis``."""
    return np.fft.ifft(_spread(c, L, lo, axis), axis=axis) * L


def grid_to_modes(v, lo, n, axis=-1):
    L = v.shape[axis]
    return _gather(np.fft.fft(v, axis=axis) / L, lo, n, axis)


def _is_scalar(a):
    return isinstance(a, Number) or (isinstance(a, np.ndarray) and a.ndim == 0)


def ipow(a, n):
    """Integer power by repeated squaring (exact pattern for small n)."""
    if n < 0:
        return 1.0 / ipow(a, -n)
    out = np.ones_like(a)
    base = a
    while n:
        if n & 1:
            out = out * base
        n >>= 1
        if n:
            base = base * base
    return out


class _Field:
    """Shared arithmetic; subclasses define the grid layout."""

    __slots__ = ("_c",)

    def _freeze(self, c):
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficients")
        c.setflags(write=False)
        self._c = c

    @property
    def coeffs(self):
        return self._c

    @property
    def n_modes(self):
        return (self._c.shape[-1] - 1) // 2

    def _like(self, c):
        raise NotImplementedError

    def _const_slot(self):
        return (..., self.n_modes)

    def lift(self, values):
        """Field of the same shape from samples on this field's grid."""
        raise NotImplementedError

    def grid(self):
        raise NotImplementedError

    # -- linear structure

    def __add__(self, other):
        if _is_scalar(other):
            c = self._c.copy()
            c[self._const_slot()] += other
            return self._like(c)
        self._check(other)
        return self._like(self._c + other._c)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self._like(-self._c)

    def __mul__(self, other):
        if _is_scalar(other):
            return self._like(self._c * other)
        self._check(other)
        return self.lift(self.grid() * other.grid())

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, other):
        if _is_scalar(other):
            return self._like(self._c / other)
        return NotImplemented

    def _check(self, other):
        if type(other) is not type(self) or other._c.shape != self._c.shape:
            raise ValueError("incompatible fields")

    # -- z structure

    def coeff(self, k):
        n = self.n_modes
        if self._c.ndim == 1:
            return complex(self._c[k + n]) if abs(k) <= n else 0j
        if abs(k) > n:
            return np.zeros(self._c.shape[0], dtype=complex)
        return self._c[:, k + n].copy()

    def mean(self):
        return self.coeff(0)

    def project(self, lo=None, hi=None):
        """Keep modes lo ≤ k ≤ hi (None means unbounded)."""
        n = self.n_modes
        k = np.arange(-n, n + 1)
        mask = np.ones(2 * n + 1, dtype=bool)
        if lo is not None:
            mask &= k >= lo
        if hi is not None:
            mask &= k <= hi
        return self._like(np.where(mask, self._c, 0))

    def z_deriv(self):
        """z ∂_z: multiplies c_k by k."""
        n = self.n_modes
        return self._like(self._c * np.arange(-n, n + 1))

    def shift(self, s):
        """z^s · f; modes pushed out of band are dropped."""
        n = self.n_modes
        c = np.zeros_like(self._c)
        if s >= 0:
            c[..., s:] = self._c[..., : 2 * n + 1 - s]
        else:
            c[..., :s] = self._c[..., -s:]
        return self._like(c)

    def tail_ratio(self):
        n = self.n_modes
        a = np.abs(self._c)
        top = a.max()
        if top == 0:
            return 0.0
        k = np.abs(np.arange(-n, n + 1))
        return float(a[..., k >= n - 2].max() / top)

    def max_abs(self):
        return float(np.abs(self._c).max()) if self._c.size else 0.0

    def __repr__(self):
        return f"{type(self).__name__}(N={self.n_modes}, shape={self._c.shape})"


class LaurentSeries(_Field):
    """Σ_{|k|≤N} c_k z^k on the unit circle."""

    __slots__ = ()

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0 or c.size < 9:
            raise ValueError("need an odd number (≥ 9) of coefficients")
        self._freeze(c)

    @classmethod
    def zeros(cls, n=DEFAULT_N):
        return cls(np.zeros(2 * n + 1))

    @classmethod
    def constant(cls, a, n=DEFAULT_N):
        return cls.from_dict({0: a}, n)

    @classmethod
    def monomial(cls, k, a=1.0, n=DEFAULT_N):
        return cls.from_dict({k: a}, n)

    @classmethod
    def from_dict(cls, d, n=DEFAULT_N):
        c = np.zeros(2 * n + 1, dtype=complex)
        for k, a in d.items():
            if abs(k) > n:
                raise ValueError(f"mode {k} outside [-{n}, {n}]")
            c[k + n] += a
        return cls(c)

    @classmethod
    def from_grid(cls, values, n=DEFAULT_N):
        return cls(grid_to_modes(np.asarray(values, dtype=complex), -n, 2 * n + 1))

    @classmethod
    def from_function(cls, fn, n=DEFAULT_N, L=None):
        L = L or grid_size(n)
        return cls.from_grid(fn(zgrid(L)), n)

    def _like(self, c):
        return LaurentSeries(c)

    def lift(self, values):
        return LaurentSeries.from_grid(values, self.n_modes)

    def grid(self, L=None):
        return modes_to_grid(self._c, L or grid_size(self.n_modes), -self.n_modes)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        n = self.n_modes
        # Horner in z for the positive part, in 1/z for the negative part
        pos = np.zeros_like(z)
        for k in range(n, -1, -1):
            pos = pos * z + self._c[k + n]
        neg = np.zeros_like(z)
        for k in range(-n, 0):
            neg = (neg + self._c[k + n]) / z
        return pos + neg

    def pair_mean(self, other):
        """(f·g)₀ = Σ_k f_k g_{−k}, without any grid."""
        return complex(np.dot(self._c, other._c[::-1]))

    def __eq__(self, other):
        return isinstance(other, LaurentSeries) and np.array_equal(self._c, other._c)

    __hash__ = None


class LoopField(_Field):
    """Σ_{k,m} c_{k,m} z^k e^{imx}; coefficient array shape (M, 2N+1)."""

    __slots__ = ()

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[1] % 2 == 0 or c.shape[1] < 9 or c.shape[0] % 2:
            raise ValueError("need shape (even M, odd 2N+1 ≥ 9)")
        self._freeze(c)

    @property
    def x_modes(self):
        return self._c.shape[0]

    @classmethod
    def zeros(cls, n=DEFAULT_N, m=DEFAULT_M):
        return cls(np.zeros((m, 2 * n + 1)))

    @classmethod
    def from_series(cls, f, m=DEFAULT_M):
        c = np.zeros((m, f.coeffs.size), dtype=complex)
        c[m // 2] = f.coeffs
        return cls(c)

    @classmethod
    def from_modes(cls, entries, n=DEFAULT_N, m=DEFAULT_M):
        """``entries`` maps (x-mode, z-mode) to a coefficient."""
        c = np.zeros((m, 2 * n + 1), dtype=complex)
        for (xm, k), a in entries.items():
            if abs(k) > n or not -m // 2 <= xm < m // 2:
                raise ValueError(f"mode ({xm}, {k}) out of range")
            c[xm + m // 2, k + n] += a
        return cls(c)

    @classmethod
    def from_grid(cls, values, n=DEFAULT_N, m=DEFAULT_M):
        v = grid_to_modes(np.asarray(values, dtype=complex), -n, 2 * n + 1, axis=1)
        return cls(grid_to_modes(v, -(m // 2), m, axis=0))

    def _like(self, c):
        return LoopField(c)

    def _const_slot(self):
        return (self.x_modes // 2, self.n_modes)

    def lift(self, values):
        return LoopField.from_grid(values, self.n_modes, self.x_modes)

    def grid(self, Lz=None, Lx=None):
        Lz = Lz or grid_size(self.n_modes)
        Lx = Lx or 2 * self.x_modes
        v = modes_to_grid(self._c, Lx, -(self.x_modes // 2), axis=0)
        return modes_to_grid(v, Lz, -self.n_modes, axis=1)

    def x_deriv(self):
        m = np.arange(-(self.x_modes // 2), self.x_modes // 2)
        return LoopField(self._c * (1j * m)[:, None])

    def x_shift(self, s):
        """F(z, x + s) by phase rotation of the Fourier modes."""
        m = np.arange(-(self.x_modes // 2), self.x_modes // 2)
        return LoopField(self._c * np.exp(1j * m * s)[:, None])

    def at_x(self, x):
        """The Laurent series z ↦ F(z, x)."""
        m = np.arange(-(self.x_modes // 2), self.x_modes // 2)
        return LaurentSeries(np.exp(1j * m * x) @ self._c)

    def x_values(self):
        """Coefficients c_k(x) sampled on the M-point x-grid, shape (M, 2N+1)."""
        return modes_to_grid(self._c, self.x_modes, -(self.x_modes // 2), axis=0)

    def x_tail_ratio(self):
        a = np.abs(self._c).max(axis=1)
        if a.max() == 0:
            return 0.0
        return float(a[[0, 1, -1]].max() / a.max())

    def __eq__(self, other):
        return isinstance(other, LoopField) and np.array_equal(self._c, other._c)

    __hash__ = None


def x_function_values(xcoeffs):
    """Samples on the M-point x-grid of Σ_m a_m e^{imx}."""
    xcoeffs = np.asarray(xcoeffs, dtype=complex)
    M = xcoeffs.shape[0]
    return modes_to_grid(xcoeffs, M, -(M // 2), axis=0)


def x_function_coeffs(values):
    values = np.asarray(values, dtype=complex)
    M = values.shape[0]
    return grid_to_modes(values, -(M // 2), M, axis=0)


def x_integral(xcoeffs):
    """∫_0^{2π} a(x) dx from Fourier coefficients."""
    xcoeffs = np.asarray(xcoeffs)
    return 2 * np.pi * complex(xcoeffs[xcoeffs.shape[0] // 2])


# ------------------------------------------------------------------ operations

def project(f, lo=None, hi=None):
    return f.project(lo, hi)


def mul(f, g):
    return f * g


def z_deriv(f):
    return f.z_deriv()


def x_deriv(F):
    return F.x_deriv()


def poisson_bracket(f, g):
    """{f, g} = z f_z g_x − z g_z f_x."""
    return f.z_deriv() * g.x_deriv() - g.z_deriv() * f.x_deriv()


@dataclass(frozen=True)
class Winding:
    value: int
    raw: float = 0.0

    def __int__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, Winding):
            return self.value == other.value
        return self.value == other

    def __hash__(self):
        return hash(self.value)


def _check_modulus(vals):
    mod = np.abs(vals)
    top = mod.max()
    if top == 0 or mod.min() < NEAR_ZERO * top:
        raise NearZeroOnCircle(
            f"min |f| = {mod.min():.3e} below {NEAR_ZERO:g} · max |f| = {top:.3e}")


def winding_of_samples(vals):
    """Winding about 0 of the closed curve through ``vals`` (1-D)."""
    _check_modulus(vals)
    total, big = _kernels.phase_increment(np.ascontiguousarray(vals, dtype=complex))
    raw = total / (2 * np.pi)
    return raw, big


def winding_number(f, L=None):
    """Winding number of z ↦ f(z) around 0 along the unit circle."""
    if isinstance(f, LoopField):
        return [winding_number(f.at_x(x), L) for x in xgrid(f.x_modes)]
    L = L or grid_size(f.n_modes)
    for _ in range(8):
        raw, big = winding_of_samples(f.grid(L))
        if big < np.pi / 2:
            break
        L *= 2
    value = int(round(raw))
    if abs(raw - value) > 1e-6:
        raise NearZeroOnCircle(f"phase increment {raw:.6f}·2π is not an integer")
    return Winding(value, raw)


def grid_log(vals):
    """Logarithm of samples of a winding-0 function along the last axis.

    The phase is unwrapped along the circle and the branch is fixed so that
    the imaginary part of the mean lies in (−π, π].
    """
    vals = np.asarray(vals, dtype=complex)
    _check_modulus(vals)
    ph = np.unwrap(np.angle(vals), axis=-1)
    closing = np.angle(vals[..., :1] / vals[..., -1:])
    drift = ph[..., -1:] + closing - ph[..., :1]
    if np.abs(drift).max() > 1e-6:
        raise ValueError("grid_log called on a function with nonzero winding")
    g = np.log(np.abs(vals)) + 1j * ph
    m = g.imag.mean(axis=-1, keepdims=True)
    k = np.ceil((m - np.pi) / (2 * np.pi))
    return g - 2j * np.pi * k


def circle_log(f):
    """Return (g, w) with exp(g)·z^w = f and Im(g)₀ ∈ (−π, π]."""
    if isinstance(f, LoopField):
        ws = {int(w) for w in winding_number(f)}
        if len(ws) != 1:
            raise NearZeroOnCircle(f"winding varies with x: {sorted(ws)}")
        w = Winding(ws.pop())
        vals = f.grid()
        z = zgrid(vals.shape[1])
        return f.lift(grid_log(vals * z[None, :] ** (-w.value))), w
    w = winding_number(f)
    vals = f.grid()
    z = zgrid(vals.size)
    return f.lift(grid_log(vals * z ** (-w.value))), w


def circle_exp(f):
    return f.lift(np.exp(f.grid()))


EIN_MAX = 20.0


def ein(x):
    """Ein(x) = −Σ_{n≥1} (−x)^n/(n!·n), the entire exponential integral."""
    arr = np.asarray(x, dtype=complex)
    if arr.size and np.abs(arr).max() > EIN_MAX:
        raise OutOfDomain(f"|x| = {np.abs(arr).max():.3g} exceeds {EIN_MAX}")
    out = _kernels.ein_series(arr)
    return complex(out) if np.ndim(x) == 0 else out


def phi1(x):
    """(e^x − 1)/x, equal to 1 at 0."""
    x = np.asarray(x, dtype=complex)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 1.0, np.expm1(safe) / safe)


def harmonic(p):
    """c_p = 1 + 1/2 + ... + 1/p, with c_0 = c_{−1} = 0."""
    if p < -1:
        raise OutOfDomain(f"harmonic number undefined for p = {p}")
    return sum((Fraction(1, k) for k in range(1, p + 1)), Fraction(0))


def double_factorial_even(p):
    """(2p)!! = 2^p p!."""
    return float(2 ** p * math.factorial(p))
