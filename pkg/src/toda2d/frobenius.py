"""Frobenius structure on M0: metric, connection, flat coordinates, product.

Covectors and vectors are handled in triple form (f(z), f_v, f_u) unless a
formula is naturally written on pairs.  Functions of the point are passed
around as :class:`~toda2d.manifold.LaxPoint` values; perturbing a point along
a tangent vector goes through w-coordinates so the normalisation of λ is kept.
"""
import cmath
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import FactorizationResidualTooLarge, NotInM0
from .manifold import (CotangentRep, LaxPoint, TangentRep, WCoords, as_pair, as_triple,
                       from_w_coords, pairing, require_M0, to_w_coords)
from .spectral import LaurentSeries, grid_log, grid_size, zgrid

UV = ("v", "u")


def _div(f, g):
    return f.lift(f.grid() / g.grid())


def zwprime(pt):
    """z w′(z) as a series."""
    return pt.w.z_deriv()


def _check_wprime(pt):
    zw = zwprime(pt).grid()
    if np.abs(zw).min() <= 1e-8 * max(1.0, np.abs(zw).max()):
        raise NotInM0("w′ vanishes on the unit circle")
    return zw


def log_w_over_z(pt):
    w = pt.w
    z = zgrid(grid_size(w.n_modes))
    try:
        return grid_log(w.grid() / z)
    except ValueError as exc:
        raise NotInM0("w does not wind once around 0") from exc


def w_power(pt, k, lw=None):
    """w^k on the circle; negative k goes through z^k exp(k log(w/z))."""
    w = pt.w
    if k >= 0:
        return w.lift(w.grid() ** k)
    lw = log_w_over_z(pt) if lw is None else lw
    z = zgrid(lw.shape[-1])
    return w.lift(z ** k * np.exp(k * lw))


# ------------------------------------------------------------------ metric

def eta_sharp(alpha, pt):
    """η*: T*M → TM.  Triple in, triple out; pair in, pair out."""
    if alpha.form == "triple":
        return TangentRep.triple(zwprime(pt) * alpha.z, alpha.u, alpha.v)
    a, ab = alpha.z, alpha.zbar
    zl, zlb = pt.lam.z_deriv(), pt.lamb.z_deriv()
    s = zl * a + zlb * ab
    d = a - ab
    return TangentRep.pair(s.project(hi=0) - zl * d.project(hi=-1),
                           s.project(lo=1) - zlb * d.project(lo=0))


def eta_flat(X, pt):
    """η_* = (η*)⁻¹ on M0."""
    _check_wprime(pt)
    x = as_triple(X, pt)
    out = CotangentRep.triple(_div(x.z, zwprime(pt)), x.u, x.v)
    return out if X.form == "triple" else as_pair(out, pt)


def eta_cotangent(alpha, beta, pt):
    a, b = as_triple(alpha, pt), as_triple(beta, pt)
    return (a.z * b.z).pair_mean(zwprime(pt)) + a.v * b.u + a.u * b.v


def eta_tangent(X, Y, pt):
    _check_wprime(pt)
    x, y = as_triple(X, pt), as_triple(Y, pt)
    return _div(x.z * y.z, zwprime(pt)).mean() + x.v * y.u + x.u * y.v


# ------------------------------------------------------------------ connection

def christoffel(X, alpha, pt):
    """Γ_X(α) = (α′X/w′, 0, 0)."""
    x, a = as_triple(X, pt), as_triple(alpha, pt)
    return CotangentRep.triple(_div(a.z.z_deriv() * x.z, zwprime(pt)))


def covariant_deriv(d_alpha, X, alpha, pt):
    """∇_Xα = ∂_Xα − Γ_X(α), with ∂_Xα supplied by the caller."""
    return as_triple(d_alpha, pt) - christoffel(X, alpha, pt)


def perturb(pt, X, h):
    """The point pt + hX (X in either form)."""
    if X.form == "pair":
        return LaxPoint(pt.lam + X.z * h, pt.lamb + X.zbar * h)
    wc = to_w_coords(pt)
    return from_w_coords(WCoords(wc.w + X.z * h, wc.v + h * X.v, wc.u + h * X.u))


def scale_value(val, a):
    """a·val for numbers, arrays, series and tangent/cotangent reps."""
    if isinstance(val, TangentRep):
        return val.scale(a)
    return val * a


def lincomb(terms):
    """Σ a·val over (a, val) pairs."""
    acc = None
    for a, val in terms:
        t = scale_value(val, a)
        acc = t if acc is None else acc + t
    return acc


def directional_derivative(fn, pt, X, method="cauchy", h=None, nodes=12):
    """∂_X fn at pt.

    ``cauchy`` averages fn(pt + rω_kX)/(rω_k) over the nodes ω_k of a small
    circle (fn must be holomorphic in the coefficients, which every functional
    here is); ``central`` is the symmetric difference with step h.
    """
    scale = max(1.0, X.max_abs())
    if method == "central":
        h = h or 1e-6 / scale
        return lincomb([(0.5 / h, fn(perturb(pt, X, h))), (-0.5 / h, fn(perturb(pt, X, -h)))])
    r = h or 1e-3 / scale
    oms = [cmath.exp(2j * np.pi * k / nodes) for k in range(nodes)]
    return lincomb([(1.0 / (nodes * r * om), fn(perturb(pt, X, r * om))) for om in oms])


def cotangent_direction(fn, pt, X, **kw):
    """∂_X of a covector-valued field, returned in triple form."""
    return directional_derivative(lambda p: as_triple(fn(p), p), pt, X, **kw)


# ------------------------------------------------------------------ flat coordinates

def _norm_index(a):
    if isinstance(a, str):
        a = a.strip()
        return a if a in UV else int(a)
    return int(a)


def flat_coordinate(a, pt):
    """t^α̂ by quadrature on the unit circle."""
    a = _norm_index(a)
    if a == "v":
        return to_w_coords(pt).v
    if a == "u":
        return to_w_coords(pt).u
    if a == 0:
        return -complex(np.mean(log_w_over_z(pt)))
    return w_power(pt, -a).mean() / a


def dt_differential(a, pt):
    a = _norm_index(a)
    n = pt.n_modes
    zero = LaurentSeries.zeros(n)
    if a == "v":
        return CotangentRep.triple(zero, 1.0, 0.0)
    if a == "u":
        return CotangentRep.triple(zero, 0.0, 1.0)
    return CotangentRep.triple(w_power(pt, -a - 1) * -1.0)


def coordinate_vector(a, pt):
    a = _norm_index(a)
    n = pt.n_modes
    zero = LaurentSeries.zeros(n)
    if a == "v":
        return TangentRep.triple(zero, 1.0, 0.0)
    if a == "u":
        return TangentRep.triple(zero, 0.0, 1.0)
    return TangentRep.triple(zwprime(pt) * w_power(pt, a) * -1.0)


def window_indices(A):
    return list(range(-A, A + 1)) + ["v", "u"]


def eta_up(a, b):
    """η_{α̂β̂} in flat coordinates."""
    if a in UV or b in UV:
        return 1.0 if {a, b} == {"u", "v"} else 0.0
    return 1.0 if a + b == -1 else 0.0


@dataclass(frozen=True)
class FlatFrame:
    """Flat coordinates, differentials and coordinate fields on a window."""
    A: int
    indices: list
    coords: dict
    differentials: dict
    vectors: dict

    @classmethod
    def build(cls, pt, A=8):
        require_M0(pt)
        idx = window_indices(A)
        return cls(A, idx,
                   {a: flat_coordinate(a, pt) for a in idx},
                   {a: dt_differential(a, pt) for a in idx},
                   {a: coordinate_vector(a, pt) for a in idx})

    def gram(self, pt):
        n = len(self.indices)
        G = np.empty((n, n), dtype=complex)
        for i, a in enumerate(self.indices):
            for j, b in enumerate(self.indices):
                G[i, j] = eta_tangent(self.vectors[a], self.vectors[b], pt)
        return G

    def eta_matrix(self):
        return np.array([[eta_up(a, b) for b in self.indices] for a in self.indices])

    def duality(self, pt):
        """Matrix ⟨dt^α̂, ∂_{t^β̂}⟩."""
        return np.array([[pairing(self.differentials[a], self.vectors[b], pt)
                          for b in self.indices] for a in self.indices])


# ------------------------------------------------------------------ Riemann–Hilbert

@dataclass(frozen=True)
class RHFactorization:
    """Splitting log(z(w)/w) = log(f_∞/w) − log f₀ along Γ.

    ``f0`` holds t^α for 0 ≤ α ≤ A and ``finf`` holds t^α for −A ≤ α ≤ −1, both
    read off the split boundary values.  ``residual`` is max |z f₀ − f_∞| on
    Γ, ``coefficient_residual`` compares the split moments with the circle
    quadrature of :func:`flat_coordinate` and ``series_residual`` compares the
    truncated w-series with the Cauchy integrals on circles where they converge.
    """
    f0: dict
    finf: dict
    residual: float
    coefficient_residual: float
    series_residual: float
    diagnostics: dict = field(default_factory=dict)


def _cauchy_eval(w, g, dw, pts):
    """(1/2πi)∮_Γ g(s)/(s−p) ds at points p off the curve."""
    h = 2 * np.pi / w.size
    return ((g * dw)[None, :] / (w[None, :] - pts[:, None])).sum(axis=1) * h / (2j * np.pi)


def rh_factorize(pt, A=16, tol=1e-6, raise_on_failure=True):
    require_M0(pt)
    n = pt.n_modes
    L = 2 * grid_size(n)
    w_s = pt.w
    z = zgrid(L)
    w = w_s.grid(L)
    zw = w_s.z_deriv().grid(L)
    dw = 1j * zw                     # dw/dθ
    lw = grid_log(w / z)
    g = -lw                          # log(z/w)
    dg = 1.0 / zw - 1.0 / w          # d/dw log(z/w)
    outside = _kernels.cauchy_boundary(w, g, dg.astype(complex), dw)
    G_inf = -outside
    G_0 = -(g + outside)
    f0 = np.exp(G_0)
    finf = w * np.exp(G_inf)
    residual = float(np.abs(z * f0 - finf).max())

    h = 2 * np.pi / L
    t0, tinf = {}, {}
    for a in range(0, A + 1):
        t0[a] = -complex((G_0 * w ** (-a - 1) * dw).sum() * h / (2j * np.pi))
    for a in range(-A, 0):
        tinf[a] = complex((G_inf * w ** (-a - 1) * dw).sum() * h / (2j * np.pi))
    ref = {a: flat_coordinate(a, pt) for a in range(-A, A + 1)}
    coef_res = max(abs(v - ref[a]) for a, v in {**t0, **tinf}.items())

    # the truncated series only converge away from Γ; test them there
    rad = np.abs(w)
    inner = 0.5 * rad.min() * np.exp(2j * np.pi * np.arange(32) / 32)
    outer = 3.0 * rad.max() * np.exp(2j * np.pi * np.arange(32) / 32)
    c_in = _cauchy_eval(w, g, dw, inner)    # = −G_0 inside
    c_out = _cauchy_eval(w, g, dw, outer)   # = −G_∞ outside
    s_in = sum(-ref[a] * inner ** a for a in range(0, A + 1))
    s_out = sum(ref[a] * outer ** a for a in range(-A, 0))
    series_res = float(max(np.abs(-c_in - s_in).max(), np.abs(-c_out - s_out).max()))

    scale = max(1.0, float(np.abs(w).max()))
    out = RHFactorization(t0, tinf, residual, float(coef_res), series_res,
                          {"window": A, "scale": scale, "grid": L,
                           "min_abs_w": float(rad.min()), "max_abs_w": float(rad.max())})
    if raise_on_failure and max(residual, coef_res) > tol * scale:
        raise FactorizationResidualTooLarge(
            f"residual {residual:.2e}, coefficient residual {coef_res:.2e} (window {A})")
    return out


# ------------------------------------------------------------------ product

def cotangent_product(alpha, beta, pt):
    """α·β on pair-form covectors; returns a pair-form covector."""
    a, b = as_pair(alpha, pt), as_pair(beta, pt)
    al, alb, be, beb = a.z, a.zbar, b.z, b.zbar
    zl, zlb = pt.lam.z_deriv(), pt.lamb.z_deriv()
    Sb = zl * be + zlb * beb
    Sa = zl * al + zlb * alb
    first = (al * Sb.project(lo=1) + Sa.project(lo=1) * be
             - (zl * al * be + zlb * (al * beb + alb * be)).project(lo=0))
    second = (-alb * Sb.project(hi=0) - Sa.project(hi=0) * beb
              + (zlb * alb * beb + zl * (al * beb + alb * be)).project(hi=1))
    return CotangentRep.pair(first, second)


def mult_operator(X, alpha, pt):
    """C_X(α) in triple form.

    Agrees with η_*(X)·α.  Note the minus sign on (X_{≤0}α)_{≥0} and that the
    u-component takes the z¹ coefficient.
    """
    x, a = as_triple(X, pt), as_triple(alpha, pt)
    zw = zwprime(pt)
    eu = pt.ubar_m1
    n = pt.n_modes
    zmon = LaurentSeries.monomial(1, 1.0, n)
    zinv = LaurentSeries.monomial(-1, 1.0, n)
    al = a.z
    bracket = ((zw * al).project(lo=1) - zw.project(lo=1) * al + zmon * al
               + zinv * (al + a.v) * eu + a.u)
    zc = (_div(x.z * bracket, zw)
          + (x.z.project(lo=1) * al).project(hi=-1)
          - (x.z.project(hi=0) * al).project(lo=0)
          + zinv * (al + a.v) * (eu * x.u)
          + al * x.v)
    vc = (x.z * al).mean() + x.u * a.u + x.v * a.v
    uc = eu * ((x.z + zw * x.u) * (al + a.v)).coeff(1) - eu * x.u * a.v + x.v * a.u
    return CotangentRep.triple(zc, vc, uc)


def euler_vector(pt):
    """E = (w − zw′, v, 2) in triple form."""
    wc = to_w_coords(pt)
    return TangentRep.triple(wc.w - zwprime(pt), wc.v, 2.0)


def u_operator(alpha, pt):
    """𝒰 = C_E."""
    return mult_operator(euler_vector(pt), alpha, pt)


def v_operator(alpha, pt):
    """𝒱 on covectors (closed form)."""
    _check_wprime(pt)
    a = as_triple(alpha, pt)
    ratio = _div(pt.w, zwprime(pt))
    return CotangentRep.triple(a.z * -0.5 - a.z.z_deriv() * ratio, -0.5 * a.v, 0.5 * a.u)


def v_operator_tangent(X, pt):
    """𝒱 on vectors (closed form)."""
    _check_wprime(pt)
    x = as_triple(X, pt)
    ratio = _div(pt.w, zwprime(pt))
    return TangentRep.triple(x.z * -0.5 + (x.z * ratio).z_deriv(), -0.5 * x.v, 0.5 * x.u)


def nabla_euler(X, pt, **kw):
    """∇_X E = ∂_X E + Γ*_X(E), with ∂_X E by numerical differentiation."""
    x = as_triple(X, pt)
    dE = directional_derivative(euler_vector, pt, x, **kw)
    E = euler_vector(pt)
    gstar = _div(x.z * E.z, zwprime(pt)).z_deriv() * -1.0
    return TangentRep.triple(dE.z + gstar, dE.v, dE.u)


def v_operator_from_euler(X, pt, **kw):
    """𝒱(X) = X/2 − ∇_X E."""
    x = as_triple(X, pt)
    return x.scale(0.5) - nabla_euler(x, pt, **kw)


def gradient(alpha, pt):
    """∇f = η*(df) for a covector df."""
    return eta_sharp(as_triple(alpha, pt), pt)

