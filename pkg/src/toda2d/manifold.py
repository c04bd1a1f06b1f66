"""Points (λ, λ̄) of the manifolds M ⊃ M1 ⊃ M0, w-coordinates and the two
representations (pair / triple) of tangent and cotangent vectors."""
import cmath
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateLeadingCoefficient, InvalidPoint, NearZeroOnCircle, NotInM0, NotInM1
from .spectral import (DEFAULT_M, DEFAULT_N, LaurentSeries, LoopField, grid_size, winding_number,
                       xgrid, zgrid)

COEFF_TOL = 1e-13
SELF_INTERSECTION_REL = 1e-6


def _check_symbols(lam, lamb):
    n = lam.n_modes
    c = np.atleast_2d(lam.coeffs)
    cb = np.atleast_2d(lamb.coeffs)
    k = np.arange(-n, n + 1)
    ones = np.zeros(c.shape[0])
    if c.shape[0] > 1:
        ones[c.shape[0] // 2] = 1.0
    else:
        ones[0] = 1.0
    if np.abs(c[:, k == 1][:, 0] - ones).max() > COEFF_TOL:
        raise InvalidPoint("λ must be z + O(1): coefficient of z must be 1")
    if np.abs(c[:, k >= 2]).max(initial=0) > COEFF_TOL:
        raise InvalidPoint("λ must have no modes z^k with k ≥ 2")
    if np.abs(cb[:, k < -1]).max(initial=0) > COEFF_TOL:
        raise InvalidPoint("λ̄ must have no modes z^k with k < −1")


@dataclass(frozen=True)
class LaxPoint:
    """λ = z + Σ_{k≤0} u_k z^k, λ̄ = Σ_{k≥−1} ū_k z^k."""
    lam: LaurentSeries
    lamb: LaurentSeries

    def __post_init__(self):
        if self.lam.n_modes != self.lamb.n_modes:
            raise InvalidPoint("λ and λ̄ must share n_modes")
        _check_symbols(self.lam, self.lamb)

    @classmethod
    def from_dicts(cls, lam, lamb, n=DEFAULT_N):
        d = dict(lam)
        d.setdefault(1, 1.0)
        return cls(LaurentSeries.from_dict(d, n), LaurentSeries.from_dict(lamb, n))

    @property
    def n_modes(self):
        return self.lam.n_modes

    @property
    def ubar_m1(self):
        return self.lamb.coeff(-1)

    @property
    def w(self):
        return self.lam + self.lamb


@dataclass(frozen=True)
class LoopLaxPoint:
    """A loop x ↦ (λ(·, x), λ̄(·, x)) stored as two loop fields."""
    lam: LoopField
    lamb: LoopField

    def __post_init__(self):
        if self.lam.coeffs.shape != self.lamb.coeffs.shape:
            raise InvalidPoint("λ and λ̄ must share mode counts")
        _check_symbols(self.lam, self.lamb)

    @classmethod
    def from_point(cls, pt, m=DEFAULT_M):
        return cls(LoopField.from_series(pt.lam, m), LoopField.from_series(pt.lamb, m))

    @classmethod
    def from_entries(cls, lam, lamb, n=DEFAULT_N, m=DEFAULT_M):
        """Entries map (x-mode, z-mode) → coefficient; the z¹ term of λ is added."""
        d = dict(lam)
        d[(0, 1)] = d.get((0, 1), 0) + 1.0
        return cls(LoopField.from_modes(d, n, m), LoopField.from_modes(lamb, n, m))

    @property
    def n_modes(self):
        return self.lam.n_modes

    @property
    def x_modes(self):
        return self.lam.x_modes

    def at_x(self, x):
        return LaxPoint(self.lam.at_x(x), self.lamb.at_x(x))

    def samples(self):
        """The points at the M grid values of x."""
        return [self.at_x(x) for x in xgrid(self.x_modes)]


@dataclass(frozen=True)
class WCoords:
    w: LaurentSeries
    v: complex
    u: complex


def to_w_coords(pt):
    ub = pt.ubar_m1
    if ub == 0:
        raise DegenerateLeadingCoefficient("ū₋₁ = 0, u is undefined")
    return WCoords(pt.lam + pt.lamb, pt.lamb.coeff(0), cmath.log(ub))


def from_w_coords(wc):
    n = wc.w.n_modes
    eu = cmath.exp(wc.u)
    shift = LaurentSeries.from_dict({1: 1.0, 0: -wc.v, -1: -eu}, n)
    lam = wc.w.project(hi=0) + shift
    lamb = wc.w.project(lo=1) - shift
    return LaxPoint(lam, lamb)


# ------------------------------------------------------------------ validation

@dataclass(frozen=True)
class MembershipReport:
    in_M1: bool
    in_M0: bool
    diagnostics: dict = field(default_factory=dict)


def _safe_winding(f):
    try:
        return winding_number(f).value
    except NearZeroOnCircle:
        return None


def curve_scan(samples):
    """Self-intersection scan of a closed sampled curve.

    Returns (crossings, min distance between non-adjacent samples, diameter).
    """
    xs = np.ascontiguousarray(samples.real)
    ys = np.ascontiguousarray(samples.imag)
    crossings, dmin = _kernels.segment_scan(xs, ys)
    diam = float(np.abs(samples[:, None] - samples[None, :]).max()) if samples.size < 4000 else \
        float(2 * np.abs(samples - samples.mean()).max())
    return int(crossings), float(dmin), diam


def _is_simple(w, L):
    crossings, dmin, diam = curve_scan(w.grid(L))
    if crossings:
        return False, dmin, diam
    # near-contact: refine the sampling until the polygon resolves the gap
    level = L
    while dmin < SELF_INTERSECTION_REL * diam and level < 64 * L:
        level *= 2
        crossings, dmin, diam = curve_scan(w.grid(level))
        if crossings:
            return False, dmin, diam
    return dmin >= SELF_INTERSECTION_REL * diam, dmin, diam


def validate(pt):
    """Membership flags for M1 and M0 with diagnostics."""
    n = pt.n_modes
    L = grid_size(n)
    w = pt.w
    diag = {
        "winding_lambda": _safe_winding(pt.lam),
        "winding_lambdabar": _safe_winding(pt.lamb),
        "winding_w": _safe_winding(w),
        "ubar_m1": complex(pt.ubar_m1),
    }
    in_m1 = (diag["winding_lambda"] == 1 and diag["winding_lambdabar"] == -1
             and diag["winding_w"] == 1)
    dw = w.z_deriv().grid(L) / zgrid(L)
    diag["min_abs_wprime"] = float(np.abs(dw).min())
    diag["gamma_winding"] = diag["winding_w"]
    simple, dmin, diam = _is_simple(w, L)
    diag["min_curve_distance"] = dmin
    diag["curve_diameter"] = diam
    diag["simple_curve"] = bool(simple)
    in_m0 = bool(in_m1 and pt.ubar_m1 != 0
                 and diag["min_abs_wprime"] > 1e-8 * max(1.0, w.max_abs())
                 and simple and diag["gamma_winding"] == 1)
    return MembershipReport(bool(in_m1), in_m0, diag)


def validate_loop(lp):
    """Per-x membership; flags are conjunctions over the x-grid."""
    reports = [validate(p) for p in lp.samples()]
    return MembershipReport(all(r.in_M1 for r in reports), all(r.in_M0 for r in reports),
                            {"per_x": [r.diagnostics for r in reports],
                             "x_tail": max(lp.lam.x_tail_ratio(), lp.lamb.x_tail_ratio())})


def loop_in_M1(lp):
    """Cheap M1 test for loop points (windings only, every x-grid point)."""
    for p in lp.samples():
        if (_safe_winding(p.lam), _safe_winding(p.lamb), _safe_winding(p.w)) != (1, -1, 1):
            return False
    return True


def require_M1(pt):
    if isinstance(pt, LoopLaxPoint):
        if not loop_in_M1(pt):
            raise NotInM1("loop point leaves M1 for some x")
        return
    rep = validate(pt)
    if not rep.in_M1:
        raise NotInM1(f"windings {rep.diagnostics['winding_lambda']}, "
                      f"{rep.diagnostics['winding_lambdabar']}, {rep.diagnostics['winding_w']}")


def require_M0(pt):
    rep = validate(pt)
    if not rep.in_M0:
        raise NotInM0(f"point is not in M0: {rep.diagnostics}")
    return rep


# --------------------------------------------------- tangent / cotangent vectors

@dataclass(frozen=True)
class TangentRep:
    """Tangent vector in pair form (X, X̄) or triple form (X(z), X_v, X_u)."""
    form: str
    z: LaurentSeries
    zbar: LaurentSeries = None
    v: complex = 0j
    u: complex = 0j

    @classmethod
    def pair(cls, X, Xbar):
        return cls("pair", X, Xbar)

    @classmethod
    def triple(cls, X, v=0j, u=0j):
        return cls("triple", X, None, complex(v), complex(u))

    def __add__(self, other):
        return _combine(self, other, 1.0)

    def __sub__(self, other):
        return _combine(self, other, -1.0)

    def scale(self, a):
        if self.form == "pair":
            return type(self).pair(self.z * a, self.zbar * a)
        return type(self).triple(self.z * a, self.v * a, self.u * a)

    def max_abs(self):
        if self.form == "pair":
            return max(self.z.max_abs(), self.zbar.max_abs())
        return max(self.z.max_abs(), abs(self.v), abs(self.u))


@dataclass(frozen=True)
class CotangentRep(TangentRep):
    """Covector in pair form (α, ᾱ) ∈ ℋ(D₀) ⊕ zℋ(D_∞) or triple form."""


def _combine(a, b, s):
    if a.form != b.form:
        raise ValueError("mixing pair and triple forms")
    if a.form == "pair":
        return type(a).pair(a.z + b.z * s, a.zbar + b.zbar * s)
    return type(a).triple(a.z + b.z * s, a.v + s * b.v, a.u + s * b.u)


def vector_pair_to_triple(X, pt):
    ub = pt.ubar_m1
    if ub == 0:
        raise DegenerateLeadingCoefficient("ū₋₁ = 0")
    return TangentRep.triple(X.z + X.zbar, X.zbar.coeff(0), X.zbar.coeff(-1) / ub)


def vector_triple_to_pair(X, pt):
    n = X.z.n_modes
    eu = pt.ubar_m1
    corr = LaurentSeries.from_dict({0: X.v, -1: eu * X.u}, n)
    return TangentRep.pair(X.z.project(hi=0) - corr, X.z.project(lo=1) + corr)


def covector_pair_to_triple(a, pt):
    d = a.zbar - a.z
    return CotangentRep.triple(a.z + a.zbar.project(hi=-1), d.coeff(0), pt.ubar_m1 * d.coeff(1))


def covector_triple_to_pair(a, pt):
    ub = pt.ubar_m1
    if ub == 0:
        raise DegenerateLeadingCoefficient("ū₋₁ = 0")
    n = a.z.n_modes
    top = LaurentSeries.from_dict({0: a.v + a.z.coeff(0), 1: a.u / ub + a.z.coeff(1)}, n)
    return CotangentRep.pair(a.z.project(lo=0), a.z.project(hi=-1) + top)


def as_triple(rep, pt):
    if rep.form == "triple":
        return rep
    if isinstance(rep, CotangentRep):
        return covector_pair_to_triple(rep, pt)
    return vector_pair_to_triple(rep, pt)


def as_pair(rep, pt):
    if rep.form == "pair":
        return rep
    if isinstance(rep, CotangentRep):
        return covector_triple_to_pair(rep, pt)
    return vector_triple_to_pair(rep, pt)


def canonical_covector(a):
    """Drop the representative freedom z⁻¹ℋ(D_∞) ⊕ z²ℋ(D₀) of a pair covector."""
    return CotangentRep.pair(a.z.project(lo=0), a.zbar.project(hi=1))


def pairing(alpha, X, pt=None):
    """⟨α, X⟩; pair/pair uses (αX + ᾱX̄)₀, otherwise the triple formula."""
    if alpha.form == "pair" and X.form == "pair":
        return alpha.z.pair_mean(X.z) + alpha.zbar.pair_mean(X.zbar)
    a = as_triple(alpha, pt)
    x = as_triple(X, pt)
    return a.z.pair_mean(x.z) + a.v * x.v + a.u * x.u


def unit_field(pt):
    n = pt.n_modes
    return TangentRep.pair(LaurentSeries.constant(-1.0, n), LaurentSeries.constant(1.0, n))


def euler_field(pt):
    return TangentRep.pair(pt.lam - pt.lam.z_deriv(), pt.lamb - pt.lamb.z_deriv())
