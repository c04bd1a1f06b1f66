"""The extended dispersionless 2D Toda hierarchy on the loop space.

Everything here works on grid samples of the Lax symbols.  A
:class:`SymbolGrid` holds λ, λ̄, λ+λ̄ on the padded circle grid together with
three logarithms whose branches are fixed once:

    log(λ/z)        winding 0, vanishes at ∞ (so no constant term)
    log(zλ̄)         winding 0, analytic in the disc, value log ū₋₁ at 0
    log((λ+λ̄)/z)    winding 0, mean imaginary part in (−π, π]

log(1 + λ̄/λ) and log λ̄(λ+λ̄) are assembled from these.  The Q-functions and
their partial derivatives in λ, λ̄ are written out by hand.
"""
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import LeftManifold, NotInM1, TailBlowup
from .manifold import LaxPoint, LoopLaxPoint, loop_in_M1
from .spectral import (LoopField, grid_log, harmonic, ipow, poisson_bracket, x_function_values,
                       x_integral, zgrid)

UV = ("u", "v")


def parse_alpha(a):
    if isinstance(a, str):
        a = a.strip()
        if a in UV:
            return a
        return int(a)
    if isinstance(a, (int, np.integer)):
        return int(a)
    raise ValueError(f"bad index {a!r}")


@dataclass(frozen=True)
class HierarchyIndex:
    alpha: object
    p: int

    def __post_init__(self):
        object.__setattr__(self, "alpha", parse_alpha(self.alpha))
        if self.p < -1:
            raise ValueError("p must be ≥ −1")

    @classmethod
    def parse(cls, text):
        a, p = text.replace(" ", "").rsplit(",", 1)
        return cls(a, int(p))

    def shift(self, dp):
        return HierarchyIndex(self.alpha, self.p + dp)

    def __str__(self):
        return f"{self.alpha},{self.p}"


def as_index(idx):
    if isinstance(idx, HierarchyIndex):
        return idx
    if isinstance(idx, str):
        return HierarchyIndex.parse(idx)
    return HierarchyIndex(*idx)


class SymbolGrid:
    """Samples of λ, λ̄ and the branch-fixed logarithms on the padded grid."""

    def __init__(self, lam, lamb):
        self.field = lam
        self.L = lam.grid()
        self.B = lamb.grid()
        self.W = self.L + self.B
        self.z = zgrid(self.L.shape[-1])

    @classmethod
    def of(cls, pt):
        return cls(pt.lam, pt.lamb)

    def _log(self, vals, what):
        try:
            return grid_log(vals)
        except ValueError as exc:
            raise NotInM1(f"{what} has nonzero winding") from exc

    @cached_property
    def log_lam(self):
        return self._log(self.L / self.z, "λ/z")

    @cached_property
    def log_lamb(self):
        return self._log(self.z * self.B, "zλ̄")

    @cached_property
    def log_w(self):
        return self._log(self.W / self.z, "(λ+λ̄)/z")

    @property
    def l1(self):
        """log(1 + λ̄/λ)."""
        return self.log_w - self.log_lam

    @property
    def l2(self):
        """log λ̄(λ+λ̄)."""
        return self.log_lamb + self.log_w

    def lift(self, vals):
        return self.field.lift(vals)


def _c(p):
    return float(harmonic(p))


def _dfact(p):
    return float(2 ** p * math.factorial(p))


def q_grid(idx, S):
    """(Q, Q_λ, Q_λ̄) for Q = Q_{α̂,p} sampled on the grid."""
    idx = as_index(idx)
    a, p = idx.alpha, idx.p
    L, B, W = S.L, S.B, S.W
    zero = np.zeros_like(L)
    if a == "u":
        if p == -1:
            return np.ones_like(L), zero, zero
        return ipow(B, p + 1) / math.factorial(p + 1), zero, ipow(B, p) / math.factorial(p)
    if a == -1:
        if p == -1:
            return -1.0 / L, 1.0 / (L * L), zero
        mL = ipow(-L, p) / math.factorial(p)
        K = S.l1 + _c(p) - 1.0
        D = B - L
        q = -mL * K - ipow(D, p) / _dfact(p)
        ql = mL * (1.0 / L - 1.0 / W)
        qb = -mL / W
        if p > 0:
            mL1 = ipow(-L, p - 1) / math.factorial(p - 1)
            ql = ql + mL1 * K + ipow(D, p - 1) * (p / _dfact(p))
            qb = qb - ipow(D, p - 1) * (p / _dfact(p))
        return q, ql, qb
    if a == "v":
        if p == -1:
            return 1.0 / B - 1.0 / L, 1.0 / (L * L), -1.0 / (B * B)
        mL = ipow(-L, p) / math.factorial(p)
        bp = ipow(B, p) / math.factorial(p)
        K = S.l1 + _c(p) - 1.0
        J = S.l2 - _c(p) - 1.0
        q = -mL * K + bp * J
        ql = mL * (1.0 / L - 1.0 / W) + bp / W
        qb = -mL / W + bp * (1.0 / B + 1.0 / W)
        if p > 0:
            ql = ql + ipow(-L, p - 1) / math.factorial(p - 1) * K
            qb = qb + ipow(B, p - 1) / math.factorial(p - 1) * J
        return q, ql, qb
    # integer α ≠ −1
    if p == -1:
        return zero, zero, zero
    c = -1.0 / ((a + 1) * _dfact(p))
    D = B - L
    Wa = ipow(W, a)
    Dp = ipow(D, p)
    q = c * Wa * W * Dp
    ql = c * (a + 1) * Wa * Dp
    qb = ql
    if p > 0:
        extra = c * p * Wa * W * ipow(D, p - 1)
        ql = ql - extra
        qb = qb + extra
    return q, ql, qb


def q_tilde_grid(idx, S):
    """Q̃_{α̂,p} on the grid (the densities of the orthogonal hierarchy)."""
    idx = as_index(idx)
    a, p = idx.alpha, idx.p
    if p < 0:
        raise ValueError("Q̃ is defined for p ≥ 0")
    L, B, W = S.L, S.B, S.W
    D = B - L
    if a == "u" or (isinstance(a, int) and a <= -2):
        return q_grid(idx, S)[0]
    if isinstance(a, int) and a >= 0:
        total = np.zeros_like(L)
        for n in range(p // 2 + 1):
            total = total + (ipow(W / 2, 2 * n + a + 1) * ipow(D / 2, p - 2 * n)
                             / (math.factorial(2 * n + a + 1) * math.factorial(p - 2 * n)))
        return -2 * _dfact(a) * total
    mL = ipow(-L, p) / math.factorial(p)
    if a == -1:
        out = -mL * (S.l1 + _c(p))
        for l in range(p):
            out = out + (2.0 ** -p * ipow(D, l) * ipow(-W, p - l) * _c(p - l)
                         / (math.factorial(l) * math.factorial(p - l)))
        return out
    out = -mL * (S.l1 + _c(p)) + ipow(B, p) / math.factorial(p) * (S.l2 - _c(p))
    for l in range(p):
        den = _dfact(p - l) * (p - l)
        out = out - ipow(-L, l) / math.factorial(l) * ipow(W, p - l) / den
        out = out + ipow(B, l) / math.factorial(l) * ipow(-W, p - l) / den
    return out


# ------------------------------------------------------------------ Q as fields

def _needs_log(idx):
    return idx.alpha in (-1, "v") and idx.p >= 0


def q_function(idx, pt, S=None):
    idx = as_index(idx)
    S = S or SymbolGrid.of(pt)
    return S.lift(q_grid(idx, S)[0])


def q_partials(idx, pt, S=None):
    """(∂Q/∂λ, ∂Q/∂λ̄) as fields."""
    S = S or SymbolGrid.of(pt)
    _, ql, qb = q_grid(as_index(idx), S)
    return S.lift(ql), S.lift(qb)


def q_tilde_function(idx, pt, S=None):
    S = S or SymbolGrid.of(pt)
    return S.lift(q_tilde_grid(as_index(idx), S))


def homogeneity_residuals(idx, pt, S=None):
    """Pointwise residuals of the two scaling identities on the circle grid.

    Returns (max |(∂λ̄ − ∂λ)Q_p − Q_{p−1}|, max |(λ∂λ + λ̄∂λ̄)Q_p − eigen part|)
    for p ≥ 0.
    """
    idx = as_index(idx)
    if idx.p < 0:
        raise ValueError("the identities hold for p ≥ 0")
    S = S or SymbolGrid.of(pt)
    q, ql, qb = q_grid(idx, S)
    prev = q_grid(idx.shift(-1), S)[0]
    euler = S.L * ql + S.B * qb
    a, p = idx.alpha, idx.p
    if a == "u":
        expected = (p + 1) * q
    elif a == "v":
        expected = p * q + 2 * q_grid(HierarchyIndex("u", p - 1), S)[0]
    else:
        expected = (a + p + 1) * q
    return float(np.abs(qb - ql - prev).max()), float(np.abs(euler - expected).max())


# ------------------------------------------------------------------ flows

@dataclass(frozen=True)
class FlowVector:
    d_lambda: object
    d_lambdabar: object

    def __add__(self, o):
        return FlowVector(self.d_lambda + o.d_lambda, self.d_lambdabar + o.d_lambdabar)

    def __sub__(self, o):
        return FlowVector(self.d_lambda - o.d_lambda, self.d_lambdabar - o.d_lambdabar)

    def scale(self, a):
        return FlowVector(self.d_lambda * a, self.d_lambdabar * a)

    def max_abs(self):
        return max(self.d_lambda.max_abs(), self.d_lambdabar.max_abs())

    def mode_violation(self):
        """Size of the modes that a tangent vector should not carry."""
        bad = self.d_lambda - self.d_lambda.project(hi=0)
        badb = self.d_lambdabar - self.d_lambdabar.project(lo=-1)
        return max(bad.max_abs(), badb.max_abs())

    def projected(self):
        return FlowVector(self.d_lambda.project(hi=0), self.d_lambdabar.project(lo=-1))


@dataclass(frozen=True)
class CovectorField:
    """A loop covector (ω, ω̄); any representative in ℋ(𝕊¹)² is accepted."""
    omega: object
    omegabar: object

    def __add__(self, o):
        return CovectorField(self.omega + o.omega, self.omegabar + o.omegabar)

    def scale(self, a):
        return CovectorField(self.omega * a, self.omegabar * a)

    def projected(self):
        return CovectorField(self.omega.project(lo=0), self.omegabar.project(hi=1))


def _as_loop(pt):
    if isinstance(pt, LaxPoint):
        return LoopLaxPoint.from_point(pt)
    return pt


def lax_flow(idx, lp, S=None):
    """(∂λ, ∂λ̄) = ({−(Q)₋, λ}, {(Q)₊, λ̄}) for Q = Q_{α̂,p}."""
    idx = as_index(idx)
    lp = _as_loop(lp)
    S = S or SymbolGrid.of(lp)
    Q = S.lift(q_grid(idx, S)[0])
    return FlowVector(poisson_bracket(-Q.project(hi=-1), lp.lam),
                      poisson_bracket(Q.project(lo=0), lp.lamb))


def classical_lax_flow(n, which, lp):
    """The flows ∂/∂t_n (which='t') and ∂/∂t̄_n (which='tbar')."""
    lp = _as_loop(lp)
    if which == "t":
        gen = _power(lp.lam, n).project(lo=0)
    elif which == "tbar":
        gen = _power(lp.lamb, n).project(hi=-1)
    else:
        raise ValueError("which must be 't' or 'tbar'")
    return FlowVector(poisson_bracket(gen, lp.lam), poisson_bracket(gen, lp.lamb))


def _power(f, n):
    return f.lift(ipow(f.grid(), n))


def q_time_derivative(idx, flow, S):
    """∂Q/∂t = Q_λ ∂λ + Q_λ̄ ∂λ̄ by the chain rule."""
    _, ql, qb = q_grid(as_index(idx), S)
    return S.lift(ql * flow.d_lambda.grid() + qb * flow.d_lambdabar.grid())


def zs_residual(a, b, lp, S=None):
    """∂_{t^b}Q_a − ∂_{t^a}Q_b + {(Q_a)₊, (Q_b)₊} − {(Q_a)₋, (Q_b)₋}."""
    a, b = as_index(a), as_index(b)
    lp = _as_loop(lp)
    S = S or SymbolGrid.of(lp)
    Qa = S.lift(q_grid(a, S)[0])
    Qb = S.lift(q_grid(b, S)[0])
    fa, fb = lax_flow(a, lp, S), lax_flow(b, lp, S)
    return (q_time_derivative(a, fb, S) - q_time_derivative(b, fa, S)
            + poisson_bracket(Qa.project(lo=0), Qb.project(lo=0))
            - poisson_bracket(Qa.project(hi=-1), Qb.project(hi=-1)))


# ------------------------------------------------------------------ Hamiltonians

def hamiltonian_density(idx, pt, S=None):
    """h_{α̂,p} = (Q_{α̂,p+1})₀; a number for a point, x-coefficients for a loop."""
    idx = as_index(idx)
    return q_function(idx.shift(1), pt, S).mean()


def hamiltonian(idx, lp, S=None):
    """H_{α̂,p} = ∫ h_{α̂,p} dx."""
    return x_integral(hamiltonian_density(idx, _as_loop(lp), S))


def hamiltonian_gradient(idx, lp, S=None, projected=False):
    """dH_{α̂,p} = (∂Q_{α̂,p+1}/∂λ, ∂Q_{α̂,p+1}/∂λ̄)."""
    idx = as_index(idx)
    lp = _as_loop(lp)
    ql, qb = q_partials(idx.shift(1), lp, S)
    cov = CovectorField(ql, qb)
    return cov.projected() if projected else cov


def _x_function_field(xcoeffs, like):
    c = np.zeros_like(like.coeffs)
    c[:, like.n_modes] = xcoeffs
    return LoopField(c)


def poisson_p1(om, lp):
    lp = _as_loop(lp)
    lam, lamb = lp.lam, lp.lamb
    psi = poisson_bracket(lam, om.omega) + poisson_bracket(lamb, om.omegabar)
    diff = om.omega - om.omegabar
    return FlowVector(-poisson_bracket(lam, diff.project(hi=-1)) + psi.project(hi=0),
                      poisson_bracket(lamb, diff.project(lo=0)) + psi.project(lo=1))


def poisson_p2(om, lp):
    lp = _as_loop(lp)
    lam, lamb = lp.lam, lp.lamb
    psi = poisson_bracket(lam, om.omega) + poisson_bracket(lamb, om.omegabar)
    phi = _x_function_field(psi.mean(), lam)
    m = lam * om.omega + lamb * om.omegabar
    return FlowVector(
        poisson_bracket(lam, m.project(hi=-1)) - lam * psi.project(hi=0) + lam.z_deriv() * phi,
        -poisson_bracket(lamb, m.project(lo=0)) + lamb * psi.project(lo=1) + lamb.z_deriv() * phi)


def loop_pairing(om, X):
    """∫ (ωX + ω̄X̄)₀ dx."""
    dens = (om.omega * X.d_lambda + om.omegabar * X.d_lambdabar).mean()
    return x_integral(dens)


def recursion_residual(idx, lp, S=None):
    """P2 dH_{α̂,p} minus the recursion right-hand side in P1 dH_{·,p+1}."""
    idx = as_index(idx)
    lp = _as_loop(lp)
    S = S or SymbolGrid.of(lp)
    lhs = poisson_p2(hamiltonian_gradient(idx, lp, S), lp)
    a, p = idx.alpha, idx.p
    nxt = poisson_p1(hamiltonian_gradient(idx.shift(1), lp, S), lp)
    if a == "u":
        rhs = nxt.scale(p + 2)
    elif a == "v":
        rhs = nxt.scale(p + 1) + poisson_p1(
            hamiltonian_gradient(HierarchyIndex("u", p), lp, S), lp).scale(2)
    else:
        rhs = nxt.scale(a + p + 2)
    return lhs - rhs


def casimir_residual(idx, lp, which=1, S=None):
    """P_which(dH_{α̂,−1}) for the given α̂ (idx.p must be −1)."""
    idx = as_index(idx)
    if idx.p != -1:
        raise ValueError("Casimirs are the p = −1 Hamiltonians")
    op = poisson_p1 if which == 1 else poisson_p2
    return op(hamiltonian_gradient(idx, lp, S), _as_loop(lp))


def tau_symmetry_residual(a, b, lp, S=None):
    """∂_{t^b} h_{a,p−1} − ∂_{t^a} h_{b,q−1} sampled on the x-grid."""
    a, b = as_index(a), as_index(b)
    lp = _as_loop(lp)
    S = S or SymbolGrid.of(lp)
    fa, fb = lax_flow(a, lp, S), lax_flow(b, lp, S)
    r = q_time_derivative(a, fb, S).mean() - q_time_derivative(b, fa, S).mean()
    return x_function_values(r)


def classical_hamiltonian(n, which, lp):
    """H_n = −∫(λ^{n+1}/(n+1))₀ dx, H̄_n likewise with λ̄."""
    lp = _as_loop(lp)
    f = lp.lam if which == "t" else lp.lamb
    return -x_integral(_power(f, n + 1).mean()) / (n + 1)


def combination_residual(n, lp, S=None):
    """H_n minus its expression through the extended Hamiltonians."""
    lp = _as_loop(lp)
    S = S or SymbolGrid.of(lp)
    f = math.factorial(n)
    total = (-1) ** n * f * hamiltonian(("u", n - 1), lp, S)
    for l in range(n + 1):
        coef = f * ((-1) ** l - (-1) ** (n + 1)) / (math.factorial(n - l) * 2 ** (n - l + 1))
        if coef:
            total += coef * hamiltonian((n - l, l - 1), lp, S)
    return classical_hamiltonian(n, "t", lp) - total


def bar_combination_residual(n, lp, S=None):
    """H̄_n + n!·H_{u,n−1}."""
    lp = _as_loop(lp)
    return classical_hamiltonian(n, "tbar", lp) + math.factorial(n) * hamiltonian(("u", n - 1), lp, S)


# ------------------------------------------------------------------ evolution

TAIL_TOL = 1e-8


def _rk4(idx, lam, lamb, h):
    def f(a, b):
        return lax_flow(idx, LoopLaxPoint(a, b)).projected()

    k1 = f(lam, lamb)
    k2 = f(lam + k1.d_lambda * (h / 2), lamb + k1.d_lambdabar * (h / 2))
    k3 = f(lam + k2.d_lambda * (h / 2), lamb + k2.d_lambdabar * (h / 2))
    k4 = f(lam + k3.d_lambda * h, lamb + k3.d_lambdabar * h)
    dl = (k1.d_lambda + k2.d_lambda * 2 + k3.d_lambda * 2 + k4.d_lambda) * (h / 6)
    db = (k1.d_lambdabar + k2.d_lambdabar * 2 + k3.d_lambdabar * 2 + k4.d_lambdabar) * (h / 6)
    return lam + dl, lamb + db


def _tail(lam, lamb):
    return max(lam.tail_ratio(), lamb.tail_ratio(), lam.x_tail_ratio(), lamb.x_tail_ratio())


def evolve(flows, lp, dt, check_every=10, tail_tol=TAIL_TOL, max_halvings=4):
    """Integrate the listed flows one after another with classical RK4.

    ``flows`` is a list of (index, duration).  A step whose result shows
    spectral tail above ``tail_tol`` is retried with halved steps; if that
    does not help a :class:`TailBlowup` is raised.  Membership in M1 is
    re-checked every ``check_every`` steps and at the end of each flow.
    """
    lp = _as_loop(lp)
    lam, lamb = lp.lam, lp.lamb
    step = 0
    for idx, duration in flows:
        idx = as_index(idx)
        if duration == 0:
            continue
        nsteps = max(1, int(math.ceil(abs(duration) / dt - 1e-9)))
        h = duration / nsteps
        for i in range(nsteps):
            step += 1
            tail0 = _tail(lam, lamb)
            sub = 1
            for _ in range(max_halvings + 1):
                a, b = lam, lamb
                for _ in range(sub):
                    a, b = _rk4(idx, a, b, h / sub)
                if _tail(a, b) <= max(tail_tol, 2 * tail0):
                    break
                sub *= 2
            else:
                raise TailBlowup(f"spectral tail {_tail(a, b):.2e} at step {step}")
            lam, lamb = a, b
            if step % check_every == 0 or i == nsteps - 1:
                if not loop_in_M1(LoopLaxPoint(lam, lamb)):
                    raise LeftManifold(f"left M1 at step {step}")
    return LoopLaxPoint(lam, lamb)
