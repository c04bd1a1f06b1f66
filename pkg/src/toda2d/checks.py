"""Identity-check suites shared by the command line and the acceptance tests.

A suite is a list of named checks; each check returns a residual that is
compared with a tolerance.  Suites that need an x-dependent point take the
loop point of the context, the rest use its x = 0 sample.
"""
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import deformed as D
from . import frobenius as F
from . import hierarchy as H
from .manifold import (CotangentRep, LoopLaxPoint, TangentRep, as_triple, pairing, require_M0,
                       require_M1)
from .spectral import DEFAULT_N, LaurentSeries

# (name, default tolerance)
TOLERANCES = {
    "zs": 1e-9, "lax_p1": 1e-9, "recursion": 1e-9, "casimir": 1e-10, "tau": 1e-9,
    "combination": 1e-10, "bar_combination": 1e-12,
    "gram": 1e-10, "duality": 1e-10, "rh": 1e-8, "product": 1e-9, "operator": 1e-9,
    "torsion": 1e-6, "compatibility": 1e-6, "flat_differential": 1e-6,
    "deformed_flatness": 1e-5, "zeta_ode": 1e-5, "horizontality": 1e-10,
    "levelt": 1e-8, "theta_at_zero": 1e-6, "analyticity": 1e-6, "monodromy": 1e-9, "R": 0.0,
    "orthogonality": 1e-7, "c_relation": 1e-8, "q_tilde": 1e-8,
    "theta_coeff": 1e-12, "omega": 1e-7, "omega_tau": 1e-7,
}

ZS_PAIRS = [("u,0", "v,0"), ("u,1", "v,1"), ("v,1", "-1,1"), ("0,1", "v,1"), ("-1,0", "1,1"),
            ("u,2", "-1,1"), ("-2,1", "v,2"), ("0,2", "u,1"), ("1,1", "-1,2"), ("v,0", "0,1"),
            ("u,0", "-1,1"), ("-1,1", "v,2"), ("-3,0", "2,1"), ("v,-1", "1,0")]
TAU_PAIRS = [("u,0", "v,1"), ("v,1", "-1,1"), ("0,1", "1,0"), ("-2,1", "v,0"), ("u,1", "-1,0"),
             ("1,1", "v,2"), ("0,0", "-1,2")]
CHAINS = ["u", "v", -3, -2, -1, 0, 1, 2]
LAX_INDICES = ["u,0", "u,1", "v,0", "v,1", "v,2", "-1,0", "-1,1", "0,0", "1,1", "-2,1", "-3,2"]
DEFORMED_ALPHAS = [-2, -1, 0, 1, 2, "u", "v"]
DEFORMED_ZETAS = [0.3, 0.3j, -0.2 + 0.2j]
OMEGA_PAIRS = [("u,0", "0,0"), ("v,1", "-1,1"), ("0,1", "v,0")]
OMEGA_TRIPLES = [("0,0", "1,0", "v,1"), ("v,0", "-1,0", "0,1")]


@dataclass
class CheckRecord:
    name: str
    indices: str
    residual: float
    tolerance: float
    passed: bool
    runtime_ms: float

    def as_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


@dataclass
class Context:
    point: object
    loop: LoopLaxPoint
    zeta: complex = None
    window: int = 8
    tol: float = None
    seed: int = 0

    def rng(self, salt=0):
        return np.random.default_rng([self.seed, salt])


def _norm(r):
    if isinstance(r, (TangentRep, H.FlowVector)):
        return float(r.max_abs())
    if hasattr(r, "max_abs"):
        return float(r.max_abs())
    return float(np.max(np.abs(np.asarray(r))))


class Suite:
    def __init__(self, ctx):
        self.ctx = ctx
        self.jobs = []

    def add(self, name, indices, fn):
        self.jobs.append((name, str(indices), fn))

    def run(self, threads=None):
        threads = threads or int(os.environ.get("TODA_THREADS", "1") or 1)

        def one(job):
            name, idx, fn = job
            t0 = time.perf_counter()
            res = _norm(fn())
            tol = self.ctx.tol if self.ctx.tol is not None else TOLERANCES[name]
            ok = bool(np.isfinite(res) and res <= tol)
            return CheckRecord(name, idx, res, tol, ok, 1e3 * (time.perf_counter() - t0))

        if threads <= 1:
            return [one(j) for j in self.jobs]
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, self.jobs))


def _random_series(rng, lo, hi, n, scale=0.1):
    return LaurentSeries.from_dict({k: scale * complex(rng.normal(), rng.normal()) * 0.5 ** abs(k)
                                    for k in range(lo, hi + 1)}, n)


def random_vector(rng, with_vu=True, n=DEFAULT_N):
    v, u = (rng.normal(), rng.normal()) if with_vu else (0.0, 0.0)
    return TangentRep.triple(_random_series(rng, -5, 5, n), v, u)


def random_covector(rng, n=DEFAULT_N):
    return CotangentRep.triple(_random_series(rng, -5, 5, n), rng.normal(), rng.normal())


# ------------------------------------------------------------------ hierarchy suites

def suite_zs(ctx, s):
    lp = ctx.loop
    require_M1(lp)
    S = H.SymbolGrid.of(lp)
    for a, b in ZS_PAIRS:
        s.add("zs", f"{a};{b}", lambda a=a, b=b: H.zs_residual(a, b, lp, S))


def suite_recursion(ctx, s):
    lp = ctx.loop
    require_M1(lp)
    S = H.SymbolGrid.of(lp)
    for idx in LAX_INDICES:
        def lax(idx=idx):
            i = H.as_index(idx)
            return H.lax_flow(i, lp, S) - H.poisson_p1(H.hamiltonian_gradient(i, lp, S), lp)
        s.add("lax_p1", idx, lax)
    for a in CHAINS:
        for p in (-1, 0, 1):
            s.add("recursion", f"{a},{p}",
                  lambda a=a, p=p: H.recursion_residual(H.HierarchyIndex(a, p), lp, S))


def suite_casimir(ctx, s):
    lp = ctx.loop
    require_M1(lp)
    S = H.SymbolGrid.of(lp)
    for a in CHAINS:
        s.add("casimir", f"P1:{a},-1", lambda a=a: H.casimir_residual(H.HierarchyIndex(a, -1), lp, 1, S))
    for a in ("-1", "v"):
        s.add("casimir", f"P2:{a},-1",
              lambda a=a: H.casimir_residual(H.HierarchyIndex(a, -1), lp, 2, S))
    for a in (-2, -3, -4):
        # the chains with α ≤ −2 end on a Casimir of the second bracket
        idx = H.HierarchyIndex(a, -a - 2)
        s.add("casimir", f"P2:{idx}",
              lambda idx=idx: H.poisson_p2(H.hamiltonian_gradient(idx, lp, S), lp))


def suite_tau(ctx, s):
    lp = ctx.loop
    require_M1(lp)
    S = H.SymbolGrid.of(lp)
    for a, b in TAU_PAIRS:
        s.add("tau", f"{a};{b}", lambda a=a, b=b: H.tau_symmetry_residual(a, b, lp, S))


def suite_classical(ctx, s):
    lp = ctx.loop
    require_M1(lp)
    S = H.SymbolGrid.of(lp)
    for n in (1, 2, 3):
        s.add("combination", n, lambda n=n: H.combination_residual(n, lp, S))
        s.add("bar_combination", n, lambda n=n: H.bar_combination_residual(n, lp, S))


# ------------------------------------------------------------------ geometry suites

def suite_metric(ctx, s):
    pt = ctx.point
    require_M0(pt)
    fr = F.FlatFrame.build(pt, ctx.window)
    s.add("gram", f"A={ctx.window}", lambda: fr.gram(pt) - fr.eta_matrix())
    s.add("duality", f"A={ctx.window}", lambda: fr.duality(pt) - np.eye(len(fr.indices)))
    s.add("rh", "A=16", lambda: F.rh_factorize(pt, 16, raise_on_failure=False).residual)
    s.add("rh", "A=16 moments", lambda: F.rh_factorize(pt, 16, raise_on_failure=False).coefficient_residual)
    rng = ctx.rng(1)
    n = pt.n_modes
    a, b, c = random_covector(rng, n), random_covector(rng, n), random_covector(rng, n)
    X = random_vector(rng, n=n)

    def prod(x, y):
        return as_triple(F.cotangent_product(x, y, pt), pt)

    s.add("product", "commutativity", lambda: prod(a, b) - prod(b, a))
    s.add("product", "associativity",
          lambda: prod(F.cotangent_product(a, b, pt), c) - prod(a, F.cotangent_product(b, c, pt)))
    s.add("product", "frobenius",
          lambda: F.eta_cotangent(F.cotangent_product(a, b, pt), c, pt)
          - F.eta_cotangent(a, F.cotangent_product(b, c, pt), pt))
    unit = F.eta_flat(TangentRep.triple(LaurentSeries.zeros(pt.n_modes), 1.0, 0.0), pt)
    s.add("product", "unit", lambda: prod(unit, b) - b)
    s.add("operator", "C_X", lambda: F.mult_operator(X, a, pt) - prod(F.eta_flat(X, pt), a))
    s.add("operator", "U symmetric",
          lambda: F.eta_cotangent(a, F.u_operator(b, pt), pt) - F.eta_cotangent(F.u_operator(a, pt), b, pt))
    s.add("operator", "V antisymmetric",
          lambda: F.eta_cotangent(a, F.v_operator(b, pt), pt) + F.eta_cotangent(F.v_operator(a, pt), b, pt))
    for al in [-3, -2, -1, 0, 1, 2, "v", "u"]:
        m = -float(D.mu(al))
        s.add("operator", f"V eigen {al}",
              lambda al=al, m=m: F.v_operator(F.dt_differential(al, pt), pt)
              - F.dt_differential(al, pt).scale(m))


def suite_flatness(ctx, s):
    pt = ctx.point
    require_M0(pt)
    rng = ctx.rng(2)
    n = pt.n_modes
    a, b = random_covector(rng, n), random_covector(rng, n)
    X, Y = random_vector(rng, n=n), random_vector(rng, n=n)
    zero = CotangentRep.triple(LaurentSeries.zeros(pt.n_modes), 0.0, 0.0)
    s.add("torsion", "X,Y", lambda: pairing(F.christoffel(X, a, pt), Y, pt)
          - pairing(F.christoffel(Y, a, pt), X, pt))

    def compat():
        d = F.directional_derivative(lambda p: F.eta_cotangent(a, b, p), pt, X)
        na = F.covariant_deriv(zero, X, a, pt)
        nb = F.covariant_deriv(zero, X, b, pt)
        return d - F.eta_cotangent(na, b, pt) - F.eta_cotangent(a, nb, pt)

    s.add("compatibility", "X", compat)
    for al in [-3, -2, -1, 0, 1, 2, "v", "u"]:
        def flat(al=al):
            d = F.cotangent_direction(lambda p: F.dt_differential(al, p), pt, X)
            return F.covariant_deriv(d, X, F.dt_differential(al, pt), pt)
        s.add("flat_differential", al, flat)


# ------------------------------------------------------------------ deformed suites

def _directions(ctx, pt):
    rng = ctx.rng(3)
    dirs = [(f"d/dt^{b}", F.coordinate_vector(b, pt)) for b in (-1, 0, "v", "u")]
    dirs += [(f"random z {k}", random_vector(rng, False, pt.n_modes)) for k in range(2)]
    return dirs


def suite_deformed(ctx, s):
    pt = ctx.point
    require_M0(pt)
    zetas = [ctx.zeta] if ctx.zeta is not None else DEFORMED_ZETAS
    dirs = _directions(ctx, pt)
    for a in DEFORMED_ALPHAS:
        for z in zetas:
            for name, X in dirs:
                s.add("deformed_flatness", f"{a};zeta={z};{name}",
                      lambda a=a, z=z, X=X: D.deformed_flatness_residual(a, z, X, pt))
            s.add("zeta_ode", f"{a};zeta={z}", lambda a=a, z=z: D.zeta_ode_residual(a, z, pt))
            s.add("horizontality", f"{a};zeta={z}",
                  lambda a=a, z=z: max(D.f_horizontality_residual(a, z, pt).values()))


def suite_levelt(ctx, s):
    pt = ctx.point
    require_M0(pt)
    z = ctx.zeta if ctx.zeta is not None else 0.3
    A = ctx.window
    s.add("levelt", f"zeta={z};A={A}", lambda: D.levelt_residual(z, pt, A, "analytic"))
    s.add("levelt", f"zeta={z};A={A};directional", lambda: D.levelt_residual(z, pt, A, "directional"))
    s.add("theta_at_zero", f"A={A}",
          lambda: D.theta_matrix(0.0, pt, A, "analytic").matrix - np.eye(len(D.window_indices(A))))
    s.add("analyticity", "A=4", lambda: max(D.analyticity_residual(pt, 4)))
    s.add("monodromy", f"y_v;zeta={z}", lambda: D.y_v_monodromy_residual(z, pt))
    data = D.monodromy_data(A)
    s.add("R", "invariants", lambda: 0.0 if all(data.checks.values()) else 1.0)


def suite_orthogonality(ctx, s):
    pt = ctx.point
    require_M0(pt)
    z = ctx.zeta if ctx.zeta is not None else 0.3
    s.add("orthogonality", f"zeta={z};A=6", lambda: D.orthogonality_residual(z, pt, 6))
    for a in [-3, -1, 0, 1, 2, 3, "v", "u"]:
        s.add("c_relation", f"{a};zeta={z}", lambda a=a: D.c_relation_residual(a, z, pt))
    for a in [-2, -1, 0, 1, "v", "u"]:
        for p in (0, 1, 2, 3):
            s.add("q_tilde", f"{a},{p}", lambda a=a, p=p: max(D.q_tilde_consistency(a, p, pt)))


def suite_omega(ctx, s):
    pt = ctx.point
    lp = ctx.loop
    require_M0(pt)
    A = ctx.window

    def coeffs():
        worst = 0.0
        for a in D.window_indices(A):
            cs = D.taylor_coefficients(lambda z, a=a: D.theta(a, z, pt), 4)
            for p in range(5):
                h = H.hamiltonian_density(H.HierarchyIndex(a, p - 1), pt)
                worst = max(worst, abs(cs[p] - h))
        return worst

    s.add("theta_coeff", f"A={A};p<=4", coeffs)
    require_M1(lp)
    for a, b in OMEGA_PAIRS:
        s.add("omega", f"{a};{b}", lambda a=a, b=b: D.omega_xderiv_residual(a, b, lp))
    for a, b, c in OMEGA_TRIPLES:
        s.add("omega_tau", f"{a};{b};{c}",
              lambda a=a, b=b, c=c: D.omega_time_derivative(a, b, c, lp, xs=[3, 10])
              - D.omega_time_derivative(c, b, a, lp, xs=[3, 10]))


SUITES = {
    "zs": suite_zs, "recursion": suite_recursion, "tau": suite_tau, "casimir": suite_casimir,
    "metric": suite_metric, "flatness": suite_flatness, "deformed": suite_deformed,
    "levelt": suite_levelt, "orthogonality": suite_orthogonality, "omega": suite_omega,
    "classical": suite_classical,
}


def run_suite(name, ctx, threads=None):
    if name not in SUITES:
        raise KeyError(name)
    s = Suite(ctx)
    SUITES[name](ctx, s)
    return s.run(threads)
