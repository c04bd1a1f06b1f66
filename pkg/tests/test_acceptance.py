"""Fourteen acceptance criteria at N = 64, M = 64, A = 8.

Each test records a PASS/FAIL line in ``RESULTS``; the conftest hook prints
them at the end of the run, and running this file as a script prints them too.
"""
import time

import numpy as np
import pytest

from toda2d import frobenius as F
from toda2d import hierarchy as H
from toda2d.checks import Context, run_suite
from toda2d.manifold import LaxPoint, LoopLaxPoint
from toda2d.spectral import LaurentSeries

N, M, A = 64, 64, 8
RESULTS = {}


def record(k, ok, detail):
    RESULTS[k] = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, RESULTS[k]


@pytest.fixture(scope="module")
def loop():
    # λ = z + 0.1 + 0.05 e^{ix}, λ̄ = 0.25 z⁻¹
    return LoopLaxPoint.from_entries({(0, 0): 0.1, (1, 0): 0.05}, {(0, -1): 0.25}, N, M)


@pytest.fixture(scope="module")
def ctx(loop):
    return Context(loop.at_x(0.0), loop, window=A, seed=0)


_cache = {}


def suite(name, ctx):
    if name not in _cache:
        t0 = time.perf_counter()
        recs = run_suite(name, ctx)
        _cache[name] = (recs, time.perf_counter() - t0)
    return _cache[name]


def worst(recs, *names):
    sel = [r for r in recs if r.name in names]
    assert sel, names
    return max(r.residual for r in sel), len(sel)


def test_criterion_01_projection_and_convolution():
    rng = np.random.default_rng(0)
    t0 = time.perf_counter()
    err_proj = err_conv = 0.0
    for _ in range(10):
        k = np.arange(-N, N + 1)
        f = LaurentSeries((rng.normal(size=k.size) + 1j * rng.normal(size=k.size)) * 0.7 ** np.abs(k))
        g = LaurentSeries((rng.normal(size=k.size) + 1j * rng.normal(size=k.size)) * 0.7 ** np.abs(k))
        for cut in (-3, 0, 1, 5):
            err_proj = max(err_proj, (f.project(lo=cut) + f.project(hi=cut - 1) - f).max_abs())
        full = np.convolve(f.coeffs, g.coeffs)[N:3 * N + 1]
        err_conv = max(err_conv, float(np.abs((f * g).coeffs - full).max()))
    dt = time.perf_counter() - t0
    record(1, err_proj < 1e-12 and err_conv < 1e-12 and dt < 1.0,
           f"completeness {err_proj:.1e}, convolution {err_conv:.1e}, {dt:.2f} s")


def test_criterion_02_zero_curvature(ctx):
    recs, dt = suite("zs", ctx)
    r, n = worst(recs, "zs")
    logs = sum(1 for rec in recs if "v" in rec.indices or "-1" in rec.indices)
    record(2, r < 1e-9 and n >= 12 and logs > 0 and dt < 10,
           f"max residual {r:.1e} over {n} pairs ({logs} logarithmic), {dt:.1f} s")


def test_criterion_03_lax_is_hamiltonian(ctx):
    recs, _ = suite("recursion", ctx)
    r, n = worst(recs, "lax_p1")
    record(3, r < 1e-9, f"max |lax_flow − P1(dH)| {r:.1e} over {n} indices")


def test_criterion_04_recursion_and_casimirs(ctx):
    recs, _ = suite("recursion", ctx)
    r, n = worst(recs, "recursion")
    cas, _ = suite("casimir", ctx)
    c1 = max(x.residual for x in cas if x.indices.startswith("P1"))
    c2 = max(x.residual for x in cas if x.indices.startswith("P2"))
    record(4, r < 1e-9 and c1 < 1e-10 and c2 < 1e-10,
           f"recursion {r:.1e} ({n} cases), P1 Casimirs {c1:.1e}, P2 Casimirs {c2:.1e}")


def test_criterion_05_tau_symmetry(ctx):
    recs, _ = suite("tau", ctx)
    r, n = worst(recs, "tau")
    record(5, r < 1e-9 and n >= 6, f"max residual {r:.1e} over {n} pairs")


def test_criterion_06_classical_embedding(ctx):
    recs, _ = suite("classical", ctx)
    c, n = worst(recs, "combination")
    b, _ = worst(recs, "bar_combination")
    record(6, c < 1e-10 and b < 1e-12 and n == 3, f"combination {c:.1e}, H̄_n + n!H_(u,n−1) {b:.1e}")


def test_criterion_07_x_translation(loop):
    s = 0.1
    out = H.evolve([("v,0", s)], loop, 0.01)
    ref_l, ref_b = loop.lam.x_shift(s), loop.lamb.x_shift(s)
    rel = max((out.lam - ref_l).max_abs() / ref_l.max_abs(),
              (out.lamb - ref_b).max_abs() / ref_b.max_abs())
    record(7, rel < 1e-8, f"relative error {rel:.1e} after s = {s}")


def test_criterion_08_metric_and_connection(ctx):
    recs, _ = suite("metric", ctx)
    g, _ = worst(recs, "gram")
    fl, _ = suite("flatness", ctx)
    t, _ = worst(fl, "torsion", "compatibility")
    d, _ = worst(fl, "flat_differential")
    record(8, g < 1e-10 and t < 1e-6 and d < 1e-6,
           f"Gram {g:.1e}, torsion/compatibility {t:.1e}, ∇dt {d:.1e}")


def test_criterion_09_riemann_hilbert():
    pt = LaxPoint.from_dicts({0: 0.1}, {-1: 0.25}, N)
    rh = F.rh_factorize(pt, 16, raise_on_failure=False)
    record(9, rh.residual < 1e-8, f"max |z f0 − f∞| on Γ {rh.residual:.1e} (A = 16)")


def test_criterion_10_product_and_operators(ctx):
    recs, _ = suite("metric", ctx)
    r, n = worst(recs, "product", "operator")
    record(10, r < 1e-9, f"max residual {r:.1e} over {n} checks")


def test_criterion_11_deformed_flatness(ctx):
    recs, _ = suite("deformed", ctx)
    f, n = worst(recs, "deformed_flatness")
    z, _ = worst(recs, "zeta_ode")
    h, _ = worst(recs, "horizontality")
    record(11, f < 1e-5 and z < 1e-5 and h < 1e-10,
           f"flatness {f:.1e} ({n} cases), ζ-ODE {z:.1e}, horizontality {h:.1e}")


def test_criterion_12_levelt_and_monodromy(ctx):
    recs, _ = suite("levelt", ctx)
    lv, _ = worst(recs, "levelt")
    t0, _ = worst(recs, "theta_at_zero")
    mo, _ = worst(recs, "monodromy")
    R, _ = worst(recs, "R")
    record(12, lv < 1e-8 and t0 < 1e-6 and mo < 1e-9 and R == 0,
           f"Levelt {lv:.1e}, Θ(0) − I {t0:.1e}, y_v monodromy {mo:.1e}, R invariants {'exact' if R == 0 else 'broken'}")


def test_criterion_13_orthogonality(ctx):
    recs, _ = suite("orthogonality", ctx)
    o, _ = worst(recs, "orthogonality")
    c, _ = worst(recs, "c_relation", "q_tilde")
    record(13, o < 1e-7 and c < 1e-8, f"Gram − η {o:.1e} (A = 6), C relation / Q̃ {c:.1e}")


def test_criterion_14_principal_hierarchy(ctx):
    recs, dt = suite("omega", ctx)
    tc, _ = worst(recs, "theta_coeff")
    om, _ = worst(recs, "omega", "omega_tau")
    record(14, tc < 1e-12 and om < 1e-7, f"θ coefficients vs densities {tc:.1e}, Ω {om:.1e}, {dt:.0f} s")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
