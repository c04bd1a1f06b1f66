"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature.  The active
implementation is chosen once at import time:

    TODA_NO_NUMBA=1   force the numpy versions
    (unset)           use numba if it imports, numpy otherwise

Both families are always importable as ``NUMBA_KERNELS`` / ``NUMPY_KERNELS``
so tests and benchmarks can compare them directly.
"""
import os

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("TODA_NO_NUMBA", "") in ("", "0")

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------- numpy twins

def phase_increment_np(vals):
    """Total change of arg along the closed polyline through ``vals``, and the
    largest single step (in radians)."""
    steps = np.angle(np.roll(vals, -1) / vals)
    return steps.sum(), np.abs(steps).max()


def segment_scan_np(xs, ys):
    """Count proper crossings between non-adjacent edges of a closed polygon
    and return the smallest distance between non-adjacent vertices."""
    n = xs.shape[0]
    x2 = np.roll(xs, -1)
    y2 = np.roll(ys, -1)
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]

    def orient(ax, ay, bx, by, cx, cy):
        return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)

    d1 = orient(xs[i], ys[i], x2[i], y2[i], xs[j], ys[j])
    d2 = orient(xs[i], ys[i], x2[i], y2[i], x2[j], y2[j])
    d3 = orient(xs[j], ys[j], x2[j], y2[j], xs[i], ys[i])
    d4 = orient(xs[j], ys[j], x2[j], y2[j], x2[i], y2[i])
    crossings = int(np.count_nonzero((d1 * d2 < 0) & (d3 * d4 < 0)))
    dist = np.hypot(xs[i] - xs[j], ys[i] - ys[j])
    return crossings, dist.min()


def cauchy_boundary_np(w, g, dg, dw):
    """Boundary value from inside of (1/2πi)∮ g(s)/(s−w) ds minus g(w).

    ``w``, ``g`` are samples on a closed curve at equispaced parameter values,
    ``dw`` = dw/dθ and ``dg`` = dg/dw at the same points.  The singular
    diagonal is removed by subtracting g(w_j); the removable value is dg.
    """
    n = w.shape[0]
    h = TWO_PI / n
    diff = w[None, :] - w[:, None]
    np.fill_diagonal(diff, 1.0)
    num = g[None, :] - g[:, None]
    kern = num / diff
    kern[np.diag_indices(n)] = dg
    return (kern * dw[None, :]).sum(axis=1) * h / (2j * np.pi)


def ein_series_np(x, rtol=1e-18):
    """Ein(x) = −Σ_{n≥1} (−x)^n/(n!·n), elementwise power series."""
    x = np.asarray(x, dtype=complex)
    term = np.ones_like(x)
    total = np.zeros_like(x)
    active = np.ones(x.shape, dtype=bool)
    n = 1
    while active.any() and n < 400:
        term = term * (-x) / n
        add = -term / n
        total = total + np.where(active, add, 0)
        active &= np.abs(add) > rtol * np.maximum(np.abs(total), 1e-300)
        n += 1
    return total


def stride2_series_np(s, zeta, m, rtol=1e-18):
    """Σ_{n≥0} ζ^{2n} s^{2n+m} / (2n+m)!, elementwise in ``s``."""
    s = np.asarray(s, dtype=complex)
    term = s ** m / _fact(m)
    total = term.copy()
    z2s2 = (zeta * s) ** 2
    active = np.ones(s.shape, dtype=bool)
    k = m
    for _ in range(400):
        term = term * z2s2 / ((k + 1) * (k + 2))
        k += 2
        total = total + np.where(active, term, 0)
        active &= np.abs(term) > rtol * np.maximum(np.abs(total), 1e-300)
        if not active.any():
            break
    return total


def _fact(m):
    out = 1.0
    for i in range(2, m + 1):
        out *= i
    return out


# ---------------------------------------------------------------- numba twins

if HAVE_NUMBA:

    @njit(cache=True)
    def phase_increment_nb(vals):
        n = vals.shape[0]
        total = 0.0
        big = 0.0
        for j in range(n):
            r = vals[(j + 1) % n] / vals[j]
            a = np.arctan2(r.imag, r.real)
            total += a
            if abs(a) > big:
                big = abs(a)
        return total, big

    @njit(cache=True)
    def segment_scan_nb(xs, ys):
        n = xs.shape[0]
        crossings = 0
        best = np.inf
        for i in range(n):
            ax, ay = xs[i], ys[i]
            bx, by = xs[(i + 1) % n], ys[(i + 1) % n]
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                cx, cy = xs[j], ys[j]
                dx, dy = xs[(j + 1) % n], ys[(j + 1) % n]
                d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
                d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
                d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
                d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
                if d1 * d2 < 0 and d3 * d4 < 0:
                    crossings += 1
                dd = np.hypot(ax - cx, ay - cy)
                if dd < best:
                    best = dd
        return crossings, best

    @njit(cache=True)
    def cauchy_boundary_nb(w, g, dg, dw):
        n = w.shape[0]
        h = TWO_PI / n
        out = np.empty(n, dtype=np.complex128)
        for j in range(n):
            acc = 0j
            for k in range(n):
                if k == j:
                    acc += dg[j] * dw[j]
                else:
                    acc += (g[k] - g[j]) / (w[k] - w[j]) * dw[k]
            out[j] = acc * h / (2j * np.pi)
        return out

    @njit(cache=True)
    def _ein_flat(x, rtol):
        out = np.empty(x.shape[0], dtype=np.complex128)
        for i in range(x.shape[0]):
            term = 1.0 + 0j
            total = 0j
            for n in range(1, 400):
                term = term * (-x[i]) / n
                add = -term / n
                total += add
                if abs(add) <= rtol * max(abs(total), 1e-300):
                    break
            out[i] = total
        return out

    def ein_series_nb(x, rtol=1e-18):
        x = np.asarray(x, dtype=np.complex128)
        return _ein_flat(x.ravel(), rtol).reshape(x.shape)

    @njit(cache=True)
    def _stride2_flat(s, zeta, m, rtol):
        out = np.empty(s.shape[0], dtype=np.complex128)
        fm = 1.0
        for i in range(2, m + 1):
            fm *= i
        for i in range(s.shape[0]):
            term = s[i] ** m / fm
            total = term
            z2s2 = (zeta * s[i]) ** 2
            k = m
            for _ in range(400):
                term = term * z2s2 / ((k + 1) * (k + 2))
                k += 2
                total += term
                if abs(term) <= rtol * max(abs(total), 1e-300):
                    break
            out[i] = total
        return out

    def stride2_series_nb(s, zeta, m, rtol=1e-18):
        s = np.asarray(s, dtype=np.complex128)
        return _stride2_flat(s.ravel(), complex(zeta), int(m), rtol).reshape(s.shape)


NUMPY_KERNELS = {
    "phase_increment": phase_increment_np,
    "segment_scan": segment_scan_np,
    "cauchy_boundary": cauchy_boundary_np,
    "ein_series": ein_series_np,
    "stride2_series": stride2_series_np,
}

if HAVE_NUMBA:
    NUMBA_KERNELS = {
        "phase_increment": phase_increment_nb,
        "segment_scan": segment_scan_nb,
        "cauchy_boundary": cauchy_boundary_nb,
        "ein_series": ein_series_nb,
        "stride2_series": stride2_series_nb,
    }
else:  # pragma: no cover
    NUMBA_KERNELS = dict(NUMPY_KERNELS)

_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS

phase_increment = _ACTIVE["phase_increment"]
segment_scan = _ACTIVE["segment_scan"]
cauchy_boundary = _ACTIVE["cauchy_boundary"]
ein_series = _ACTIVE["ein_series"]
stride2_series = _ACTIVE["stride2_series"]


def backend():
    return "numba" if USE_NUMBA else "numpy"
