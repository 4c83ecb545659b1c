"""Quadrature helpers shared by the bound and intensity modules.

All routines are deterministic, pure, and vectorised over numpy arrays.
They favour dyadic panel subdivision with fixed Gauss-Legendre rules so
that results are independent of evaluation order.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "integrate_panels",
    "integrate_interval",
    "integrate_halfline",
    "integrate_box_dyadic",
    "integrate_rect",
    "QuadratureError",
]


class QuadratureError(RuntimeError):
    """Raised when an integral fails to meet its error target."""


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def integrate_panels(f, edges, order=20):
    """Integrate ``f`` over consecutive panels given by ``edges`` (1-D array).

    Returns (value, err_estimate) where the error estimate is the summed
    absolute difference against a rule of twice the order.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    x1, w1 = _gl(order)
    x2, w2 = _gl(2 * order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    # evaluation grids: (panel, node)
    y1 = f(mid[:, None] + half[:, None] * x1[None, :])
    y2 = f(mid[:, None] + half[:, None] * x2[None, :])
    v1 = half * (y1 @ w1)
    v2 = half * (y2 @ w2)
    return float(np.sum(v2)), float(np.sum(np.abs(v2 - v1)))


def integrate_interval(f, a, b, order=20, max_splits=14, rtol=1e-10):
    """Adaptive dyadic integration of ``f`` on the finite interval [a, b].

    Panels are split dyadically until the coarse/fine Gauss estimates agree
    to ``rtol`` relative (or an absolute floor for tiny integrals).
    """
    if b <= a:
        return 0.0, 0.0
    n = 8
    prev = None
    for _ in range(max_splits):
        edges = np.linspace(a, b, n + 1)
        val, err = integrate_panels(f, edges, order=order)
        scale = max(abs(val), 1e-300)
        if err <= rtol * scale + 1e-15:
            return val, err
        prev = (val, err)
        n *= 2
    return prev if prev is not None else (0.0, 0.0)


def integrate_halfline(f, a, window=40.0, order=20, tail_tol=1e-14, max_windows=60):
    """Integrate ``f`` on [a, oo) by geometrically growing windows.

    The first window has width ``window``; subsequent windows double in
    width.  Stops once a window contributes less than ``tail_tol`` times
    the accumulated value (plus an absolute floor), which captures both
    exponentially and polynomially (x^-2 or faster) decaying integrands.
    """
    total = 0.0
    err = 0.0
    lo = a
    width = window
    for _ in range(max_windows):
        hi = lo + width
        v, e = integrate_interval(f, lo, hi, order=order)
        total += v
        err += e
        if abs(v) <= tail_tol * max(abs(total), 1.0) + 1e-300:
            return total, err
        lo = hi
        width *= 2.0
    raise QuadratureError("half-line integral did not converge; tail mass unaccounted")


def integrate_box_dyadic(f, s, t, levels=48, order=16):
    """Integrate ``f(x, y)`` over (0, s] x (0, t] with a corner singularity at 0.

    The box is cut into a dyadic grid refined toward the origin in both
    coordinates; each cell gets a tensor Gauss rule.  The neglected corner
    strip has both sides <= s*2^-levels, t*2^-levels; for the intensities
    handled here its mass is bounded by min(side lengths), i.e. ~1e-14
    relative at the default depth.
    """
    x, w = _gl(order)
    # dyadic edges, ascending
    ex = s * np.concatenate(([0.0], 2.0 ** np.arange(-levels, 1, dtype=float)))
    ey = t * np.concatenate(([0.0], 2.0 ** np.arange(-levels, 1, dtype=float)))
    ex[0] = s * 2.0 ** (-levels)  # drop the corner sliver
    ey[0] = t * 2.0 ** (-levels)
    ax, bx = ex[:-1], ex[1:]
    ay, by = ey[:-1], ey[1:]
    mx, hx = 0.5 * (ax + bx), 0.5 * (bx - ax)
    my, hy = 0.5 * (ay + by), 0.5 * (by - ay)
    # nodes per cell row/column: (cell, node)
    nx = mx[:, None] + hx[:, None] * x[None, :]
    ny = my[:, None] + hy[:, None] * x[None, :]
    total = 0.0
    ww = np.outer(w, w)
    for j in range(len(ay)):
        vals = f(nx[:, :, None], ny[j][None, None, :])
        cell = np.einsum("ab,iab->i", ww, vals)
        total += float(np.sum(cell * hx * hy[j]))
    return total


def integrate_rect(f, x0, x1, y0, y1, nx=64, ny=64, order=12):
    """Tensor Gauss integration of ``f(x, y)`` over [x0,x1] x [y0,y1].

    Uses an (nx x ny) uniform panel grid; returns (value, err) with the
    error from comparing against half the panel count.
    """
    def run(mx, my):
        x, w = _gl(order)
        exg = np.linspace(x0, x1, mx + 1)
        eyg = np.linspace(y0, y1, my + 1)
        axx, bxx = exg[:-1], exg[1:]
        ayy, byy = eyg[:-1], eyg[1:]
        gx = (0.5 * (axx + bxx))[:, None] + (0.5 * (bxx - axx))[:, None] * x[None, :]
        gy = (0.5 * (ayy + byy))[:, None] + (0.5 * (byy - ayy))[:, None] * x[None, :]
        wx = (0.5 * (bxx - axx))[:, None] * w[None, :]
        wy = (0.5 * (byy - ayy))[:, None] * w[None, :]
        gxf, wxf = gx.ravel(), wx.ravel()
        gyf, wyf = gy.ravel(), wy.ravel()
        vals = f(gxf[:, None], gyf[None, :])
        return float(wxf @ vals @ wyf)

    coarse = run(max(nx // 2, 1), max(ny // 2, 1))
    fine = run(nx, ny)
    return fine, abs(fine - coarse)
