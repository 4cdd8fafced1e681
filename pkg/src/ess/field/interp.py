"""Interpolation on (possibly non-uniform) tensor grids.

Bicubic Hermite patches use nodal first and cross derivatives from
three-point central differences, so the interpolant is C^1 and its
gradient is continuous across cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _deriv_weights(x: np.ndarray):
    """Weights (wm, w0, wp) of the 3-point derivative on a non-uniform line."""
    n = len(x)
    wm = np.zeros(n)
    w0 = np.zeros(n)
    wp = np.zeros(n)
    hm = x[1:-1] - x[:-2]
    hp = x[2:] - x[1:-1]
    wm[1:-1] = -hp / (hm * (hm + hp))
    w0[1:-1] = (hp - hm) / (hm * hp)
    wp[1:-1] = hm / (hp * (hm + hp))
    # one-sided first order at the ends (far outside the domain)
    wm[0], w0[0], wp[0] = 0.0, -1.0 / (x[1] - x[0]), 1.0 / (x[1] - x[0])
    wm[-1], w0[-1], wp[-1] = -1.0 / (x[-1] - x[-2]), 1.0 / (x[-1] - x[-2]), 0.0
    return wm, w0, wp


def diff_axis(F: np.ndarray, x: np.ndarray, axis: int) -> np.ndarray:
    wm, w0, wp = _deriv_weights(x)
    F = np.moveaxis(F, axis, 0)
    out = np.empty_like(F)
    sh = (-1,) + (1,) * (F.ndim - 1)
    out[1:-1] = (wm[1:-1].reshape(sh) * F[:-2] + w0[1:-1].reshape(sh) * F[1:-1]
                 + wp[1:-1].reshape(sh) * F[2:])
    out[0] = w0[0] * F[0] + wp[0] * F[1]
    out[-1] = wm[-1] * F[-2] + w0[-1] * F[-1]
    return np.moveaxis(out, 0, axis)


@dataclass
class HermiteData:
    x1: np.ndarray
    x2: np.ndarray
    f: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f12: np.ndarray


def hermite_setup(x1: np.ndarray, x2: np.ndarray, F: np.ndarray) -> HermiteData:
    f1 = diff_axis(F, x1, 0)
    f2 = diff_axis(F, x2, 1)
    f12 = diff_axis(f1, x2, 1)
    return HermiteData(x1, x2, F, f1, f2, f12)


def locate(x: np.ndarray, q: np.ndarray) -> np.ndarray:
    i = np.searchsorted(x, q, side="right") - 1
    return np.clip(i, 0, len(x) - 2)


def _basis(t):
    t2 = t * t
    t3 = t2 * t
    h00 = 2 * t3 - 3 * t2 + 1
    h01 = -2 * t3 + 3 * t2
    h10 = t3 - 2 * t2 + t
    h11 = t3 - t2
    return h00, h01, h10, h11


def _dbasis(t):
    t2 = t * t
    d00 = 6 * t2 - 6 * t
    d01 = -6 * t2 + 6 * t
    d10 = 3 * t2 - 4 * t + 1
    d11 = 3 * t2 - 2 * t
    return d00, d01, d10, d11


def hermite_eval(H: HermiteData, pts: np.ndarray, grad: bool = False):
    """Value (and optionally gradient) of the bicubic Hermite interpolant."""
    pts = np.asarray(pts, dtype=float)
    q1 = pts[..., 0].ravel()
    q2 = pts[..., 1].ravel()
    i = locate(H.x1, q1)
    j = locate(H.x2, q2)
    h1 = H.x1[i + 1] - H.x1[i]
    h2 = H.x2[j + 1] - H.x2[j]
    t = (q1 - H.x1[i]) / h1
    u = (q2 - H.x2[j]) / h2
    a00, a01, a10, a11 = _basis(t)
    b00, b01, b10, b11 = _basis(u)

    def corner(A, di, dj):
        return A[i + di, j + dj]

    # value-basis and derivative-basis per corner index (0 = left/bottom, 1 = right/top)
    A_val = (a00, a01)
    A_der = (a10, a11)
    B_val = (b00, b01)
    B_der = (b10, b11)
    val = np.zeros_like(q1)
    for di in (0, 1):
        for dj in (0, 1):
            val += (corner(H.f, di, dj) * A_val[di] * B_val[dj]
                    + h1 * corner(H.f1, di, dj) * A_der[di] * B_val[dj]
                    + h2 * corner(H.f2, di, dj) * A_val[di] * B_der[dj]
                    + h1 * h2 * corner(H.f12, di, dj) * A_der[di] * B_der[dj])
    shape = pts.shape[:-1]
    if not grad:
        return val.reshape(shape)
    da00, da01, da10, da11 = _dbasis(t)
    db00, db01, db10, db11 = _dbasis(u)
    dA_val = (da00 / h1, da01 / h1)
    dA_der = (da10 / h1, da11 / h1)
    dB_val = (db00 / h2, db01 / h2)
    dB_der = (db10 / h2, db11 / h2)
    g1 = np.zeros_like(q1)
    g2 = np.zeros_like(q1)
    for di in (0, 1):
        for dj in (0, 1):
            f = corner(H.f, di, dj)
            fa = h1 * corner(H.f1, di, dj)
            fb = h2 * corner(H.f2, di, dj)
            fab = h1 * h2 * corner(H.f12, di, dj)
            g1 += (f * dA_val[di] * B_val[dj] + fa * dA_der[di] * B_val[dj]
                   + fb * dA_val[di] * B_der[dj] + fab * dA_der[di] * B_der[dj])
            g2 += (f * A_val[di] * dB_val[dj] + fa * A_der[di] * dB_val[dj]
                   + fb * A_val[di] * dB_der[dj] + fab * A_der[di] * dB_der[dj])
    return val.reshape(shape), g1.reshape(shape), g2.reshape(shape)


def clamped_bicubic(H: HermiteData, pts: np.ndarray) -> np.ndarray:
    """Hermite value clipped to the range of the surrounding 4x4 node values."""
    pts = np.asarray(pts, dtype=float)
    val = hermite_eval(H, pts).ravel()
    q1 = pts[..., 0].ravel()
    q2 = pts[..., 1].ravel()
    i = locate(H.x1, q1)
    j = locate(H.x2, q2)
    n1, n2 = H.f.shape
    lo = np.full_like(val, np.inf)
    hi = np.full_like(val, -np.inf)
    for di in (-1, 0, 1, 2):
        ii = np.clip(i + di, 0, n1 - 1)
        for dj in (-1, 0, 1, 2):
            v = H.f[ii, np.clip(j + dj, 0, n2 - 1)]
            lo = np.minimum(lo, v)
            hi = np.maximum(hi, v)
    return np.clip(val, lo, hi).reshape(pts.shape[:-1])


def bilinear(x1: np.ndarray, x2: np.ndarray, F: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    q1 = pts[..., 0].ravel()
    q2 = pts[..., 1].ravel()
    i = locate(x1, q1)
    j = locate(x2, q2)
    t = np.clip((q1 - x1[i]) / (x1[i + 1] - x1[i]), 0.0, 1.0)
    u = np.clip((q2 - x2[j]) / (x2[j + 1] - x2[j]), 0.0, 1.0)
    val = ((1 - t) * (1 - u) * F[i, j] + t * (1 - u) * F[i + 1, j]
           + (1 - t) * u * F[i, j + 1] + t * u * F[i + 1, j + 1])
    return val.reshape(pts.shape[:-1])
