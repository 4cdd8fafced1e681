"""Adaptive quadrature of the Key Lemma kernel y1 y2 / |y|^4 in log-polar form.

With y = e^tau (cos phi, sin phi) the kernel times the area element is
sin(2 phi)/2 dtau dphi, so the 1/|y|^2 growth near the origin disappears.
A region star-shaped from the origin is described by radial bounds
rho_lo(phi) <= rho <= rho_hi(phi); each phi-band is mapped to the unit
square and refined as a quadtree with tensor Gauss-Legendre rules.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


@dataclass
class QuadResult:
    value: float
    err_estimate: float
    cells: int
    converged: bool = True


CHUNK = 16384  # cells per vectorised evaluation; bounds peak memory


def _gauss_cells(fn, pa, pb, ta, tb):
    """Tensor Gauss-Legendre integral of fn(phi, tau_hat) on each cell."""
    if len(pa) > CHUNK:
        return np.concatenate([_gauss_cells(fn, pa[i:i + CHUNK], pb[i:i + CHUNK],
                                            ta[i:i + CHUNK], tb[i:i + CHUNK])
                               for i in range(0, len(pa), CHUNK)])
    n = len(GL_NODES)
    xp = 0.5 * (GL_NODES + 1.0)
    P = pa[:, None] + (pb - pa)[:, None] * xp[None, :]
    T = ta[:, None] + (tb - ta)[:, None] * xp[None, :]
    PP = np.repeat(P, n, axis=1)
    TT = np.tile(T, (1, n))
    W = np.outer(GL_WEIGHTS, GL_WEIGHTS).ravel() * 0.25
    vals = fn(PP.ravel(), TT.ravel()).reshape(len(pa), n * n)
    return (vals @ W) * (pb - pa) * (tb - ta)


def logpolar_integral(omega: Callable, rho_lo: Callable, rho_hi: Callable,
                      phi_breaks, *, rtol: float = 1e-6, atol: float = 1e-13,
                      max_cells: int = 10**6, init: int = 8) -> QuadResult:
    """Integral of y1 y2 / |y|^4 * omega(y) over {rho_lo(phi) < |y| < rho_hi(phi)}.

    ``phi_breaks`` is an increasing sequence of angles; inside each band the
    bounds must be smooth. ``omega`` maps (N, 2) points to values (or is
    None for the bare kernel).

    Cells are refined while their error exceeds their area share of the
    tolerance, and the loop also stops as soon as the summed error of the
    accepted and pending cells meets the tolerance. The second rule keeps
    piecewise-smooth data (interpolated grid fields) from over-refining
    along kinks whose total contribution is already negligible.
    """
    breaks = np.asarray(phi_breaks, dtype=float)
    if len(breaks) < 2:
        return QuadResult(0.0, 0.0, 0)

    def integrand(phi, th):
        lo = np.log(rho_lo(phi))
        hi = np.log(rho_hi(phi))
        span = np.maximum(hi - lo, 0.0)
        tau = lo + th * span
        jac = 0.5 * np.sin(2.0 * phi) * span
        if omega is None:
            return jac
        r = np.exp(tau)
        pts = np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)
        return jac * np.asarray(omega(pts), dtype=float)

    pa = np.concatenate([np.linspace(a, b, init + 1)[:-1] for a, b in zip(breaks[:-1], breaks[1:])])
    pb = np.concatenate([np.linspace(a, b, init + 1)[1:] for a, b in zip(breaks[:-1], breaks[1:])])
    ta = np.zeros_like(pa)
    tb = np.ones_like(pa)
    coarse = _gauss_cells(integrand, pa, pb, ta, tb)
    total_area = float(np.sum(pb - pa))
    accepted = 0.0
    err_acc = 0.0
    ncells = len(pa)
    converged = True
    while len(pa):
        pm = 0.5 * (pa + pb)
        tm = 0.5 * (ta + tb)
        c_pa = np.concatenate([pa, pm, pa, pm])
        c_pb = np.concatenate([pm, pb, pm, pb])
        c_ta = np.concatenate([ta, ta, tm, tm])
        c_tb = np.concatenate([tm, tm, tb, tb])
        fine_all = _gauss_cells(integrand, c_pa, c_pb, c_ta, c_tb)
        m = len(pa)
        fine = fine_all[:m] + fine_all[m:2 * m] + fine_all[2 * m:3 * m] + fine_all[3 * m:]
        err = np.abs(fine - coarse)
        est = abs(accepted + fine.sum())
        frac = (pb - pa) * (tb - ta) / total_area
        ok = err <= np.maximum(rtol * est, atol) * frac
        ncells += 3 * m
        if err_acc + err.sum() <= max(rtol * est, atol):
            accepted += fine.sum()
            err_acc += err.sum()
            break
        if ncells > max_cells:
            accepted += fine.sum()
            err_acc += err.sum()
            converged = False
            break
        accepted += fine[ok].sum()
        err_acc += err[ok].sum()
        keep = ~ok
        idx = np.concatenate([np.flatnonzero(keep) + k * m for k in range(4)])
        pa, pb, ta, tb = c_pa[idx], c_pb[idx], c_ta[idx], c_tb[idx]
        coarse = fine_all[idx]
    if not converged:
        warnings.warn("log-polar quadrature hit its cell budget", RuntimeWarning, stacklevel=2)
    return QuadResult(float(accepted), float(err_acc), int(ncells), converged)


def feasible_interval(gap: Callable, lo: float, hi: float, n: int = 4001):
    """Subinterval of (lo, hi) where gap(phi) > 0, assumed to be one interval."""
    phi = np.linspace(lo, hi, n)[1:-1]
    g = gap(phi)
    pos = np.flatnonzero(g > 0)
    if not len(pos):
        return None
    i0, i1 = pos[0], pos[-1]
    a = phi[i0 - 1] if i0 > 0 else lo
    b = phi[i1 + 1] if i1 + 1 < len(phi) else hi
    left = brentq(gap, a, phi[i0], xtol=1e-15) if gap(a) < 0 else a
    right = brentq(gap, phi[i1], b, xtol=1e-15) if gap(b) < 0 else b
    return left, right


def box_kernel_integral(lo1: float, hi1: float, lo2: float, hi2: float,
                        omega: Callable | None = None, **kw) -> QuadResult:
    """Kernel integral over an axis-aligned box in the open first quadrant."""
    if not (0 < lo1 < hi1 and 0 < lo2 < hi2):
        raise ValueError("box must lie in the open first quadrant")

    def rlo(p):
        return np.maximum(lo1 / np.cos(p), lo2 / np.sin(p))

    def rhi(p):
        return np.minimum(hi1 / np.cos(p), hi2 / np.sin(p))

    corners = sorted({np.arctan2(lo2, hi1), np.arctan2(lo2, lo1),
                      np.arctan2(hi2, hi1), np.arctan2(hi2, lo1)})
    return logpolar_integral(omega, rlo, rhi, corners, **kw)


def box_kernel_closed_form(lo1: float, hi1: float, lo2: float, hi2: float) -> float:
    """(1/4)[log(y1^2 + lo2^2) - log(y1^2 + hi2^2)] evaluated between lo1 and hi1."""
    def F(y1):
        return 0.25 * (np.log(y1 * y1 + lo2 * lo2) - np.log(y1 * y1 + hi2 * hi2))

    return float(F(hi1) - F(lo1))
