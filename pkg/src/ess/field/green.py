"""Green's function of the disk, the image (conjugate point) decomposition,
and a direct Biot-Savart quadrature used as an independent velocity oracle.

Convention: G(x, y) = (1/2pi) log|x - y| + harmonic, G = 0 on the boundary,
so G < 0 inside and the potential Psi = int G omega satisfies Lap Psi = omega.
The velocity is u = (d2 Psi, -d1 Psi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingularityError, UnsupportedDomainError
from ..geometry import Disk, Domain, conjugate_point
from ..report import CheckResult
from .fields import ScalarField
from .poisson import VelocitySample

TWO_PI = 2.0 * np.pi


@dataclass
class GreenValue:
    g: np.ndarray
    log_direct: np.ndarray
    log_image: np.ndarray
    remainder: np.ndarray | None = None


def _disk_D(R: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """|x - y_hat|^2 |y - c|^2 written symmetrically (finite at y = c)."""
    c = np.array([0.0, R])
    xc = x - c
    yc = y - c
    return (np.sum(xc * xc, -1) * np.sum(yc * yc, -1)
            - 2.0 * R * R * np.sum(xc * yc, -1) + R**4)


def greens_disk_exact(R: float, x, y) -> GreenValue:
    """Dirichlet Green's function of the disk of radius R centred at (0, R)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = np.linalg.norm(x - y, axis=-1)
    if np.any(d == 0.0):
        raise SingularityError("Green's function evaluated at coincident points")
    direct = np.log(d)
    image = 0.5 * np.log(_disk_D(R, x, y)) - np.log(R)
    return GreenValue((direct - image) / TWO_PI, direct / TWO_PI, image / TWO_PI)


def disk_green_gradient_x(R: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient in x of the disk Green's function (rows broadcast)."""
    c = np.array([0.0, R])
    xy = x - y
    r2 = np.sum(xy * xy, -1)[..., None]
    yc = y - c
    num = np.sum(yc * yc, -1)[..., None] * (x - c) - R * R * yc
    return (xy / r2 - num / _disk_D(R, x, y)[..., None]) / TWO_PI


def greens_image(domain: Domain, x, y, **kw) -> GreenValue:
    """(1/2pi)(log|x - y| - log|x - y*|); on the disk the remainder is also filled in."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = np.linalg.norm(x - y, axis=-1)
    if np.any(d == 0.0):
        raise SingularityError("Green's function evaluated at coincident points")
    ys = conjugate_point(domain, y, **kw).y_star
    direct = np.log(d) / TWO_PI
    image = np.log(np.linalg.norm(x - ys, axis=-1)) / TWO_PI
    g = direct - image
    rem = None
    if isinstance(domain, Disk):
        rem = greens_disk_exact(domain.radius, x, y).g - g
    return GreenValue(g, direct, image, rem)


# ---------------------------------------------------------------------------
# exact cell integrals of the free-space kernel

def _atan_ratio(a, b):
    """a * atan(b / a) with the a -> 0 limit."""
    with np.errstate(divide="ignore", invalid="ignore"):
        v = a * np.arctan(b / a)
    return np.where(a == 0.0, 0.0, v)


def _grad_antiderivative(X, Y):
    # d/dX-component antiderivative of X / (X^2 + Y^2) over dX dY
    r2 = X * X + Y * Y
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(r2 > 0, np.log(np.where(r2 > 0, r2, 1.0)), 0.0)
    return 0.5 * Y * lg + _atan_ratio(X, Y)


def _log_antiderivative(X, Y):
    r2 = X * X + Y * Y
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(r2 > 0, np.log(np.where(r2 > 0, r2, 1.0)), 0.0)
    return 0.5 * (X * Y * lg - 3.0 * X * Y + X * _atan_ratio(X, Y) + Y * _atan_ratio(Y, X))


def _rect_sum(F, x, lo1, hi1, lo2, hi2):
    X_hi, X_lo = x[..., 0] - lo1, x[..., 0] - hi1
    Y_hi, Y_lo = x[..., 1] - lo2, x[..., 1] - hi2
    return F(X_hi, Y_hi) - F(X_lo, Y_hi) - F(X_hi, Y_lo) + F(X_lo, Y_lo)


def rect_log_integral(x, lo1, hi1, lo2, hi2):
    """int over the rectangle of log|x - y| dy (exact)."""
    return _rect_sum(_log_antiderivative, x, lo1, hi1, lo2, hi2)


def rect_kernel_gradient(x, lo1, hi1, lo2, hi2):
    """int over the rectangle of (x - y)/|x - y|^2 dy (exact)."""
    g1 = _rect_sum(_grad_antiderivative, x, lo1, hi1, lo2, hi2)
    swap = x[..., ::-1]
    g2 = _rect_sum(_grad_antiderivative, swap, lo2, hi2, lo1, hi1)
    return np.stack([g1, g2], axis=-1)


def velocity_via_green_quadrature(R: float, omega: ScalarField, x, near: int = 2) -> VelocitySample:
    """Biot-Savart velocity on the disk by cell quadrature of the exact kernel gradient.

    Each interior node carries its control cell (clipped by the boundary area
    fraction). Cells within ``near`` index steps of the target use the exact
    rectangle integral of the singular free-space part; the smooth image part
    uses the midpoint rule everywhere.
    """
    grid = omega.grid
    if not isinstance(grid.domain, Disk) or abs(grid.domain.radius - R) > 1e-14:
        raise UnsupportedDomainError("Green quadrature backend is implemented for the disk only")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    idx = grid.unknowns
    I, J = np.unravel_index(idx, grid.shape)
    Y = grid.points[I, J]
    wgt = (grid.area[I, J] * omega.values[I, J])
    frac = grid.area[I, J] / (grid.w1[I] * grid.w2[J])
    keep = wgt != 0
    I, J, Y, wgt, frac = I[keep], J[keep], Y[keep], wgt[keep], frac[keep]
    mid1 = np.concatenate([[grid.x1[0]], 0.5 * (grid.x1[1:] + grid.x1[:-1]), [grid.x1[-1]]])
    mid2 = np.concatenate([[grid.x2[0]], 0.5 * (grid.x2[1:] + grid.x2[:-1]), [grid.x2[-1]]])
    c = np.array([0.0, R])
    out = np.zeros_like(x)
    for k, xk in enumerate(x):
        ix = np.searchsorted(grid.x1, xk[0]) - 1
        jx = np.searchsorted(grid.x2, xk[1]) - 1
        close = (np.abs(I - ix) <= near + 1) & (np.abs(J - jx) <= near + 1)
        xy = xk - Y
        r2 = np.sum(xy * xy, -1)
        yc = Y - c
        D = (np.sum((xk - c) ** 2) * np.sum(yc * yc, -1)
             - 2.0 * R * R * (yc @ (xk - c)) + R**4)
        img = (np.sum(yc * yc, -1)[:, None] * (xk - c) - R * R * yc) / D[:, None]
        far = ~close
        grad = (xy[far] / r2[far, None]).T @ wgt[far]
        grad -= img.T @ wgt
        if close.any():
            ci, cj = I[close], J[close]
            rg = rect_kernel_gradient(xk[None, :], mid1[ci], mid1[ci + 1], mid2[cj], mid2[cj + 1])
            grad += rg.T @ (omega.values[ci, cj] * frac[close])
        grad /= TWO_PI
        out[k] = (grad[1], -grad[0])
    return VelocitySample(out[:, 0], out[:, 1], x)


# ---------------------------------------------------------------------------
# remainder regularity

def _second_differences(F, x0, eta):
    """max |D11|, |D22|, |D12| of F (callable on (N,2)) at x0 with step eta."""
    e1 = np.array([eta, 0.0])
    e2 = np.array([0.0, eta])
    pts = np.array([x0, x0 + e1, x0 - e1, x0 + e2, x0 - e2,
                    x0 + e1 + e2, x0 + e1 - e2, x0 - e1 + e2, x0 - e1 - e2])
    v = F(pts)
    d11 = (v[1] - 2 * v[0] + v[2]) / eta**2
    d22 = (v[3] - 2 * v[0] + v[4]) / eta**2
    d12 = (v[5] - v[6] - v[7] + v[8]) / (4 * eta**2)
    return float(max(abs(d11), abs(d22), abs(d12)))


def remainder_regularity_check(disk: Disk, omega_fn, radii=(0.1, 0.05, 0.025),
                               phi: float = np.pi / 4, h: float = 1.0 / 1024,
                               eta_frac: float = 0.25, max_growth: float = 1.5,
                               min_log_growth: float = 3.0) -> CheckResult:
    """Second differences of int B omega (bounded) against those of the log part.

    cells: uniform squares of side ``h`` whose centres lie in the validity
    disk intersected with the domain (so the conjugate point is defined).
    The log part uses exact per-cell integrals; the remainder B = exact -
    image uses the midpoint rule since it is smooth in x.
    """
    r = disk.validity_radius
    m = int(np.ceil(r / h))
    g1 = (np.arange(-m, m) + 0.5) * h
    g2 = (np.arange(0, m) + 0.5) * h
    C1, C2 = np.meshgrid(g1, g2, indexing="ij")
    Y = np.stack([C1.ravel(), C2.ravel()], -1)
    ok = (np.linalg.norm(Y, axis=-1) <= r) & disk.contains(Y)
    Y = Y[ok]
    w = np.asarray(omega_fn(Y), dtype=float) * h * h
    ystar = conjugate_point(disk, Y).y_star
    R = disk.radius
    lo1, hi1 = Y[:, 0] - h / 2, Y[:, 0] + h / 2
    lo2, hi2 = Y[:, 1] - h / 2, Y[:, 1] + h / 2
    wv = np.asarray(omega_fn(Y), dtype=float)

    def I_B(P):
        out = np.empty(len(P))
        for k, p in enumerate(P):
            d = np.linalg.norm(p - Y, axis=-1)
            exact = (np.log(d) - 0.5 * np.log(_disk_D(R, p[None, :], Y)) + np.log(R))
            image = np.log(d) - np.log(np.linalg.norm(p - ystar, axis=-1))
            out[k] = np.sum((exact - image) * w) / TWO_PI
        return out

    def I_log(P):
        out = np.empty(len(P))
        for k, p in enumerate(P):
            out[k] = np.sum(rect_log_integral(p[None, :], lo1, hi1, lo2, hi2) * wv) / TWO_PI
        return out

    dB, dL = [], []
    for rho in radii:
        x0 = rho * np.array([np.cos(phi), np.sin(phi)])
        eta = eta_frac * rho
        dB.append(_second_differences(I_B, x0, eta))
        dL.append(_second_differences(I_log, x0, eta))
    def growth(d):
        return [d[i + 1] / d[i] if d[i] > 0 else (0.0 if d[i + 1] == 0 else np.inf)
                for i in range(len(d) - 1)]

    gB, gL = growth(dB), growth(dL)
    okB = all(g <= max_growth for g in gB)
    okL = all(g >= min_log_growth for g in gL)
    return CheckResult(
        "remainder_regularity", okB and okL,
        {"radii": list(radii), "d2_remainder": dB, "d2_log": dL,
         "growth_remainder": gB, "growth_log": gL, "remainder_bounded": okB,
         "log_diverges": okL, "cells": int(len(Y)), "h": h},
        f"remainder growth {max(gB):.3f} (<= {max_growth}), log growth {min(gL):.3f} (>= {min_log_growth})")
