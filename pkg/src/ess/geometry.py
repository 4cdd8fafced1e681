"""Symmetric domains tangent to the x1-axis at the origin.

Near the origin the boundary is the graph ``x2 = f(x1)`` with ``f(0) = f'(0) = 0``
and ``f`` even. The closest-boundary-point map ``e(y)`` is computed by Newton's
method on the orthogonality condition

    F(s, y) = (s - y1) + f'(s) (f(s) - y2) = 0,

and the conjugate point is ``y* = 2 e(y) - y``.

All point arguments are array-like with a trailing axis of length 2; results
keep the leading shape of the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, ParameterError, ProjectionError
from .report import CheckResult

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50


class Point2(NamedTuple):
    x1: float
    x2: float


def _pts(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != 2:
        raise ValueError(f"expected trailing dimension 2, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise DomainError("non-finite point coordinates")
    return y


class Domain:
    """Base class. Subclasses provide the boundary graph and an implicit function."""

    kind = "abstract"

    def __init__(self, validity_radius: float | None = None):
        self._validity_radius = validity_radius

    # -- boundary graph ---------------------------------------------------
    s_max: float

    def _graph(self, s: np.ndarray, order: int) -> list[np.ndarray]:
        raise NotImplementedError

    def implicit(self, y) -> np.ndarray:
        """Level-set function, negative inside, zero on the boundary."""
        raise NotImplementedError

    def bbox(self) -> tuple[float, float, float, float]:
        raise NotImplementedError

    def closest_point(self, y) -> np.ndarray:
        """Globally closest boundary point."""
        raise NotImplementedError

    def ray_exit(self, phi) -> np.ndarray:
        """Distance from the origin to the boundary along direction ``phi``.

        Returns 0 where the ray does not enter the domain.
        """
        raise NotImplementedError

    def vertical_extent(self, x1) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper ``x2`` of the domain on the vertical line at ``x1``."""
        raise NotImplementedError

    # -- derived ------------------------------------------------------------
    @property
    def curvature_radius(self) -> float:
        return 1.0 / float(self._graph(np.array(0.0), 2)[2])

    @property
    def validity_radius(self) -> float:
        if self._validity_radius is not None:
            return float(self._validity_radius)
        return 0.2 * min(self.curvature_radius, self.s_max)

    def signed_distance(self, y) -> np.ndarray:
        y = _pts(y)
        q = self.closest_point(y)
        d = np.linalg.norm(y - q, axis=-1)
        return np.where(self.implicit(y) < 0.0, -d, d)

    def contains(self, y) -> np.ndarray:
        return self.implicit(_pts(y)) < 0.0

    def outward_normal(self, y) -> np.ndarray:
        """Unit gradient of the implicit function (central differences)."""
        y = _pts(y)
        eps = 1e-7 * max(1.0, self.bbox()[3])
        e1 = np.array([eps, 0.0])
        e2 = np.array([0.0, eps])
        g = np.stack(
            [self.implicit(y + e1) - self.implicit(y - e1),
             self.implicit(y + e2) - self.implicit(y - e2)], axis=-1)
        return g / np.linalg.norm(g, axis=-1, keepdims=True)

    def line_crossing(self, p, q) -> np.ndarray:
        """Fraction ``t`` in [0, 1] where ``p + t (q - p)`` meets the boundary.

        Requires ``implicit(p)`` and ``implicit(q)`` to have opposite signs
        (or one of them to vanish). Bisection, 60 halvings.
        """
        p = _pts(p)
        q = _pts(q)
        lo = np.zeros(p.shape[:-1])
        hi = np.ones(p.shape[:-1])
        flo = self.implicit(p)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fm = self.implicit(p + mid[..., None] * (q - p))
            same = np.sign(fm) == np.sign(flo)
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
            flo = np.where(same, fm, flo)
        return 0.5 * (lo + hi)

    def describe(self) -> dict:
        return {"kind": self.kind, "validity_radius": self.validity_radius}


class Disk(Domain):
    """Disk of radius ``R`` centred at ``(0, R)``."""

    kind = "disk"

    def __init__(self, radius: float = 1.0, validity_radius: float | None = None):
        if radius <= 0:
            raise ParameterError("disk radius must be positive")
        super().__init__(validity_radius)
        self.radius = float(radius)
        self.center = np.array([0.0, self.radius])
        self.s_max = self.radius

    def _graph(self, s, order):
        R = self.radius
        w = np.sqrt(R * R - s * s)
        out = [R - w]
        if order >= 1:
            out.append(s / w)
        if order >= 2:
            out.append(R * R / w**3)
        if order >= 3:
            out.append(3.0 * R * R * s / w**5)
        return out

    def implicit(self, y):
        y = _pts(y)
        return np.linalg.norm(y - self.center, axis=-1) - self.radius

    def signed_distance(self, y):
        return self.implicit(y)

    def closest_point(self, y):
        y = _pts(y)
        d = y - self.center
        rho = np.linalg.norm(d, axis=-1, keepdims=True)
        # centre maps to the origin; any boundary point is equally close
        safe = np.where(rho > 0, rho, 1.0)
        dirn = np.where(rho > 0, d / safe, np.array([0.0, -1.0]))
        return self.center + self.radius * dirn

    def ray_exit(self, phi):
        return np.maximum(2.0 * self.radius * np.sin(phi), 0.0)

    def vertical_extent(self, x1):
        R = self.radius
        x1 = np.asarray(x1, dtype=float)
        w = np.sqrt(np.maximum(R * R - x1 * x1, 0.0))
        return R - w, R + w

    def bbox(self):
        return (-self.radius, self.radius, 0.0, 2.0 * self.radius)

    def describe(self):
        return {"kind": self.kind, "radius": self.radius,
                "validity_radius": self.validity_radius}


class Ellipse(Domain):
    """Ellipse with semi-axes ``a`` (along x1) and ``b`` (along x2), centred at ``(0, b)``."""

    kind = "ellipse"

    def __init__(self, a: float = 1.0, b: float = 0.75, validity_radius: float | None = None):
        if a <= 0 or b <= 0:
            raise ParameterError("ellipse semi-axes must be positive")
        super().__init__(validity_radius)
        self.a = float(a)
        self.b = float(b)
        self.center = np.array([0.0, self.b])
        self.s_max = self.a

    def _graph(self, s, order):
        a, b = self.a, self.b
        w = np.sqrt(1.0 - (s / a) ** 2)
        out = [b - b * w]
        if order >= 1:
            out.append(b * s / (a * a * w))
        if order >= 2:
            out.append(b / (a * a * w**3))
        if order >= 3:
            out.append(3.0 * b * s / (a**4 * w**5))
        return out

    def implicit(self, y):
        y = _pts(y)
        u = y[..., 0] / self.a
        v = (y[..., 1] - self.b) / self.b
        # scaled so that the gradient has unit size near the origin
        return 0.5 * self.b * (u * u + v * v - 1.0)

    def closest_point(self, y):
        y = _pts(y)
        a, b = self.a, self.b
        px = np.abs(y[..., 0])
        py = np.abs(y[..., 1] - b)
        tx = np.full(px.shape, math.sqrt(0.5))
        ty = np.full(px.shape, math.sqrt(0.5))
        for _ in range(6):
            x = a * tx
            yy = b * ty
            ex = (a * a - b * b) * tx**3 / a
            ey = (b * b - a * a) * ty**3 / b
            rx, ry = x - ex, yy - ey
            qx, qy = px - ex, py - ey
            r = np.hypot(rx, ry)
            q = np.hypot(qx, qy)
            q = np.where(q > 0, q, 1.0)
            tx = np.clip((qx * r / q + ex) / a, 0.0, 1.0)
            ty = np.clip((qy * r / q + ey) / b, 0.0, 1.0)
            t = np.hypot(tx, ty)
            tx, ty = tx / t, ty / t
        # Newton polish on the parametric angle
        th = np.arctan2(ty, tx)
        for _ in range(4):
            c, s = np.cos(th), np.sin(th)
            gx, gy = a * c - px, b * s - py
            dx, dy = -a * s, b * c
            g = gx * dx + gy * dy
            dg = dx * dx + dy * dy + gx * (-a * c) + gy * (-b * s)
            step = np.where(np.abs(dg) > 0, g / np.where(dg != 0, dg, 1.0), 0.0)
            th = np.clip(th - step, 0.0, 0.5 * math.pi)
        qx = a * np.cos(th) * np.sign(np.where(y[..., 0] == 0, 1.0, y[..., 0]))
        qy = b + b * np.sin(th) * np.sign(np.where(y[..., 1] == b, 1.0, y[..., 1] - b))
        return np.stack([qx, qy], axis=-1)

    def ray_exit(self, phi):
        phi = np.asarray(phi, dtype=float)
        c, s = np.cos(phi), np.sin(phi)
        r = (2.0 * s / self.b) / (c * c / self.a**2 + s * s / self.b**2)
        return np.maximum(r, 0.0)

    def vertical_extent(self, x1):
        x1 = np.asarray(x1, dtype=float)
        w = np.sqrt(np.maximum(1.0 - (x1 / self.a) ** 2, 0.0))
        return self.b - self.b * w, self.b + self.b * w

    def bbox(self):
        return (-self.a, self.a, 0.0, 2.0 * self.b)

    def describe(self):
        return {"kind": self.kind, "a": self.a, "b": self.b,
                "validity_radius": self.validity_radius}


@dataclass
class BoundaryGraph:
    """Near-origin boundary graph with up to three analytic derivatives."""

    f: Callable
    df: Callable
    d2f: Callable
    d3f: Callable
    s_max: float

    def check(self, samples: int = 17) -> None:
        s = np.linspace(-0.9 * self.s_max, 0.9 * self.s_max, samples)
        if abs(float(self.f(0.0))) > 1e-14 or abs(float(self.df(0.0))) > 1e-14:
            raise ParameterError("boundary graph must satisfy f(0) = f'(0) = 0")
        if not np.allclose(self.f(s), self.f(-s), atol=1e-14):
            raise ParameterError("boundary graph must be even")


class GraphDomain(Domain):
    """Custom domain: boundary graph near the origin plus a closed completion.

    The completion is given as an implicit function (negative inside). Only
    the graph enters the conjugate-point computations; signed distance uses
    ``implicit / |grad implicit|`` which is first-order accurate off the
    boundary.
    """

    kind = "custom"

    def __init__(self, graph: BoundaryGraph, implicit: Callable, bbox: tuple,
                 validity_radius: float | None = None):
        graph.check()
        super().__init__(validity_radius)
        self.graph = graph
        self._implicit = implicit
        self._bbox = tuple(float(v) for v in bbox)
        self.s_max = graph.s_max

    def _graph(self, s, order):
        g = self.graph
        fns = [g.f, g.df, g.d2f, g.d3f][: order + 1]
        return [np.asarray(fn(s), dtype=float) for fn in fns]

    def implicit(self, y):
        return np.asarray(self._implicit(_pts(y)), dtype=float)

    def signed_distance(self, y):
        y = _pts(y)
        eps = 1e-7
        g1 = (self.implicit(y + [eps, 0]) - self.implicit(y - [eps, 0])) / (2 * eps)
        g2 = (self.implicit(y + [0, eps]) - self.implicit(y - [0, eps])) / (2 * eps)
        return self.implicit(y) / np.hypot(g1, g2)

    def closest_point(self, y):
        y = _pts(y)
        n = self.outward_normal(y)
        return y - self.signed_distance(y)[..., None] * n

    def ray_exit(self, phi):
        phi = np.asarray(phi, dtype=float)
        direction = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        far = 2.0 * math.hypot(*self._bbox[1::2]) + 1.0
        start = 1e-9 * direction
        inside = self.contains(start + 1e-9 * direction)
        t = self.line_crossing(start, far * direction)
        return np.where(inside, t * far, 0.0)

    def vertical_extent(self, x1):
        x1 = np.asarray(x1, dtype=float)
        lo_pt = np.stack([x1, np.full_like(x1, self._bbox[2] - 1.0)], axis=-1)
        hi_pt = np.stack([x1, np.full_like(x1, self._bbox[3] + 1.0)], axis=-1)
        mid = np.stack([x1, self.graph.f(x1) + 1e-9], axis=-1)
        t_lo = self.line_crossing(lo_pt, mid)
        t_hi = self.line_crossing(mid, hi_pt)
        lo = lo_pt[..., 1] + t_lo * (mid[..., 1] - lo_pt[..., 1])
        hi = mid[..., 1] + t_hi * (hi_pt[..., 1] - mid[..., 1])
        return lo, hi

    def bbox(self):
        return self._bbox


# ---------------------------------------------------------------------------
# boundary graph access and projection
# ---------------------------------------------------------------------------

def boundary_height(domain: Domain, s, order: int = 3):
    """Return ``[f(s), f'(s), ..., f^(order)(s)]`` for the near-origin graph."""
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) >= domain.s_max):
        raise DomainError(f"boundary parameter outside (-{domain.s_max}, {domain.s_max})")
    return domain._graph(s, order)


@dataclass
class Projection:
    s: np.ndarray
    e: np.ndarray
    newton_iters: np.ndarray
    residual: np.ndarray


@dataclass
class ConjugatePoint:
    y_star: np.ndarray
    projection: Projection


def _newton(domain: Domain, y: np.ndarray, s: np.ndarray, s_lim: float,
            tol: float, max_iter: int):
    y1, y2 = y[:, 0], y[:, 1]
    iters = np.zeros(len(s), dtype=int)

    def resid(sv):
        f0, f1 = domain._graph(sv, 1)
        return (sv - y1) + f1 * (f0 - y2)

    F = resid(s)
    active = np.abs(F) > tol
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        sv = s[idx]
        f0, f1, f2 = domain._graph(sv, 2)
        dF = 1.0 + f1 * f1 + f2 * (f0 - y2[idx])
        dF = np.where(np.abs(dF) > 1e-300, dF, 1e-300)
        step = F[idx] / dF
        Fold = np.abs(F[idx])
        lam = np.ones_like(sv)
        for _ in range(30):
            trial = np.clip(sv - lam * step, -s_lim, s_lim)
            f0t, f1t = domain._graph(trial, 1)
            Ft = (trial - y1[idx]) + f1t * (f0t - y2[idx])
            bad = np.abs(Ft) > Fold
            if not bad.any():
                break
            lam = np.where(bad, 0.5 * lam, lam)
        s[idx] = trial
        F[idx] = Ft
        iters[idx] += 1
        active[idx] = np.abs(Ft) > tol
    return s, F, iters, active


def project_to_boundary(domain: Domain, y, *, tol: float = NEWTON_TOL,
                        max_iter: int = NEWTON_MAX_ITER, check: bool = True) -> Projection:
    """Foot point ``e(y) = (s, f(s))`` of ``y`` on the near-origin boundary graph.

    With ``check`` (the default) ``y`` must lie in the closed domain and within
    the validity radius. Internal callers pass ``check=False`` to evaluate the
    map slightly outside, e.g. for finite differences or to re-project ``y*``.
    """
    y = _pts(y)
    shape = y.shape[:-1]
    Y = y.reshape(-1, 2)
    r = domain.validity_radius
    if check:
        if np.any(np.linalg.norm(Y, axis=1) > r * (1 + 1e-12)):
            raise DomainError(f"point outside validity radius r={r}")
        if np.any(domain.implicit(Y) > 1e-14):
            raise DomainError("point outside the domain")
    s_lim = min(2.0 * r, domain.s_max * (1.0 - 1e-12))
    s = np.clip(Y[:, 0].copy(), -s_lim, s_lim)
    s, F, iters, failed = _newton(domain, Y, s, s_lim, tol, max_iter)
    if failed.any():
        # coarse search for a better start, then Newton again
        idx = np.flatnonzero(failed)
        grid = np.linspace(-s_lim, s_lim, 2001)
        f0 = domain._graph(grid, 0)[0]
        d2 = (grid[None, :] - Y[idx, :1]) ** 2 + (f0[None, :] - Y[idx, 1:2]) ** 2
        s0 = grid[np.argmin(d2, axis=1)]
        s2, F2, it2, fail2 = _newton(domain, Y[idx], s0, s_lim, tol, max_iter)
        s[idx], F[idx], iters[idx] = s2, F2, iters[idx] + it2
        if fail2.any():
            raise ProjectionError(
                f"Newton projection failed for {int(fail2.sum())} point(s); "
                f"max |F| = {np.max(np.abs(F2[fail2])):.3e}")
    # polishing step; keeps |F| at round-off level for finite differences
    f0, f1, f2 = domain._graph(s, 2)
    dF = 1.0 + f1 * f1 + f2 * (f0 - Y[:, 1])
    s_pol = s - F / dF
    f0p, f1p = domain._graph(np.clip(s_pol, -s_lim, s_lim), 1)
    F_pol = (s_pol - Y[:, 0]) + f1p * (f0p - Y[:, 1])
    better = np.abs(F_pol) < np.abs(F)
    s = np.where(better, s_pol, s)
    F = np.where(better, F_pol, F)
    if np.any(np.abs(s) >= 2.0 * r):
        raise ProjectionError("projection parameter left the interval (-2r, 2r)")
    f0 = domain._graph(s, 0)[0]
    e = np.stack([s, f0], axis=-1)
    return Projection(s=s.reshape(shape), e=e.reshape(shape + (2,)),
                      newton_iters=iters.reshape(shape), residual=np.abs(F).reshape(shape))


def conjugate_point(domain: Domain, y, *, check: bool = True, **kw) -> ConjugatePoint:
    """Mirror image ``y* = 2 e(y) - y`` of ``y`` across the boundary."""
    y = _pts(y)
    proj = project_to_boundary(domain, y, check=check, **kw)
    return ConjugatePoint(y_star=2.0 * proj.e - y, projection=proj)


def conjugate_jacobian(domain: Domain, s0) -> np.ndarray:
    """Jacobian of ``y -> y*`` at the boundary point ``(s0, f(s0))``.

    It is the reflection across the tangent line: symmetric, orthogonal,
    determinant -1.
    """
    s0 = np.asarray(s0, dtype=float)
    if np.any(np.abs(s0) > 2.0 * domain.validity_radius * (1 + 1e-12)):
        raise DomainError("s0 outside [-2r, 2r]")
    _, fp = boundary_height(domain, s0, 1)
    den = 1.0 + fp * fp
    a = (1.0 - fp * fp) / den
    c = 2.0 * fp / den
    return np.stack([np.stack([a, c], -1), np.stack([c, -a], -1)], -2)


def contains(domain: Domain, y) -> np.ndarray:
    return domain.contains(y)


def signed_distance(domain: Domain, y) -> np.ndarray:
    return domain.signed_distance(y)


def disk_projection_closed_form(disk: Disk, y) -> np.ndarray:
    """Foot point on a disk: ``c + R (y - c) / |y - c|``."""
    return disk.closest_point(y)


# ---------------------------------------------------------------------------
# self-tests
# ---------------------------------------------------------------------------

def sample_validity_region(domain: Domain, n: int, rng: np.random.Generator,
                           radius: float | None = None) -> np.ndarray:
    """Uniform samples of ``Omega ∩ B_r(0)`` by rejection."""
    r = domain.validity_radius if radius is None else radius
    out = []
    count = 0
    while count < n:
        m = max(4 * (n - count), 64)
        rad = r * np.sqrt(rng.random(m))
        ang = 2.0 * math.pi * rng.random(m)
        pts = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=-1)
        pts = pts[domain.contains(pts)]
        out.append(pts)
        count += len(pts)
    return np.concatenate(out)[:n]


def check_projection_residual(domain: Domain, samples: np.ndarray,
                              tol: float = NEWTON_TOL) -> CheckResult:
    proj = project_to_boundary(domain, samples)
    worst = float(np.max(proj.residual))
    return CheckResult("projection_residual", worst <= tol,
                       {"max_residual": worst, "max_iters": int(np.max(proj.newton_iters)),
                        "samples": len(samples)})


def check_jacobian_fd(domain: Domain, n: int = 41, h: float = 1e-5,
                      rtol: float = 1e-5) -> CheckResult:
    """Central differences of ``y*`` at boundary points vs the reflection matrix."""
    r = domain.validity_radius
    s0 = np.linspace(-r, r, n)
    f0 = boundary_height(domain, s0, 0)[0]
    base = np.stack([s0, f0], axis=-1)
    J = conjugate_jacobian(domain, s0)
    fd = np.empty_like(J)
    for k in range(2):
        step = np.zeros(2)
        step[k] = h
        plus = conjugate_point(domain, base + step, check=False).y_star
        minus = conjugate_point(domain, base - step, check=False).y_star
        fd[:, :, k] = (plus - minus) / (2 * h)
    rel = np.linalg.norm(fd - J, axis=(1, 2)) / np.linalg.norm(J, axis=(1, 2))
    det = np.linalg.det(J)
    worst = float(np.max(rel))
    return CheckResult("jacobian_fd", worst <= rtol,
                       {"max_rel_error": worst, "max_det_defect": float(np.max(np.abs(det + 1))),
                        "h": h})


def check_exteriority(domain: Domain, samples: np.ndarray, tol: float = 1e-12) -> CheckResult:
    ys = conjugate_point(domain, samples).y_star
    sd = domain.signed_distance(ys)
    worst = float(np.min(sd))
    return CheckResult("exteriority", worst >= -tol,
                       {"min_signed_distance": worst, "samples": len(samples)})


def check_involution(domain: Domain, n_base: int = 33, levels: int = 12,
                     min_exponent: float = 1.9) -> CheckResult:
    """``y** = y`` near the boundary, at least to second order in ``|y - e(y)|``.

    Points are placed along inner normals at dyadic distances. The foot point
    of ``y*`` coincides with that of ``y`` whenever the root of ``F`` is
    unique, so the defect is normally at round-off level; a fitted exponent
    is only used if it is not.
    """
    r = domain.validity_radius
    metrics: dict = {"validity_radius": r}
    if 2.0 * r >= domain.s_max:
        metrics["reason"] = "interval (-2r, 2r) exceeds the boundary graph"
        return CheckResult("involution", False, metrics, metrics["reason"])
    s0 = np.linspace(-0.9 * r, 0.9 * r, n_base)
    f0, f1 = boundary_height(domain, s0, 1)
    normal_in = np.stack([-f1, np.ones_like(f1)], axis=-1) / np.sqrt(1 + f1 * f1)[:, None]
    base = np.stack([s0, f0], axis=-1)
    dists = r * 0.5 ** np.arange(1, levels + 1)
    errs = []
    try:
        for d in dists:
            y = base + d * normal_in
            keep = (np.linalg.norm(y, axis=1) <= r) & domain.contains(y)
            y = y[keep]
            ys = conjugate_point(domain, y).y_star
            yss = conjugate_point(domain, ys, check=False).y_star
            errs.append(float(np.max(np.linalg.norm(yss - y, axis=1))))
        y = sample_validity_region(domain, 2000, np.random.default_rng(7))
        ys = conjugate_point(domain, y).y_star
        yss = conjugate_point(domain, ys, check=False).y_star
        bulk = float(np.max(np.linalg.norm(yss - y, axis=1)))
    except (ProjectionError, DomainError) as exc:
        metrics["reason"] = f"projection failed: {exc}"
        return CheckResult("involution", False, metrics, metrics["reason"])
    errs = np.asarray(errs)
    metrics.update({"max_defect": float(max(errs.max(), bulk)), "defects": errs,
                    "distances": dists})
    floor = 1e-12 * max(1.0, r)
    if errs.max() <= floor and bulk <= floor:
        metrics["exponent"] = math.inf
        return CheckResult("involution", True, metrics, "exact to round-off")
    use = errs > floor
    if use.sum() < 2:
        metrics["exponent"] = math.nan
        return CheckResult("involution", False, metrics, "defect not resolvable")
    slope = np.polyfit(np.log(dists[use]), np.log(errs[use]), 1)[0]
    metrics["exponent"] = float(slope)
    ok = slope >= min_exponent and bulk <= 1e-6
    return CheckResult("involution", bool(ok), metrics)


def check_disk_oracle(disk: Disk, samples: np.ndarray, tol: float = 1e-9) -> CheckResult:
    cp = conjugate_point(disk, samples)
    e_exact = disk_projection_closed_form(disk, samples)
    ys_exact = 2.0 * e_exact - samples
    err = float(np.max(np.linalg.norm(cp.y_star - ys_exact, axis=1)))
    rho = np.linalg.norm(samples - disk.center, axis=1)
    ident = float(np.max(np.abs(np.linalg.norm(cp.y_star - disk.center, axis=1)
                                - (2 * disk.radius - rho))))
    return CheckResult("disk_oracle", err <= tol and ident <= 1e-10,
                       {"max_error": err, "radius_identity_defect": ident})
