"""Key integral over the quadrant region Q(x1, x2) and the bounded residuals.

The velocity near the boundary origin splits as

    u1(x) = -x1 * Lambda(x) + x1 * B1(x),    u2(x) = x2 * Lambda(x) + x2 * B2(x)

with Lambda = (4/pi) int_Q y1 y2 / |y|^4 omega(y) dy carrying the log
divergence. The functions here measure B1 and B2 from a velocity backend.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .csvio import write_columns
from .errors import ParameterError
from .geometry import Domain, boundary_height
from .quadrature import feasible_interval, logpolar_integral

FOUR_OVER_PI = 4.0 / math.pi
DEFAULT_GAMMA = math.pi / 4
DEFAULT_SECTOR_DELTA = 2.0**-4


@dataclass(frozen=True)
class SectorSpec:
    gamma: float = DEFAULT_GAMMA
    delta: float = DEFAULT_SECTOR_DELTA

    def __post_init__(self):
        if not 0 < self.gamma < math.pi / 2:
            raise ParameterError("sector angle gamma must lie in (0, pi/2)")
        if self.delta <= 0:
            raise ParameterError("sector radius must be positive")

    def contains(self, x: np.ndarray, which: int) -> np.ndarray:
        x = np.atleast_2d(x)
        phi = np.arctan2(x[:, 1], x[:, 0])
        r = np.hypot(x[:, 0], x[:, 1])
        if which == 1:
            ang = (phi >= -math.pi / 2) & (phi <= math.pi / 2 - self.gamma + 1e-12)
        else:
            ang = (phi >= self.gamma - 1e-12) & (phi <= math.pi / 2)
        return ang & (r <= self.delta * (1 + 1e-12)) & (x[:, 0] > 0)


@dataclass(frozen=True)
class QuadrantRegion:
    x1: float
    x2: float

    def __post_init__(self):
        if not self.x1 > 0:
            raise ParameterError("quadrant corner needs x1 > 0")


@dataclass
class KeyIntegralResult:
    lam: float
    err_estimate: float
    cells: int
    converged: bool = True


def key_integral(omega: Callable | None, corner: QuadrantRegion, domain: Domain | None = None,
                 *, rtol: float = 1e-6, max_cells: int = 10**6) -> KeyIntegralResult:
    """Lambda(x1, x2) = (4/pi) int_Q y1 y2/|y|^4 omega(y) dy.

    ``omega`` is any callable on (N, 2) points (a ScalarField interpolates).
    ``None`` stands for omega = 1, which measures the bare kernel integral.
    """
    if not isinstance(corner, QuadrantRegion):
        corner = QuadrantRegion(*corner)
    domain = domain if domain is not None else getattr(getattr(omega, "grid", None), "domain", None)
    if domain is None:
        raise ParameterError("key_integral needs a domain")
    x1, x2 = corner.x1, corner.x2

    def rlo(p):
        lo = x1 / np.cos(p)
        if x2 > 0:
            lo = np.maximum(lo, x2 / np.sin(p))
        return lo

    def rhi(p):
        return domain.ray_exit(p)

    def gap(p):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.maximum(rhi(p), 1e-300)) - np.log(rlo(p))

    iv = feasible_interval(gap, 0.0, math.pi / 2)
    if iv is None:
        return KeyIntegralResult(0.0, 0.0, 0)
    breaks = [iv[0], iv[1]]
    if x2 > 0:
        pc = math.atan2(x2, x1)
        if iv[0] < pc < iv[1]:
            breaks = [iv[0], pc, iv[1]]
    res = logpolar_integral(omega, rlo, rhi, breaks, rtol=rtol, max_cells=max_cells)
    return KeyIntegralResult(FOUR_OVER_PI * res.value, FOUR_OVER_PI * res.err_estimate,
                             res.cells, res.converged)


def lambda_many(omega, points, domain=None, threads: int = 1, **kw) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))

    def one(p):
        return key_integral(omega, QuadrantRegion(float(p[0]), float(p[1])), domain, **kw).lam

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return np.array(list(ex.map(one, pts)))
    return np.array([one(p) for p in pts])


# ---------------------------------------------------------------------------
# residuals

def ray_samples(domain: Domain, phi: float, radii) -> np.ndarray:
    """Points at distance r from the origin along ``phi`` inside the closed domain.

    Where r (cos phi, sin phi) falls outside (always the case for phi = 0),
    the boundary point (s, f(s)) with |(s, f(s))| = r is used instead.
    """
    radii = np.asarray(radii, dtype=float)
    out = np.stack([radii * math.cos(phi), radii * math.sin(phi)], axis=-1)
    bad = domain.signed_distance(out) > 0
    for k in np.flatnonzero(bad):
        r = radii[k]

        def g(s):
            return s * s + float(boundary_height(domain, s, order=0)[0]) ** 2 - r * r

        s = brentq(g, 0.0, r, xtol=1e-15, rtol=1e-15)
        out[k] = (s, float(boundary_height(domain, s, order=0)[0]))
    return out


@dataclass
class ResidualReport:
    kind: str  # "b1" or "b2"
    x: np.ndarray
    u_over: np.ndarray
    lam: np.ndarray
    b: np.ndarray
    rejected: list = field(default_factory=list)

    @property
    def radius(self) -> np.ndarray:
        return np.hypot(self.x[:, 0], self.x[:, 1])

    def stats(self) -> dict:
        if not len(self.b):
            return {"n": 0}
        ab = np.abs(self.b)
        r = self.radius
        order = np.argsort(-r)  # largest radius first
        uo = np.abs(self.u_over[order])
        slope = float(np.polyfit(np.log(1 / r), self.u_over, 1)[0]) if len(r) > 1 else 0.0
        med = float(np.median(ab))
        return {
            "n": int(len(ab)),
            "max_abs": float(ab.max()),
            "median_abs": med,
            "abs_at_largest_radius": float(ab[order[0]]),
            "band_ratio": float(ab.max() / med) if med > 0 else (0.0 if ab.max() == 0 else math.inf),
            "slope_vs_log_inv_r": slope,
            "growth_ratio": float(uo[-1] / uo[0]) if uo[0] > 0 else 0.0,
        }

    def rows(self):
        col = "u1_over_x1" if self.kind == "b1" else "u2_over_x2"
        return {"x1": self.x[:, 0], "x2": self.x[:, 1], "radius": self.radius,
                col: self.u_over, "lambda": self.lam, self.kind: self.b}

    def to_csv(self, path):
        return write_columns(path, self.rows())


def _residual(kind, domain, omega, sector, xs, velocity, threads, **kw):
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    which = 1 if kind == "b1" else 2
    inside = sector.contains(xs, which) & (domain.signed_distance(xs) <= 1e-12)
    rejected = [tuple(map(float, p)) for p in xs[~inside]]
    X = xs[inside]
    if velocity is None:
        from .field import solve_stream
        velocity = solve_stream(omega).velocity
    u = np.asarray(velocity(X)).reshape(-1, 2)
    lam = lambda_many(omega, X, domain, threads, **kw)
    if kind == "b1":
        u_over = u[:, 0] / X[:, 0]
        b = u_over + lam
    else:
        u_over = u[:, 1] / X[:, 1]
        b = u_over - lam
    return ResidualReport(kind, X, u_over, lam, b, rejected)


def residual_b1(domain: Domain, omega, sector: SectorSpec, xs, velocity: Callable | None = None,
                threads: int = 1, **kw) -> ResidualReport:
    """b1 = u1/x1 + Lambda at samples in the sector D1 (phi <= pi/2 - gamma)."""
    return _residual("b1", domain, omega, sector, xs, velocity, threads, **kw)


def residual_b2(domain: Domain, omega, sector: SectorSpec, xs, velocity: Callable | None = None,
                threads: int = 1, **kw) -> ResidualReport:
    """b2 = u2/x2 - Lambda at samples in the sector D2 (phi >= gamma)."""
    return _residual("b2", domain, omega, sector, xs, velocity, threads, **kw)


@dataclass
class OutflowReport:
    x: np.ndarray
    u: np.ndarray
    lam: np.ndarray
    ratio: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    band: float
    degenerate: bool

    @property
    def outflow(self) -> bool:
        return bool(not self.degenerate and np.all(self.u[:, 0] < 0) and np.all(self.u[:, 1] > 0))

    @property
    def in_interval(self) -> np.ndarray:
        return (self.ratio >= self.lo) & (self.ratio <= self.hi)

    def summary(self) -> dict:
        width = self.hi - self.lo
        return {
            "n": int(len(self.ratio)),
            "degenerate": self.degenerate,
            "outflow": self.outflow,
            "band": self.band,
            "all_in_interval": bool(np.all(self.in_interval)),
            "max_ratio_dev": float(np.max(np.abs(self.ratio - 1))) if len(self.ratio) else 0.0,
            "interval_tightens": bool(np.all(np.diff(width[np.isfinite(width)]) <= 1e-12)),
        }

    def to_csv(self, path):
        return write_columns(path, {
            "x1": self.x[:, 0], "x2": self.x[:, 1], "radius": np.hypot(self.x[:, 0], self.x[:, 1]),
            "u1": self.u[:, 0], "u2": self.u[:, 1], "lambda": self.lam,
            "ratio": self.ratio, "lower": self.lo, "upper": self.hi})


def diagonal_outflow_check(domain: Domain, omega, delta: float, velocity: Callable | None = None,
                           band: float | None = None, levels: int = 8, threads: int = 1,
                           **kw) -> OutflowReport:
    """-u1/u2 on the diagonal against (Lambda - C)/(Lambda + C) .. (Lambda + C)/(Lambda - C).

    Samples sit at |x| = delta 2^-k, k = 1..levels. ``band`` is the residual
    bound C (e.g. the larger measured max|b1|, max|b2| from the sector rays);
    when omitted it is measured on the diagonal itself.
    """
    radii = delta * 2.0 ** -np.arange(1, levels + 1)
    s = radii / math.sqrt(2.0)
    X = np.stack([s, s], -1)
    if velocity is None:
        from .field import solve_stream
        velocity = solve_stream(omega).velocity
    u = np.asarray(velocity(X)).reshape(-1, 2)
    lam = lambda_many(omega, X, domain, threads, **kw)
    degenerate = bool(np.all(u == 0) and np.all(lam == 0))
    if band is None:
        b1 = u[:, 0] / X[:, 0] + lam
        b2 = u[:, 1] / X[:, 1] - lam
        band = float(max(np.abs(b1).max(), np.abs(b2).max()))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(u[:, 1] != 0, -u[:, 0] / u[:, 1], np.nan)
        lo = (lam - band) / (lam + band)
        hi = np.where(lam > band, (lam + band) / (lam - band), np.inf)
    return OutflowReport(X, u, lam, ratio, lo, hi, float(band), degenerate)


@dataclass
class LambdaScaling:
    deltas: np.ndarray
    lam: np.ndarray
    corner: tuple
    slope: float
    intercept: float
    r2: float

    @property
    def passed(self) -> bool:
        return self.r2 >= 0.99 and self.slope > 0

    def to_csv(self, path):
        return write_columns(path, {"delta": self.deltas, "log_inv_delta": np.log(1 / self.deltas),
                                    "lambda": self.lam})


def lambda_scaling(domain: Domain, deltas=(1e-2, 1e-3, 1e-4), corner=(1e-6, 1e-6),
                   omega_factory: Callable | None = None, **kw) -> LambdaScaling:
    """Lambda at a fixed diagonal corner for strip data of width delta, fitted on log(1/delta).

    The corner is held fixed (and below every delta) so only the data change.
    ``omega_factory(delta)`` returns the vorticity; the default is the odd
    strip profile that vanishes for |x1| < delta/2 and equals sign(x1) beyond delta.
    """
    from scipy.stats import linregress

    if omega_factory is None:
        from .scenario import OddStripVorticity
        omega_factory = OddStripVorticity
    deltas = np.asarray(deltas, dtype=float)
    if np.any(deltas <= max(corner)):
        raise ParameterError("the corner must sit below every strip width")
    lam = np.array([key_integral(omega_factory(float(d)), QuadrantRegion(*corner), domain, **kw).lam
                    for d in deltas])
    fit = linregress(np.log(1 / deltas), lam)
    return LambdaScaling(deltas, lam, tuple(corner), float(fit.slope), float(fit.intercept),
                         float(fit.rvalue**2))
