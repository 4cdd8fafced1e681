"""Odd strip initial data, the a(t)/b(t) markers and the growth diagnostics.

The markers follow the extreme horizontal velocities on the vertical
segments {x2 < x1} of the right half: a' = max u1 on the segment at a,
b' = min u1 on the segment at b. They are integrated in log coordinates,
which keeps the relative accuracy uniform while the scale collapses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .csvio import write_columns
from .errors import DomainError, OrderingError, ParameterError, ScaleExhausted
from .geometry import Domain
from .report import CheckResult

PROFILES = ("smoothstep_quintic", "bump_exponential", "zero")
DEFAULT_SCALE_FLOOR = 1e-300
INTEGRITY_THRESHOLD = 0.95

# ---------------------------------------------------------------------------
# profiles


def smoothstep_quintic(z):
    z = np.clip(z, 0.0, 1.0)
    return z**3 * (10.0 - 15.0 * z + 6.0 * z * z)


def smoothstep_quintic_slope(z):
    z = np.clip(z, 0.0, 1.0)
    return 30.0 * z * z * (1.0 - z) ** 2


def _psi(z):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(z > 0, np.exp(-1.0 / np.where(z > 0, z, 1.0)), 0.0)


def bump_exponential(z):
    z = np.clip(z, 0.0, 1.0)
    a = _psi(z)
    b = _psi(1.0 - z)
    return a / (a + b)


def bump_exponential_slope(z):
    z = np.clip(z, 0.0, 1.0)
    a = _psi(z)
    b = _psi(1.0 - z)
    with np.errstate(divide="ignore", invalid="ignore"):
        da = np.where(z > 0, a / np.where(z > 0, z * z, 1.0), 0.0)
        db = np.where(z < 1, b / np.where(z < 1, (1 - z) ** 2, 1.0), 0.0)
        s = (da * b + a * db) / (a + b) ** 2
    return np.nan_to_num(s)


_PROFILE_FUNS = {
    "smoothstep_quintic": (smoothstep_quintic, smoothstep_quintic_slope),
    "bump_exponential": (bump_exponential, bump_exponential_slope),
}


def profile_slope_range(profile: str) -> tuple[float, float]:
    """(min, max) of q' over the interior of the ramp where q' is largest half-way."""
    if profile == "zero":
        return 0.0, 0.0
    _, dq = _PROFILE_FUNS[profile]
    z = np.linspace(0.0, 1.0, 200001)
    s = dq(z)
    return float(s.min()), float(s.max())


@dataclass(frozen=True)
class OddStripVorticity:
    """omega(x) = sign(x1) q(|x1|), q = 0 on [0, w/2], q = 1 on [w, inf)."""

    width: float
    profile: str = "smoothstep_quintic"

    def q(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        if self.profile == "zero":
            return np.zeros_like(s)
        fn, _ = _PROFILE_FUNS[self.profile]
        half = 0.5 * self.width
        return fn((s - half) / half)

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        x1 = pts[..., 0]
        return np.sign(x1) * self.q(x1)

    @property
    def max_gradient(self) -> float:
        return profile_slope_range(self.profile)[1] / (0.5 * self.width)


# ---------------------------------------------------------------------------
# initial data


@dataclass(frozen=True)
class InitialDataParams:
    epsilon: float = 0.05
    delta_strip: float = 1e-3
    profile: str = "smoothstep_quintic"

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ParameterError(f"profile must be one of {PROFILES}")
        if not 0 < self.epsilon < 1:
            raise ParameterError("epsilon must lie in (0, 1)")
        if not self.delta_strip > 0:
            raise ParameterError("strip width delta must be positive")
        if self.epsilon**10 >= self.delta_strip:
            raise ParameterError("the profile ramp (width epsilon^10) must fit inside the strip delta")

    @property
    def ramp_width(self) -> float:
        return self.epsilon**10


@dataclass
class InitialData:
    omega: "ScalarField"  # noqa: F821
    vorticity: OddStripVorticity
    params: InitialDataParams
    under_resolved: bool
    h_origin: float

    def sanity(self) -> CheckResult:
        w = self.omega
        g = w.max_gradient()
        odd = w.odd_defect()
        vmax = float(np.abs(w.unknowns()).max(initial=0.0))
        ok = (odd == 0.0 and (self.params.profile == "zero" or (abs(vmax - 1.0) < 1e-12 and g > 1.0)))
        return CheckResult("initial_data_sanity", ok,
                           {"sup_norm": vmax, "odd_defect": odd, "grid_grad_max": g,
                            "analytic_grad_max": self.vorticity.max_gradient
                            if self.params.profile != "zero" else 0.0,
                            "under_resolved": self.under_resolved})


def build_initial_data(domain: Domain, params: InitialDataParams, grid) -> InitialData:
    """Sample the odd strip data on ``grid`` (the under-resolution flag is informational)."""
    from .field import ScalarField

    if grid.domain is not domain:
        raise ParameterError("grid was built for a different domain")
    vort = OddStripVorticity(params.ramp_width, params.profile)
    omega = ScalarField.from_function(grid, vort, odd=True)
    h0 = grid.spacing_near_origin()
    return InitialData(omega, vort, params, bool(h0 > params.ramp_width / 4), h0)


# ---------------------------------------------------------------------------
# velocity backends for the markers


class U1Backend(Protocol):
    def u1(self, x1: np.ndarray, x2: np.ndarray, t: float) -> np.ndarray: ...


@dataclass(frozen=True)
class LinearModel:
    """u1 = -lam x1."""

    lam: float = 1.0

    def u1(self, x1, x2, t):
        return -self.lam * np.asarray(x1, dtype=float) + 0.0 * np.asarray(x2)

    def exact_log_a(self, a0, t):
        return math.log(a0) - self.lam * t


@dataclass(frozen=True)
class XLogXModel:
    """u1 = kappa x1 log x1, whose markers obey a(t) = a0^exp(kappa t)."""

    kappa: float = 1.0

    def u1(self, x1, x2, t):
        x1 = np.asarray(x1, dtype=float)
        return self.kappa * x1 * np.log(x1) + 0.0 * np.asarray(x2)

    def exact_log_a(self, a0, t):
        return math.log(a0) * math.exp(self.kappa * t)


@dataclass(frozen=True)
class ConstantModel:
    """u1 = -c."""

    c: float = 1e-3

    def u1(self, x1, x2, t):
        return -self.c + 0.0 * np.asarray(x1, dtype=float) * np.asarray(x2)

    def exact_log_a(self, a0, t):
        return math.log(a0 - self.c * t) if a0 > self.c * t else -math.inf


MODEL_FIELDS = {"linear": LinearModel, "xlogx": XLogXModel, "constant": ConstantModel}


def parse_model_field(spec: str):
    """``name`` or ``name:value`` (value is the model's single parameter)."""
    name, _, val = spec.partition(":")
    if name not in MODEL_FIELDS:
        raise ParameterError(f"unknown model field {name!r}; choose from {sorted(MODEL_FIELDS)}")
    cls = MODEL_FIELDS[name]
    return cls(float(val)) if val else cls()


class StreamBackend:
    """u1 from stream functions at two times, linear in t between them."""

    def __init__(self, psi0, t0: float, psi1=None, t1: float | None = None):
        self.psi0, self.t0 = psi0, t0
        self.psi1, self.t1 = psi1, t1

    def u1(self, x1, x2, t):
        pts = np.stack(np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float)), -1)
        u0 = self.psi0.velocity(pts)[..., 0]
        if self.psi1 is None or self.t1 is None or self.t1 == self.t0:
            return u0
        th = (t - self.t0) / (self.t1 - self.t0)
        return (1 - th) * u0 + th * self.psi1.velocity(pts)[..., 0]


# ---------------------------------------------------------------------------
# segment extrema

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(fn, lo, hi, sign, tol):
    """Minimize sign*fn on [lo, hi]."""
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc = sign * fn(c)
    fd = sign * fn(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = sign * fn(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = sign * fn(d)
    return (fc if fc < fd else fd) * sign


def segment_bounds(domain: Domain, x1: float) -> tuple[float, float]:
    lo, hi = domain.vertical_extent(x1)
    lo, hi = float(lo), float(min(hi, x1))
    if not (x1 > 0 and lo < hi):
        raise DomainError(f"empty segment at x1 = {x1:g}")
    return lo, hi


def u1_segment_extrema(backend: U1Backend, domain: Domain, x1: float, t: float,
                       n: int = 64, rtol: float = 1e-6) -> tuple[float, float]:
    """(min, max) of u1 over {(x1, x2) in the right half : x2 < x1}."""
    lo, hi = segment_bounds(domain, x1)
    xs = np.linspace(lo, hi, n)
    v = np.asarray(backend.u1(np.full(n, x1), xs, t), dtype=float)
    vmin, vmax = float(v.min()), float(v.max())
    scale = max(abs(vmin), abs(vmax))
    if vmax - vmin <= 1e-13 * scale:
        return vmin, vmax

    def f(s):
        return float(backend.u1(np.array([x1]), np.array([s]), t)[0])

    tol = rtol * (hi - lo)
    k = int(np.argmin(v))
    vmin = min(vmin, _golden(f, xs[max(k - 1, 0)], xs[min(k + 1, n - 1)], 1.0, tol))
    k = int(np.argmax(v))
    vmax = max(vmax, _golden(f, xs[max(k - 1, 0)], xs[min(k + 1, n - 1)], -1.0, tol))
    return vmin, vmax


# ---------------------------------------------------------------------------
# markers


@dataclass(frozen=True)
class ABState:
    t: float
    a: float
    b: float
    log_a: float | None = None
    log_b: float | None = None

    def __post_init__(self):
        if self.log_a is None:
            object.__setattr__(self, "log_a", math.log(self.a))
        if self.log_b is None:
            object.__setattr__(self, "log_b", math.log(self.b))

    @classmethod
    def initial(cls, epsilon: float) -> "ABState":
        return cls(0.0, epsilon**10, epsilon, 10.0 * math.log(epsilon), math.log(epsilon))

    @classmethod
    def from_logs(cls, t, log_a, log_b) -> "ABState":
        return cls(t, math.exp(log_a), math.exp(log_b), log_a, log_b)


def marker_rates(state_t, log_a, log_b, backend, domain):
    a = math.exp(log_a)
    b = math.exp(log_b)
    ua = u1_segment_extrema(backend, domain, a, state_t)[1]
    ub = u1_segment_extrema(backend, domain, b, state_t)[0]
    return ua / a, ub / b, ua, ub


def step_ab(state: ABState, dt: float, backend: U1Backend, domain: Domain,
            floor: float = DEFAULT_SCALE_FLOOR) -> ABState:
    """One classical RK4 step of a' = u1_upper(a), b' = u1_lower(b) in log coordinates."""
    if dt <= 0:
        raise ParameterError("dt must be positive")
    t, la, lb = state.t, state.log_a, state.log_b
    k1 = marker_rates(t, la, lb, backend, domain)[:2]
    k2 = marker_rates(t + dt / 2, la + dt / 2 * k1[0], lb + dt / 2 * k1[1], backend, domain)[:2]
    k3 = marker_rates(t + dt / 2, la + dt / 2 * k2[0], lb + dt / 2 * k2[1], backend, domain)[:2]
    k4 = marker_rates(t + dt, la + dt * k3[0], lb + dt * k3[1], backend, domain)[:2]
    la_n = la + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    lb_n = lb + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    new = ABState.from_logs(t + dt, la_n, lb_n)
    if la_n > lb_n:
        raise OrderingError(f"a > b at t = {new.t:g}")
    if not (la_n < la and lb_n < lb):
        raise OrderingError(f"markers failed to decrease at t = {new.t:g}")
    if la_n <= math.log(floor):
        raise ScaleExhausted(f"a(t) reached the floor {floor:g} at t = {new.t:g}")
    return new


# ---------------------------------------------------------------------------
# growth trace

TRACE_COLUMNS = ("t", "a", "b", "log_a", "log_b", "u1u_at_a", "u1l_at_b", "lambda_bb",
                 "grad_lower_bound", "gronwall_lhs", "gronwall_rhs_fit")


@dataclass
class GrowthTrace:
    rows: list = field(default_factory=list)

    def append(self, state: ABState, u1u: float, u1l: float, lambda_bb: float,
               grad_bound: float | None):
        self.rows.append({"t": state.t, "a": state.a, "b": state.b, "log_a": state.log_a,
                          "log_b": state.log_b, "u1u_at_a": u1u, "u1l_at_b": u1l,
                          "lambda_bb": lambda_bb,
                          "grad_lower_bound": math.nan if grad_bound is None else grad_bound,
                          "gronwall_lhs": math.nan, "gronwall_rhs_fit": math.nan})

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)

    def fill_gronwall(self, fit: "GronwallFit") -> None:
        if fit.lhs is None:
            return
        for r, l, rh in zip(self.rows, fit.lhs, fit.rhs):
            r["gronwall_lhs"] = float(l)
            r["gronwall_rhs_fit"] = float(rh)

    def to_csv(self, path):
        return write_columns(path, {c: self.column(c) for c in TRACE_COLUMNS})


def run_markers(backend: U1Backend, domain: Domain, a0: float, b0: float, dt: float,
                t_max: float, floor: float = DEFAULT_SCALE_FLOOR) -> tuple[GrowthTrace, str]:
    """March the markers through a time-independent backend; returns (trace, status)."""
    state = ABState(0.0, a0, b0)
    trace = GrowthTrace()
    nsteps = int(round(t_max / dt))

    def record(s):
        ua = u1_segment_extrema(backend, domain, s.a, s.t)[1]
        ub = u1_segment_extrema(backend, domain, s.b, s.t)[0]
        trace.append(s, ua, ub, math.nan, gradient_lower_bound(s))

    record(state)
    status = "t_max"
    for _ in range(nsteps):
        try:
            state = step_ab(state, dt, backend, domain, floor)
        except ScaleExhausted:
            status = "scale_exhausted"
            break
        record(state)
    return trace, status


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class IntegrityReport:
    min_value: float
    fraction_below: float
    tol: float
    n_samples: int
    resolved: bool
    x1_floor: float
    threshold: float = INTEGRITY_THRESHOLD

    @property
    def passed(self) -> bool:
        return self.resolved and self.min_value >= self.threshold


def region_integrity_check(omega_t, state: ABState, *, n1: int = 24, n2: int = 16,
                           threshold: float = INTEGRITY_THRESHOLD,
                           method: str = "bicubic") -> IntegrityReport:
    """min of omega over the grid-resolved part of R(a, b) = {a < x1 < b, x2 < x1}.

    The part of R_t closer to the symmetry axis than two grid cells cannot be
    represented on the grid (omega jumps from -1 to 1 across the axis) and is
    excluded; ``resolved`` is False when nothing remains.
    """
    grid = omega_t.grid
    domain = grid.domain
    x_floor = float(grid.x1[grid.i0 + 2])
    lo = max(state.a, x_floor)
    hi = state.b
    if hi <= lo:
        return IntegrityReport(math.nan, math.nan, math.nan, 0, False, x_floor, threshold)
    x1 = np.exp(np.linspace(math.log(lo), math.log(hi), n1 + 2)[1:-1])
    fr = (np.arange(n2) + 0.5) / n2
    pts = []
    for s in x1:
        a2, b2 = segment_bounds(domain, float(s))
        pts.append(np.stack([np.full(n2, s), a2 + fr * (b2 - a2)], -1))
    P = np.concatenate(pts)
    v = omega_t(P, method=method)
    # local gradient scale from nodes in the bounding box of the samples
    from .field.interp import diff_axis
    E = omega_t.extended()
    g = np.hypot(diff_axis(E, grid.x1, 0), diff_axis(E, grid.x2, 1))
    box = ((grid.x1[:, None] >= lo) & (grid.x1[:, None] <= hi)
           & (grid.x2[None, :] <= hi) & grid.inside)
    gloc = float(g[box].max(initial=0.0))
    hloc = float(grid.h_local[box].max(initial=grid.h_min))
    tol = max(2.0 * hloc * gloc, 1e-9)
    return IntegrityReport(float(v.min()), float(np.mean(v < 1.0 - tol)), tol, len(v), True,
                           x_floor, threshold)


def gradient_lower_bound(state: ABState, integrity: IntegrityReport | None = None) -> float | None:
    """Mean-value slope 1/(sqrt(2) a) between the origin and (a, a).

    With an integrity report the bound is withheld (None) unless it passed.
    """
    if integrity is not None and not integrity.passed:
        return None
    return 1.0 / (math.sqrt(2.0) * state.a)


@dataclass
class GronwallFit:
    status: str
    C_fit: float = math.nan
    C_max_valid: float = math.nan
    holds_fraction: float = math.nan
    loglog_slope: float = math.nan
    loglog_intercept: float = math.nan
    loglog_r2: float = math.nan
    lhs: np.ndarray | None = None
    rhs: np.ndarray | None = None
    log_a_bound: np.ndarray | None = None

    def summary(self) -> dict:
        return {k: getattr(self, k) for k in
                ("status", "C_fit", "C_max_valid", "holds_fraction", "loglog_slope",
                 "loglog_intercept", "loglog_r2")}


def linear_fit(x, y) -> tuple[float, float, float]:
    """Slope, intercept and R^2 of a least-squares line."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return float(slope), float(icpt), r2


def gronwall_diagnostic(trace: GrowthTrace) -> GronwallFit:
    """Fit d/dt L = C (L + 2), L = log a - log b, and log log(1/a) against t.

    C_fit is the least-squares constant; C_max_valid is the largest C for
    which d/dt L <= C (L + 2) holds at every row (L + 2 < 0 rows only).
    """
    if len(trace) < 10:
        return GronwallFit("too_short")
    t = trace.column("t")
    la = trace.column("log_a")
    lb = trace.column("log_b")
    if not (np.all(np.diff(la) < 0) and np.all(np.diff(lb) < 0) and np.all(np.diff(t) > 0)):
        return GronwallFit("nonmonotone")
    L = la - lb
    dL = np.gradient(L, t, edge_order=2)
    y = L + 2.0
    C = float(np.sum(dL * y) / np.sum(y * y))
    neg = y < 0
    cmax = float(np.min(dL[neg] / y[neg])) if neg.any() else math.nan
    holds = float(np.mean(dL <= C * y + 1e-12 * np.abs(dL)))
    s, i, r2 = linear_fit(t, np.log(-la))
    bound = lb + (L[0] + 2.0) * np.exp(C * (t - t[0])) - 2.0
    return GronwallFit("ok", C, cmax, holds, s, i, r2, dL, C * y, bound)
