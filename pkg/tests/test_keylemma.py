import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ess.errors import ParameterError
from ess.evolve import smooth_test_vorticity
from ess.field.fields import ScalarField
from ess.field.poisson import solve_stream
from ess.geometry import Disk, Ellipse, boundary_height
from ess.keylemma import (
    QuadrantRegion, SectorSpec, diagonal_outflow_check, key_integral, lambda_many,
    lambda_scaling, ray_samples, residual_b1, residual_b2,
)
from ess.quadrature import box_kernel_closed_form, box_kernel_integral
from ess.scenario import OddStripVorticity

STRIP = OddStripVorticity(1e-3)


def test_box_oracle():
    res = box_kernel_integral(1.0, 2.0, 1.0, 2.0)
    ref = 0.25 * math.log(25.0 / 16.0)
    assert abs(res.value - ref) <= 1e-8
    assert math.isclose(ref, 0.1115718, abs_tol=5e-8)
    assert math.isclose(box_kernel_closed_form(1, 2, 1, 2), ref, rel_tol=1e-15)


@settings(max_examples=25, deadline=None)
@given(lo1=st.floats(0.01, 1.0), w1=st.floats(0.01, 2.0),
       lo2=st.floats(0.01, 1.0), w2=st.floats(0.01, 2.0))
def test_box_oracle_property(lo1, w1, lo2, w2):
    ref = box_kernel_closed_form(lo1, lo1 + w1, lo2, lo2 + w2)
    got = box_kernel_integral(lo1, lo1 + w1, lo2, lo2 + w2, rtol=1e-10).value
    assert abs(got - ref) <= 1e-8 * max(1.0, abs(ref))


def test_box_rejects_bad_box():
    with pytest.raises(ValueError):
        box_kernel_integral(-1.0, 1.0, 1.0, 2.0)


def test_zero_vorticity_zero_lambda(disk):
    zero = OddStripVorticity(1e-3, "zero")
    assert key_integral(zero, (1e-3, 1e-3), disk).lam == 0.0


def test_corner_precondition(disk):
    with pytest.raises(ParameterError):
        key_integral(None, QuadrantRegion(0.0, 0.1), disk)
    with pytest.raises(ParameterError):
        key_integral(None, (0.1, 0.1))  # no domain


def test_lambda_monotone_in_corner(disk):
    xs = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
    lam1 = [key_integral(STRIP, (x, 1e-3), disk).lam for x in xs]
    lam2 = [key_integral(STRIP, (1e-3, x), disk).lam for x in xs]
    assert np.all(np.diff(lam1) >= 0) and np.all(np.diff(lam2) >= 0)


def test_lambda_linearity(ellipse):
    base = key_integral(STRIP, (2e-3, 1e-3), ellipse).lam
    for alpha in (2.0, 0.37, 1e3):
        scaled = key_integral(lambda p, a=alpha: a * STRIP(p), (2e-3, 1e-3), ellipse).lam
        assert math.isclose(scaled, alpha * base, rel_tol=1e-12)


def test_lambda_threads_match(disk):
    pts = [(1e-3, 1e-3), (2e-3, 5e-4), (5e-3, -1e-3)]
    assert np.array_equal(lambda_many(STRIP, pts, disk, threads=1),
                          lambda_many(STRIP, pts, disk, threads=3))


def test_sliver_below_axis_stays_bounded(disk):
    # Q(x1, x2) for x2 < 0 adds the sliver between the boundary and y2 = 0;
    # its kernel mass obeys  C log(1 + (f(x1)/x1)^2) + C, i.e. stays O(1)
    diffs = []
    for x1 in (1e-2, 1e-3, 1e-4, 1e-5):
        f = float(boundary_height(disk, x1, 0)[0])
        full = key_integral(None, (x1, -1.0), disk).lam
        cut = key_integral(None, (x1, f), disk).lam
        diffs.append(full - cut)
        assert full >= cut - 1e-9
        assert full - cut <= 1.0 + math.log1p((f / x1) ** 2)
    assert max(diffs) < 0.05


def test_lambda_scaling_strip(disk):
    ls = lambda_scaling(disk)
    assert ls.passed
    assert ls.r2 >= 0.99 and ls.slope > 0
    # with the corner far below delta, Lambda ~ (2/pi) log(1/delta) + const
    assert math.isclose(ls.slope, 2 / math.pi, rel_tol=5e-3)
    with pytest.raises(ParameterError):
        lambda_scaling(disk, corner=(1e-2, 1e-2))


def test_ray_samples_stay_in_closed_domain(ellipse):
    radii = 2.0 ** -np.arange(4, 10)
    for phi in (0.0, math.pi / 8, 3 * math.pi / 8):
        X = ray_samples(ellipse, phi, radii)
        assert np.allclose(np.hypot(X[:, 0], X[:, 1]), radii, rtol=1e-12)
        assert np.all(ellipse.signed_distance(X) <= 1e-12)


def test_sector_spec_validation():
    with pytest.raises(ParameterError):
        SectorSpec(gamma=0.0)
    with pytest.raises(ParameterError):
        SectorSpec(delta=-1.0)
    s = SectorSpec()
    assert s.contains(np.array([[0.01, 0.0]]), 1)[0]
    assert not s.contains(np.array([[0.01, 0.0]]), 2)[0]
    assert s.contains(np.array([[0.001, 0.01]]), 2)[0]


@pytest.fixture(scope="module")
def smooth(disk_grid):
    # Lambda integrates the analytic datum (smooth, cheap to refine); the
    # velocity backend is the Poisson solve of its grid samples
    fn = smooth_test_vorticity(disk_grid.domain)
    w = ScalarField.from_function(disk_grid, fn, odd=True)
    return fn, solve_stream(w).velocity


def test_residual_identities(smooth, disk):
    fn, vel = smooth
    sec = SectorSpec()
    X = ray_samples(disk, 0.0, [0.05, 0.02])
    r1 = residual_b1(disk, fn, sec, X, velocity=vel)
    assert np.allclose(r1.b, r1.u_over + r1.lam, rtol=0, atol=1e-15)
    X2 = ray_samples(disk, 3 * math.pi / 8, [0.05, 0.02])
    r2 = residual_b2(disk, fn, sec, X2, velocity=vel)
    assert np.allclose(r2.b, r2.u_over - r2.lam, rtol=0, atol=1e-15)
    # points outside the sector are rejected, not silently used
    r = residual_b1(disk, fn, sec, X2, velocity=vel)
    assert len(r.b) == 0 and len(r.rejected) == 2


def test_doubling_omega_doubles_b1(disk_grid, disk):
    fn = smooth_test_vorticity(disk)
    w = ScalarField.from_function(disk_grid, fn, odd=True)
    X = ray_samples(disk, 0.0, [0.05, 0.02, 0.01])
    sec = SectorSpec()
    a = residual_b1(disk, fn, sec, X, velocity=solve_stream(w).velocity)
    b = residual_b1(disk, lambda p: 2 * fn(p), sec, X,
                    velocity=solve_stream(w.scaled(2.0)).velocity)
    assert np.allclose(b.u_over, 2 * a.u_over, rtol=1e-9, atol=1e-14)
    assert np.allclose(b.lam, 2 * a.lam, rtol=1e-12)
    assert np.allclose(b.b, 2 * a.b, rtol=1e-9, atol=1e-14)


def test_residual_on_grid_field(smooth, disk_grid, disk):
    # the suite path: Lambda of the interpolated grid field itself
    w = ScalarField.from_function(disk_grid, smooth[0], odd=True)
    r = residual_b1(disk, w, SectorSpec(), ray_samples(disk, 0.0, [0.05]), rtol=1e-4)
    assert np.isfinite(r.b).all()
    assert abs(r.lam[0] - key_integral(smooth[0], tuple(r.x[0]), disk).lam) < 1e-3


def test_zero_residuals(disk_grid, disk):
    z = ScalarField.zeros(disk_grid)
    sec = SectorSpec()
    r = residual_b1(disk, z, sec, ray_samples(disk, 0.0, [0.05, 0.02]))
    assert np.all(r.b == 0.0)
    r = residual_b2(disk, z, sec, ray_samples(disk, 3 * math.pi / 8, [0.05, 0.02]))
    assert np.all(r.b == 0.0)
    ofl = diagonal_outflow_check(disk, z, 1e-3, levels=3)
    assert ofl.degenerate and not ofl.outflow


def test_residual_csv_columns(tmp_path, smooth, disk):
    from ess.csvio import read_csv

    fn, vel = smooth
    r = residual_b1(disk, fn, SectorSpec(), ray_samples(disk, 0.0, [0.05, 0.02]), velocity=vel)
    d = read_csv(r.to_csv(tmp_path / "b1.csv"), ("x1", "x2", "radius", "u1_over_x1", "lambda", "b1"))
    assert len(d["b1"]) == 2
