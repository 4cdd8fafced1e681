import math

import numpy as np
import pytest

from ess.errors import CFLError, ParameterError
from ess.evolve import (
    EvolutionConfig, backtrace, evolve, local_cfl, rigid_rotation_drift, smooth_test_vorticity,
    step,
)
from ess.field.fields import ScalarField
from ess.field.grid import Grid
from ess.field.poisson import StreamFunction, solve_stream
from ess.geometry import Disk, Ellipse


@pytest.fixture(scope="module")
def smooth(disk_grid):
    return ScalarField.from_function(disk_grid, smooth_test_vorticity(disk_grid.domain), odd=True)


def test_config_validation():
    with pytest.raises(ParameterError):
        EvolutionConfig(dt=0.0)
    with pytest.raises(ParameterError):
        EvolutionConfig(cfl_cap=-1.0)
    with pytest.raises(ParameterError):
        EvolutionConfig(interpolation="spline")


def test_zero_velocity_backtrace_is_identity(disk_grid):
    psi = StreamFunction(disk_grid, np.zeros(disk_grid.n_unknowns))
    x = np.array([[0.1, 0.5], [-0.3, 1.2], [0.0, 0.01]])
    X, n = backtrace(psi, x, 0.1)
    assert np.array_equal(X, x) and n == 0


def test_rigid_rotation_radius_drift():
    assert rigid_rotation_drift(n=128, dt=1e-3, steps=10) <= 1e-8


def test_axis_points_stay_on_axis(smooth):
    psi = solve_stream(smooth)
    x2 = np.linspace(0.05, 1.9, 30)
    X, _ = backtrace(psi, np.stack([np.zeros_like(x2), x2], -1), 0.05)
    assert np.max(np.abs(X[:, 0])) < 1e-12


def test_threaded_backtrace_matches(smooth):
    psi = solve_stream(smooth)
    g = smooth.grid
    pts = g.points.reshape(-1, 2)[g.unknowns]
    a, na = backtrace(psi, pts, 0.05, threads=1)
    b, nb = backtrace(psi, pts, 0.05, threads=3)
    assert np.array_equal(a, b) and na == nb


def test_radial_vorticity_is_steady():
    errs = []
    for n in (64, 128):
        g = Grid(Disk(1.0), n)
        # radial about the centre; the wall value cos(5) is not an extremum
        w = ScalarField.from_function(
            g, lambda p: np.cos(5.0 * np.linalg.norm(p - [0.0, 1.0], axis=-1)))
        snap = step(w, EvolutionConfig(dt=1e-2, resymmetrize=False))
        errs.append(np.max(np.abs(snap.omega.unknowns() - w.unknowns())))
    assert errs[1] < 1e-4
    assert errs[0] / errs[1] > 3.0  # O(h^2) interpolation error only


def test_range_and_symmetry_preserved(smooth):
    cfg = EvolutionConfig(dt=1e-2, t_max=1.0)
    m0, n0 = smooth.max(), smooth.min()
    last = None
    for snap in evolve(smooth, cfg):
        assert snap.omega.max() <= m0 + 1e-3
        assert snap.omega.min() >= n0 - 1e-3
        assert snap.diagnostics["odd_defect"] == 0.0
        last = snap
    assert last.t == pytest.approx(1.0)


def test_odd_defect_small_without_resymmetrization(ellipse_grid):
    w = ScalarField.from_function(ellipse_grid, smooth_test_vorticity(ellipse_grid.domain),
                                  odd=True)
    cfg = EvolutionConfig(dt=1e-2, t_max=0.2, resymmetrize=False)
    for snap in evolve(w, cfg):
        pass
    assert snap.omega.odd_defect() <= 1e-6


def test_evolve_stop_callback(smooth):
    cfg = EvolutionConfig(dt=1e-2, t_max=1.0)
    snaps = list(evolve(smooth, cfg, stop=lambda s: s.t >= 0.03 - 1e-12))
    assert len(snaps) == 4 and snaps[0].t == 0.0


def test_cfl_halving_and_failure(smooth, caplog):
    psi = solve_stream(smooth)
    dt = 0.5
    c = local_cfl(psi, dt)
    cap = c / 3.0  # two halvings bring it under the cap
    snap = step(smooth, EvolutionConfig(dt=dt, cfl_cap=cap), psi=psi)
    assert snap.halvings == 2 and snap.dt == pytest.approx(dt / 4)
    assert sum("retrying with dt" in r.message for r in caplog.records) == 2
    with pytest.raises(CFLError):
        step(smooth, EvolutionConfig(dt=dt, cfl_cap=c / 100.0), psi=psi)


def test_bilinear_option(smooth):
    snap = step(smooth, EvolutionConfig(dt=1e-2, interpolation="bilinear"))
    assert snap.omega.max() <= smooth.max() + 1e-12


def test_circulation_nearly_conserved(smooth):
    cfg = EvolutionConfig(dt=1e-2, t_max=0.5)
    i0 = smooth.integral(half=True)
    for snap in evolve(smooth, cfg):
        pass
    assert abs(snap.omega.integral(half=True) / i0 - 1.0) < 5e-3
