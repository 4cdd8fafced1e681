import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ess.errors import DomainError, ParameterError
from ess.geometry import (
    BoundaryGraph, Disk, Ellipse, GraphDomain, check_disk_oracle, check_exteriority,
    check_involution, check_jacobian_fd, check_projection_residual, conjugate_jacobian,
    conjugate_point, disk_projection_closed_form, project_to_boundary, sample_validity_region,
)


def test_disk_is_tangent_at_origin(disk):
    assert disk.contains(np.array([[0.0, 0.5]]))[0]
    assert abs(disk.implicit(np.array([[0.0, 0.0]]))[0]) < 1e-15
    n = disk.outward_normal(np.array([[0.0, 0.0]]))[0]
    assert np.allclose(n, [0.0, -1.0])


def test_disk_closed_form_projection(disk, rng):
    ys = sample_validity_region(disk, 2000, rng)
    ours = conjugate_point(disk, ys).y_star
    c = np.array([0.0, 1.0])
    e = c + (ys - c) / np.linalg.norm(ys - c, axis=1)[:, None]
    assert np.max(np.abs(ours - (2 * e - ys))) < 1e-12
    assert np.max(np.abs(disk_projection_closed_form(disk, ys) - e)) < 1e-12


@pytest.mark.parametrize("dom_fixture", ["disk", "ellipse"])
def test_geometry_checks_pass(dom_fixture, request, rng):
    dom = request.getfixturevalue(dom_fixture)
    ys = sample_validity_region(dom, 2000, rng)
    for res in (check_projection_residual(dom, ys), check_jacobian_fd(dom),
                check_exteriority(dom, ys), check_involution(dom)):
        assert res.passed, res.line()


def test_disk_oracle(disk, rng):
    assert check_disk_oracle(disk, sample_validity_region(disk, 500, rng)).passed


def test_jacobian_is_reflection(ellipse):
    J = conjugate_jacobian(ellipse, np.linspace(-0.1, 0.1, 9))
    for M in J:
        assert np.allclose(M, M.T)
        assert np.allclose(M @ M, np.eye(2), atol=1e-14)
        assert math.isclose(np.linalg.det(M), -1.0, rel_tol=1e-12)


def test_jacobian_outside_interval_raises(disk):
    with pytest.raises(DomainError):
        conjugate_jacobian(disk, 3 * disk.validity_radius)


def test_boundary_point_is_fixed(ellipse):
    s = np.linspace(-0.1, 0.1, 11)
    f = ellipse._graph(s, 0)[0]
    y = np.stack([s, f], -1)
    assert np.max(np.abs(conjugate_point(ellipse, y).y_star - y)) < 1e-12


def test_large_validity_radius_fails_involution():
    dom = Disk(1.0, validity_radius=0.9)
    assert not check_involution(dom).passed


def test_projection_outside_validity_raises(disk):
    with pytest.raises(DomainError):
        project_to_boundary(disk, np.array([[0.0, 0.9]]))


def test_custom_graph_domain_matches_disk():
    # same disk described through the generic graph interface
    def r(s):
        return np.sqrt(1 - np.asarray(s, float) ** 2)

    g = BoundaryGraph(lambda s: 1 - r(s), lambda s: s / r(s), lambda s: 1 / r(s) ** 3,
                      lambda s: 3 * s / r(s) ** 5, s_max=0.9)
    dom = GraphDomain(g, lambda y: y[..., 0] ** 2 + (y[..., 1] - 1) ** 2 - 1,
                      (-1.0, 1.0, 0.0, 2.0))
    ys = np.array([[0.01, 0.02], [-0.03, 0.01], [0.0, 0.05]])
    assert np.allclose(conjugate_point(dom, ys).y_star, conjugate_point(Disk(1.0), ys).y_star,
                       atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(0.01, 0.9), th=st.floats(0.05, math.pi - 0.05))
def test_exterior_and_involution_property(r, th):
    dom = Ellipse(1.0, 0.75)
    rho = r * dom.validity_radius
    y = np.array([[rho * math.cos(th), rho * math.sin(th)]])
    if not dom.contains(y)[0]:
        return
    ys = conjugate_point(dom, y).y_star
    assert not dom.contains(ys)[0] or np.allclose(ys, y)
    yss = conjugate_point(dom, ys, check=False).y_star
    assert np.allclose(yss, y, atol=1e-12)


def test_ellipse_rejects_bad_axes():
    with pytest.raises((ParameterError, DomainError)):
        Ellipse(1.0, -1.0)


# frozen examples ----------------------------------------------------------

def test_disk_graph_values():
    from ess.geometry import boundary_height

    f0, f1 = boundary_height(Disk(1.0), np.array([0.0, 0.6]), 1)
    assert abs(f0[0]) < 1e-15 and abs(f1[0]) < 1e-15
    assert math.isclose(f1[1], 0.75, rel_tol=1e-14)


def test_ellipse_graph_matches_symbolic_derivatives():
    sympy = pytest.importorskip("sympy")
    from ess.geometry import boundary_height

    a, b = 1.3, 0.7
    s = sympy.symbols("s")
    f = b - b * sympy.sqrt(1 - s**2 / a**2)
    pts = np.linspace(-0.4, 0.4, 7)
    got = boundary_height(Ellipse(a, b), pts, 3)
    for k in range(4):
        ref = sympy.lambdify(s, sympy.diff(f, s, k))(pts)
        assert np.allclose(got[k], ref, rtol=1e-11, atol=1e-14)
    assert math.isclose(got[2][3], b / a**2, rel_tol=1e-12)


def test_disk_projection_example():
    # the example point lies beyond the default validity radius 0.2
    disk = Disk(1.0, validity_radius=0.4)
    y = np.array([[0.3, 0.1]])
    p = project_to_boundary(disk, y)
    assert np.allclose(p.e, [[0.316228, 0.051317]], atol=5e-7)
    cp = conjugate_point(disk, y)
    assert np.allclose(cp.y_star, [[0.332456, 0.002634]], atol=1e-6)  # quoted to 6 digits
    assert math.isclose(np.linalg.norm(cp.y_star[0] - [0, 1]), 1.051317, abs_tol=5e-7)
    axis = conjugate_point(Disk(1.0, validity_radius=0.5), np.array([[0.0, 0.5]]))
    assert np.allclose(axis.y_star, [[0.0, -0.5]])


def test_disk_jacobian_example():
    J = conjugate_jacobian(Disk(1.0, validity_radius=0.4), 0.6)
    assert np.allclose(J, [[0.28, 0.96], [0.96, -0.28]], atol=1e-14)
    assert np.allclose(conjugate_jacobian(Disk(1.0), 0.0), [[1, 0], [0, -1]])


def test_signed_distance_examples(disk):
    from ess.geometry import signed_distance

    d = signed_distance(disk, np.array([[0.0, 1.0], [0.0, 0.0], [0.0, -0.5]]))
    assert np.allclose(d, [-1.0, 0.0, 0.5], atol=1e-15)
