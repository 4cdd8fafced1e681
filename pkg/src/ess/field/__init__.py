"""Velocity from vorticity: grid Poisson backend, disk Green oracle, image decomposition."""

from .grid import Grid
from .fields import ScalarField
from .poisson import (PoissonSolver, StreamFunction, VelocitySample, assemble_laplacian,
                      solve_stream, velocity_at)
from .green import (GreenValue, greens_disk_exact, greens_image,
                    remainder_regularity_check, velocity_via_green_quadrature)
from .io import field_csv, read_ess1, write_ess1

__all__ = [
    "Grid", "ScalarField", "PoissonSolver", "StreamFunction", "VelocitySample",
    "assemble_laplacian", "solve_stream", "velocity_at", "GreenValue", "greens_disk_exact",
    "greens_image", "remainder_regularity_check", "velocity_via_green_quadrature",
    "field_csv", "read_ess1", "write_ess1",
]
