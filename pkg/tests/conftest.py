import math

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from wkbwigner.numerics import ComplexField1D, Grid1D
from wkbwigner.potentials import PhysParams


@pytest.fixture
def unit():
    return PhysParams()


def gaussian_state(grid: Grid1D, x0=0.0, width=1.0, k0=0.0) -> ComplexField1D:
    x = grid.points
    vals = np.exp(-(x - x0) ** 2 / (2 * width ** 2) + 1j * k0 * x)
    return ComplexField1D(grid, vals).normalized()


def wide_grid_for(out: Grid1D, pad_nodes: int) -> Grid1D:
    """A grid sharing ``out``'s spacing and extending it by ``pad_nodes`` on each side."""
    dx = out.spacing
    return Grid1D.from_spacing(out.x_min - pad_nodes * dx, dx, out.n + 2 * pad_nodes)


def fd_levels(model, lo, hi, n_nodes, count):
    """Lowest eigenvalues of -hbar^2/2M d^2/dx^2 + V by second-order differences, Dirichlet ends."""
    x = np.linspace(lo, hi, n_nodes + 2)[1:-1]
    h = x[1] - x[0]
    pr = model.params
    kin = pr.hbar ** 2 / (2 * pr.mass * h * h)
    w = eigh_tridiagonal(2 * kin + model(x), -kin * np.ones(n_nodes - 1), select="i",
                         select_range=(0, count - 1), eigvals_only=True)
    return w
