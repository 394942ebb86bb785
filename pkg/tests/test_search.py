"""Tests for grid-then-golden-section maximization."""

import math

import numpy as np
import pytest

from diamondnet.search import golden_section_max, refine_grid_maximum


def test_golden_section_finds_interior_maximum():
    """Test golden-section search on a concave quadratic."""
    x, value = golden_section_max(lambda t: -((t - 0.3) ** 2), 0.0, 1.0, 1e-10)

    assert x == pytest.approx(0.3, abs=1e-8)
    assert value == pytest.approx(0.0, abs=1e-15)


def test_golden_section_degenerate_bracket():
    """Test a bracket already narrower than the tolerance."""
    x, value = golden_section_max(lambda t: t, 2.0, 2.0, 1e-9)

    assert x == 2.0
    assert value == 2.0


def test_refine_grid_maximum_improves_on_grid():
    """Test refinement between grid points."""
    grid = np.linspace(0.0, 1.0, 11)
    f = lambda t: math.sin(math.pi * t / 1.3)  # noqa: E731
    values = np.array([f(t) for t in grid])

    best = refine_grid_maximum(f, grid, values, 1e-10)

    assert best.refined
    assert best.x == pytest.approx(0.65, abs=1e-7)
    assert best.value >= values.max()


def test_refine_grid_maximum_ties_go_to_lowest_index():
    """Test that a flat objective keeps the first grid point."""
    grid = np.linspace(0.0, 1.0, 5)
    values = np.ones_like(grid)

    best = refine_grid_maximum(lambda t: 1.0, grid, values, 1e-9)

    assert best.grid_index == 0
    assert best.x == 0.0
    assert not best.refined


def test_refine_grid_maximum_at_upper_edge():
    """Test an increasing objective peaks at the last grid point."""
    grid = np.linspace(0.0, 1.0, 9)
    values = grid.copy()

    best = refine_grid_maximum(lambda t: t, grid, values, 1e-9)

    assert best.grid_index == len(grid) - 1
    assert best.value == pytest.approx(1.0, abs=1e-8)
