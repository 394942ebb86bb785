"""One-dimensional maximization: coarse grid followed by golden-section refinement."""

import logging
import math
from typing import Callable, NamedTuple

import numpy as np

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


class GridMaximum(NamedTuple):
    """Location and value of a grid-then-refine maximum."""

    x: float
    value: float
    grid_index: int
    refined: bool


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float]:
    """
    Golden-section search for a maximum of f on [a, b].

    Shrinks the bracket until it is no wider than tol and returns the best
    point evaluated on the way, together with its value. f need not be
    unimodal; the result is then a local maximum inside the bracket.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    # Required steps to achieve tolerance
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    best_x, best_y = (c, yc) if yc >= yd else (d, yd)

    for _ in range(n - 1):
        if yc > yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
            if yc > best_y:
                best_x, best_y = c, yc
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
            if yd > best_y:
                best_x, best_y = d, yd

    return best_x, best_y


def refine_grid_maximum(
    f: Callable[[float], float],
    grid: np.ndarray,
    values: np.ndarray,
    tol: float,
) -> GridMaximum:
    """
    Refine the best grid point by golden-section search on its neighbouring bracket.

    Ties on the grid go to the lowest index. The refined point replaces the
    grid point only when it is strictly better, so the result never falls
    below the grid maximum.

    Args:
        f: Scalar objective, in the same coordinate as grid
        grid: Increasing grid of abscissae
        values: f evaluated on grid
        tol: Bracket width at which refinement stops

    Returns:
        GridMaximum with the chosen abscissa and value
    """
    i = int(np.argmax(values))
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, len(grid) - 1)])
    best_value = float(values[i])

    x, value = golden_section_max(f, lo, hi, tol)
    logger.debug(f"Refined bracket [{lo:.6g}, {hi:.6g}]: grid {best_value:.12g} -> {value:.12g}")

    if value > best_value:
        return GridMaximum(x=x, value=value, grid_index=i, refined=True)
    return GridMaximum(x=float(grid[i]), value=best_value, grid_index=i, refined=False)
