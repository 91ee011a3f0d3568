"""Numpy/scipy implementations of the hot kernels.

These are the reference fallbacks for the compiled ``_core`` extension and
share its call signatures exactly.
"""
import numpy as np
from scipy.linalg import solve_banded

NAME = "python"


def tridiag_solve(lower, diag, upper, rhs):
    """Solve a tridiagonal system; ``lower``/``upper`` have length n - 1."""
    n = rhs.shape[0]
    ab = np.empty((3, n))
    ab[0, 0] = 0.0
    ab[0, 1:] = upper
    ab[1] = diag
    ab[2, :-1] = lower
    ab[2, -1] = 0.0
    return solve_banded((1, 1), ab, rhs, overwrite_ab=True, check_finite=False)


def direct_convolve(a, b):
    """Full linear convolution, summed in a fixed sequential order."""
    return np.convolve(a, b)


def upwind_fluxes(u, courant):
    """Mass through each cell edge during one step, in units of ``dx * u``.

    ``courant[e] = v_e dt / dx`` at the ``n + 1`` edges (edge ``e`` is the left
    edge of cell ``e``).  Each flux is the mass of the piecewise-constant
    profile over the departure interval ``[e - courant[e], e]``; outside the
    grid the profile is zero.  For ``|courant| <= 1`` this is the classical
    first-order upwind flux ``courant * u_upwind``.
    """
    n = u.shape[0]
    c = np.asarray(courant, dtype=float)
    if np.all(np.abs(c) <= 1.0):
        left = np.concatenate(([0.0], u))
        right = np.concatenate((u, [0.0]))
        return np.where(c > 0.0, c * left, c * right)
    edges = np.arange(n + 1, dtype=float)
    dep = edges - c
    # Prefix sums from the nearer end keep round-off proportional to the
    # local mass, not the total mass.
    lo = np.concatenate(([0.0], np.cumsum(u)))
    hi = np.concatenate((np.cumsum(u[::-1])[::-1], [0.0]))
    flux = np.empty(n + 1)
    half = (n + 1) // 2
    a = slice(0, half)
    b = slice(half, n + 1)
    flux[a] = np.interp(edges[a], edges, lo) - np.interp(dep[a], edges, lo)
    flux[b] = np.interp(dep[b], edges, hi) - np.interp(edges[b], edges, hi)
    return flux


def remap_fluxes(u, courant):
    """Mass through each cell edge when every edge is carried forward by
    ``courant[e]`` cells and each cell's mass is spread evenly over the image
    of the cell.

    The images must stay ordered (``1 + courant[e+1] - courant[e] > 0``).
    Zero profile outside the grid.  Same units as :func:`upwind_fluxes`.
    """
    n = u.shape[0]
    edges = np.arange(n + 1, dtype=float)
    knots = edges + np.asarray(courant, dtype=float)
    lo = np.concatenate(([0.0], np.cumsum(u)))
    hi = np.concatenate((np.cumsum(u[::-1])[::-1], [0.0]))
    flux = np.empty(n + 1)
    half = (n + 1) // 2
    flux[:half] = lo[:half] - np.interp(edges[:half], knots, lo)
    flux[half:] = np.interp(edges[half:], knots, hi) - hi[half:]
    return flux
