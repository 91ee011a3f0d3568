"""Discrete K*u and (K*u)_x on a uniform grid.

The integral is approximated by the midpoint rule on cells of width ``dx``
with the kernel sampled at the staggered points (k + 1/2) dx, so the jump of K
at the origin never lands on a sample.  Evaluated at the cell edges
x_i + dx/2 this needs only nodal values of u:

    v_{i+1/2} = dx * sum_k K((k + 1/2) dx) u_{i-k}

and the nodal value is the average of the two neighbouring edge values.
u is extended by zero outside the grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import _backend
from .kernel import Kernel, sample


class GridError(ValueError):
    """Grid or field parameters are unusable."""


@dataclass(frozen=True)
class Grid:
    x0: float
    dx: float
    n: int

    def __post_init__(self):
        if not self.dx > 0:
            raise GridError("dx must be positive")
        if self.n < 8:
            raise GridError(f"grid needs at least 8 nodes, got {self.n}")

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def width(self) -> float:
        return (self.n - 1) * self.dx

    @property
    def x_end(self) -> float:
        return self.x0 + self.width

    @classmethod
    def symmetric(cls, half_width: float, dx: float) -> "Grid":
        """Grid on [-L, L] with a node at 0 (L rounded up to a multiple of dx)."""
        k = int(np.ceil(half_width / dx - 1e-9))
        return cls(-k * dx, dx, 2 * k + 1)


@dataclass
class Field:
    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise GridError(f"values have shape {self.values.shape}, grid has {self.grid.n} nodes")
        if not np.all(np.isfinite(self.values)):
            raise GridError("field values must be finite")

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.time)


@dataclass
class Convolver:
    """Edge velocities K*u for a fixed kernel and grid, with a cached spectrum.

    ``method`` is ``"fft"`` (zero-padded circular convolution) or
    ``"direct"`` (sequential quadrature sum through the active backend).
    """

    kernel: Kernel
    grid: Grid
    method: str = "fft"
    workers: int | None = None
    _samples: np.ndarray = field(init=False, repr=False)
    _spectrum: np.ndarray | None = field(init=False, repr=False, default=None)
    _size: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        if self.method not in ("fft", "direct"):
            raise ValueError(f"unknown convolution method {self.method!r}")
        n = self.grid.n
        self.m = n + 1
        self.is_zero = self.kernel.family == "zero"
        self._samples = sample(self.kernel, self.grid.dx, self.m * self.grid.dx)
        if self.method == "fft" and not self.is_zero:
            # wrap-around never reaches the n + 1 outputs kept when size > 2n
            self._size = sfft.next_fast_len(2 * n + 2, real=True)
            self._spectrum = sfft.rfft(self._samples, self._size, workers=self._workers())

    def _workers(self) -> int:
        return self.workers if self.workers is not None else _backend.fft_workers()

    def edges(self, u: np.ndarray) -> np.ndarray:
        """K*u at the ``n + 1`` cell edges x0 + (e - 1/2) dx, e = 0..n."""
        n, m, dx = self.grid.n, self.m, self.grid.dx
        if self.is_zero:
            return np.zeros(n + 1)
        u = np.ascontiguousarray(u, dtype=float)
        if self.method == "direct":
            full = _backend.core.direct_convolve(u, self._samples)
            return dx * full[m - 1 : m + n]
        spec = sfft.rfft(u, self._size, workers=self._workers())
        circ = sfft.irfft(spec * self._spectrum, self._size, workers=self._workers())
        return dx * circ[m - 1 : m + n]

    def nodes(self, u: np.ndarray) -> np.ndarray:
        v = self.edges(u)
        return 0.5 * (v[:-1] + v[1:])


def conv(kernel: Kernel, u: Field, method: str = "fft") -> Field:
    """Midpoint-rule K*u at every node of ``u.grid``."""
    c = Convolver(kernel, u.grid, method)
    return Field(u.grid, c.nodes(u.values), u.time)


def conv_dx(kernel: Kernel, u: Field, method: str = "fft") -> Field:
    """(K*u)_x: centred differences inside, one-sided second order at the ends."""
    c = conv(kernel, u, method).values
    dx = u.grid.dx
    d = np.empty_like(c)
    d[1:-1] = (c[2:] - c[:-2]) / (2 * dx)
    d[0] = (-3 * c[0] + 4 * c[1] - c[2]) / (2 * dx)
    d[-1] = (3 * c[-1] - 4 * c[-2] + c[-3]) / (2 * dx)
    return Field(u.grid, d, u.time)
