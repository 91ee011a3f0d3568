import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fkpp_nonlocal.convolve import Convolver, Field, Grid, GridError, conv, conv_dx
from fkpp_nonlocal.kernel import Kernel, eval_kernel, facts

KERNELS = [
    Kernel.keller_segel(0.5, 1.0),
    Kernel.compact_bump(0.5, 2.0),
    Kernel.power_law(1.0, 0.5),
    Kernel.step(0.25),
    Kernel.tabulated(0.3 * np.exp(-0.2 * np.arange(41)), 0.2),
]


def bump_field(grid, center=0.0, width=1.0):
    return Field(grid, np.exp(-(((grid.x - center) / width) ** 2)))


def test_zero_kernel_gives_zero():
    g = Grid.symmetric(5.0, 0.1)
    u = bump_field(g)
    assert np.all(conv(Kernel.zero(), u).values == 0.0)
    assert np.all(conv_dx(Kernel.zero(), u).values == 0.0)


@pytest.mark.parametrize("k", KERNELS, ids=str)
def test_parity(k):
    g = Grid.symmetric(6.0, 0.05)
    u = bump_field(g, width=1.3)
    c = conv(k, u).values
    d = conv_dx(k, u).values
    assert abs(c[g.n // 2]) < 1e-12
    np.testing.assert_allclose(c, -c[::-1], atol=1e-12)
    np.testing.assert_allclose(d, d[::-1], atol=1e-10)


@pytest.mark.parametrize("k", KERNELS, ids=str)
def test_fft_matches_direct(k):
    rng = np.random.default_rng(4)
    g = Grid(-4.0, 0.05, 161)
    worst = 0.0
    for _ in range(200):
        u = rng.random(g.n)
        a = Convolver(k, g, "fft").edges(u)
        b = Convolver(k, g, "direct").edges(u)
        worst = max(worst, np.max(np.abs(a - b)) / np.max(np.abs(b)))
    assert worst < 1e-10


@given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 2**16))
def test_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    g = Grid(-3.0, 0.1, 61)
    u, v = rng.random(g.n), rng.random(g.n)
    k = Kernel.keller_segel(0.5, 1.0)
    lhs = conv(k, Field(g, a * u + b * v)).values
    rhs = a * conv(k, Field(g, u)).values + b * conv(k, Field(g, v)).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_matches_quadrature_of_the_integral():
    # K*u for u = indicator of [-1, 1] and the step kernel: k_inf * (min(x+1,2)... )
    dx = 0.01
    g = Grid.symmetric(3.0, dx)
    x = g.x
    u = np.where(np.abs(x) <= 1.0 + 1e-12, 1.0, 0.0)
    k = Kernel.step(0.5)
    c = Convolver(k, g).edges(u)
    edges = g.x0 - 0.5 * dx + dx * np.arange(g.n + 1)
    # integral of 0.5 sign(x - y) over y in [-1, 1], node set widens it by dx/2
    L = 1.0 + dx / 2
    exact = 0.5 * (np.clip(edges + L, 0, 2 * L) - np.clip(L - edges, 0, 2 * L))
    np.testing.assert_allclose(c, exact, atol=1e-12)


def test_second_order_in_dx():
    k = Kernel.keller_segel(0.5, 1.0)
    errs = []
    for dx in (0.04, 0.02, 0.01):
        g = Grid.symmetric(8.0, dx)
        u = bump_field(g)
        c = conv(k, u).values
        # reference by adaptive quadrature at a few nodes
        from scipy import integrate

        idx = [int(np.argmin(np.abs(g.x - p))) for p in (-1.0, 0.5, 2.0)]
        ref = [
            integrate.quad(lambda y, xi=g.x[i]: eval_kernel(k, xi - y) * np.exp(-(y**2)), -20, 20, points=[g.x[i]], limit=400)[0]
            for i in idx
        ]
        errs.append(max(abs(c[i] - r) for i, r in zip(idx, ref)))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


@pytest.mark.parametrize("k", KERNELS, ids=str)
def test_convolution_bounds_with_small_allowance(k):
    f = facts(k)
    rng = np.random.default_rng(9)
    g = Grid.symmetric(8.0, 0.02)
    for _ in range(20):
        c0, w, h = rng.uniform(-3, 3), rng.uniform(0.3, 1.0), rng.uniform(0.1, 1.0)
        u = Field(g, h * np.exp(-(((g.x - c0) / w) ** 2)))
        top = u.values.max()
        if np.isfinite(f.l1_norm):
            assert np.max(np.abs(conv(k, u).values)) <= 0.5 * f.l1_norm * top + 1e-3
        assert np.max(np.abs(conv_dx(k, u).values)) <= abs(f.J) * top + 1e-3


def test_grid_validation():
    with pytest.raises(GridError):
        Grid(0.0, 0.0, 10)
    with pytest.raises(GridError):
        Grid(0.0, 0.1, 4)
    with pytest.raises(GridError):
        Field(Grid(0.0, 0.1, 10), np.zeros(9))
    with pytest.raises(ValueError):
        Convolver(Kernel.zero(), Grid(0.0, 0.1, 10), "spectral")
