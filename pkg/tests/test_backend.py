import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fkpp_nonlocal import _backend

py = _backend.get("python")
try:
    cy = _backend.get("cython")
except ImportError:  # pragma: no cover - extension not built
    cy = None

needs_cython = pytest.mark.skipif(cy is None, reason="compiled core not built")


def test_active_backend_is_reported():
    import fkpp_nonlocal

    assert fkpp_nonlocal.BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        _backend.get("fortran")


def test_pure_python_switch():
    env = dict(os.environ, FKPP_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import fkpp_nonlocal; print(fkpp_nonlocal.BACKEND)"], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("mod", [py, cy] if cy else [py], ids=lambda m: m.NAME)
def test_tridiag_solve_against_dense(mod):
    rng = np.random.default_rng(1)
    n = 50
    lo, up = -rng.random(n - 1), -rng.random(n - 1)
    diag = 2.5 + rng.random(n)
    rhs = rng.random(n)
    A = np.diag(diag) + np.diag(lo, -1) + np.diag(up, 1)
    np.testing.assert_allclose(mod.tridiag_solve(lo, diag, up, rhs), np.linalg.solve(A, rhs), rtol=1e-12)


@pytest.mark.parametrize("mod", [py, cy] if cy else [py], ids=lambda m: m.NAME)
def test_upwind_fluxes_small_courant(mod):
    u = np.array([0.0, 1.0, 2.0, 3.0])
    c = np.array([0.5, 0.5, -0.5, -0.5, 0.2])
    # edge e sits between cells e-1 and e; donor cell by the sign of c
    expect = np.array([0.0, 0.0, -1.0, -1.5, 0.6])
    np.testing.assert_allclose(mod.upwind_fluxes(u, c), expect)


@pytest.mark.parametrize("mod", [py, cy] if cy else [py], ids=lambda m: m.NAME)
def test_remap_conserves_and_translates(mod):
    u = np.zeros(40)
    u[10:14] = [0.2, 1.0, 0.7, 0.1]
    c = np.full(41, 3.0)
    flux = mod.remap_fluxes(u, c)
    new = u - (flux[1:] - flux[:-1])
    np.testing.assert_allclose(new[13:17], u[10:14], atol=1e-14)
    assert new.sum() == pytest.approx(u.sum(), abs=1e-14)


@needs_cython
@given(seed=st.integers(0, 2**16), n=st.integers(8, 300))
def test_backends_agree(seed, n):
    rng = np.random.default_rng(seed)
    u = rng.random(n) * (rng.random(n) < 0.7)
    small = rng.uniform(-1, 1, n + 1)
    np.testing.assert_allclose(cy.upwind_fluxes(u, small), py.upwind_fluxes(u, small), atol=1e-13)
    # monotone edge motion keeps the cell images ordered
    large = 4.0 * np.sin(np.linspace(0, 3, n + 1)) + np.cumsum(rng.uniform(0, 0.5, n + 1))
    large -= large.mean()
    fc, fp = cy.remap_fluxes(u, large), py.remap_fluxes(u, large)
    np.testing.assert_allclose(fc, fp, atol=1e-12)
    lo, up = -rng.random(n - 1), -rng.random(n - 1)
    diag = 2.0 + rng.random(n)
    np.testing.assert_allclose(cy.tridiag_solve(lo, diag, up, u), py.tridiag_solve(lo, diag, up, u), rtol=1e-12, atol=1e-14)
    k = rng.random(int(rng.integers(2, 60)))
    np.testing.assert_allclose(cy.direct_convolve(u, k), py.direct_convolve(u, k), rtol=1e-12, atol=1e-13)


@needs_cython
def test_whole_runs_agree_across_backends():
    code = (
        "from fkpp_nonlocal import *;"
        "s,f=run(Kernel.step(0.25),InitialData(),SimConfig(t_end=4,dt_max=0.05,large_courant=True,deterministic=True));"
        "import sys;sys.stdout.write(s.to_csv())"
    )
    outs = []
    for flag in ("1", "0"):
        env = dict(os.environ, FKPP_PURE_PYTHON=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout)
    a = np.array([[float(v) for v in line.split(",")] for line in outs[0].splitlines()[1:]])
    b = np.array([[float(v) for v in line.split(",")] for line in outs[1].splitlines()[1:]])
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)
