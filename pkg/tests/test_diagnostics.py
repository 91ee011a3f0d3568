import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fkpp_nonlocal.convolve import Field, Grid
from fkpp_nonlocal.diagnostics import (
    DataError,
    TimeSeries,
    bulk_burning,
    fit_arrays,
    fit_rate,
    front,
    level_measures,
    mass,
)


def indicator(dx=0.001, height=1.0, half=3.0):
    g = Grid.symmetric(half, dx)
    return Field(g, np.where(np.abs(g.x) <= 1.0, height, 0.0))


def test_mass_and_burning_examples():
    f = indicator()
    assert mass(f) == pytest.approx(2.0, abs=2e-3)
    assert bulk_burning(f) == 0.0
    z = Field(Grid.symmetric(2.0, 0.1), np.zeros(41))
    assert (mass(z), bulk_burning(z)) == (0.0, 0.0)
    h = indicator(height=0.5)
    assert mass(h) == pytest.approx(1.0, abs=2e-3)
    assert bulk_burning(h) == pytest.approx(0.5, abs=2e-3)


def test_front_examples():
    dx = 0.01
    left, right = front(indicator(dx), 0.5)
    assert abs(left + 1) <= dx and abs(right - 1) <= dx
    assert front(indicator(height=0.3), 0.5) is None
    with pytest.raises(ValueError):
        front(indicator(), 1.0)


def test_front_tracks_a_shift():
    g = Grid.symmetric(30.0, 0.1)
    profile = lambda x: 1 / (1 + np.exp(x - 5.0))  # noqa: E731
    s = 3.37
    a = front(Field(g, profile(g.x) * (g.x > -20)), 0.3)[1]
    b = front(Field(g, profile(g.x - s) * (g.x > -20)), 0.3)[1]
    assert abs((b - a) - s) <= 0.05


def test_level_measure_examples():
    G, B, T = level_measures(indicator(0.001), 0.1)
    assert G == pytest.approx(2.0, abs=3e-3) and B == pytest.approx(0.0, abs=3e-3)
    g = Grid.symmetric(5.0, 0.1)
    G, B, T = level_measures(Field(g, np.full(g.n, 0.5)), 0.1)
    assert B == pytest.approx(g.width) and G == 0.0 and T == pytest.approx(0.0)


def test_bad_set_bounded_by_burning():
    g = Grid.symmetric(40.0, 0.05)
    u = 1 / (1 + np.exp(np.abs(g.x) - 10))
    f = Field(g, u)
    eps = 0.1
    _, B, _ = level_measures(f, eps)
    assert eps * (1 - eps) * B <= bulk_burning(f) + g.dx


@given(seed=st.integers(0, 2**16))
def test_burning_bounds_for_unit_interval_fields(seed):
    rng = np.random.default_rng(seed)
    g = Grid(-2.0, 0.05, 81)
    f = Field(g, rng.random(g.n))
    V, P = bulk_burning(f), mass(f)
    assert V <= P + 1e-15 and V <= g.width / 4 + 1e-15


@given(h=st.floats(0.05, 1.0), w=st.floats(0.3, 4.0))
def test_even_fields_have_symmetric_fronts(h, w):
    g = Grid.symmetric(10.0, 0.1)
    f = Field(g, h * np.exp(-((g.x / w) ** 2)))
    fr = front(f, 0.04)
    assert fr is not None
    assert abs(fr[0] + fr[1]) <= g.dx


def test_fit_examples():
    t = np.linspace(1.0, 20.0, 40)
    c, b, r2 = fit_arrays(t, 2.0 * t, "linear")
    assert c == pytest.approx(2.0, abs=1e-10) and r2 == pytest.approx(1.0, abs=1e-12)
    q, _, r2 = fit_arrays(t, 5 * t**2, "power")
    assert q == pytest.approx(2.0, abs=1e-10) and r2 == pytest.approx(1.0, abs=1e-12)
    r, _, _ = fit_arrays(t, 3 * np.exp(0.4 * t), "exponential")
    assert r == pytest.approx(0.4, abs=1e-10)
    c, _, _ = fit_arrays(t, 2 * t - 1.5 * np.log(t) + 4, "log-corrected")
    assert c == pytest.approx(2.0, abs=1e-10)
    with pytest.raises(ValueError):
        fit_arrays(t, t, "cubic")


def synthetic_series(n=41, speed=2.0):
    s = TimeSeries(levels=(0.1,))
    for k in range(n):
        t = 0.5 * k
        g = Grid.symmetric(5 + speed * t + 5, 0.1)
        u = np.where(np.abs(g.x) <= 1 + speed * t, 1.0, 0.0)
        s.record(Field(g, u, t))
    return s


def test_fit_rate_window_and_errors():
    s = synthetic_series()
    fit = fit_rate(s, "front_right", "linear")
    assert fit.window == (10.0, 20.0)
    assert fit.coefficient == pytest.approx(2.0, abs=0.02)
    with pytest.raises(DataError):
        fit_rate(s, "front_middle")
    with pytest.raises(DataError):
        fit_rate(s, window=(0.0, 2.0))
    with pytest.raises(DataError):
        fit_rate(TimeSeries())


def test_record_times_strictly_increase():
    s = synthetic_series(3)
    g = Grid.symmetric(3.0, 0.1)
    with pytest.raises(DataError):
        s.record(Field(g, np.zeros(g.n), 1.0))


def test_csv_header_and_values():
    s = synthetic_series(3)
    text = s.to_csv()
    lines = text.splitlines()
    assert lines[0] == "t,P,V,u_max,front_left_0.1,front_right_0.1,G_eps,B_eps,T_eps,domain_width"
    assert len(lines) == 4
    row = [float(v) for v in lines[1].split(",")]
    assert row[0] == 0.0 and row[3] == 1.0


def test_csv_missing_front_is_nan():
    s = TimeSeries(levels=(0.5, 0.1))
    g = Grid.symmetric(3.0, 0.1)
    s.record(Field(g, np.full(g.n, 0.2)))
    row = s.to_csv().splitlines()[1].split(",")
    assert math.isnan(float(row[4])) and not math.isnan(float(row[6]))
