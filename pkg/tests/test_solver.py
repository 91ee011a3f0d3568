import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fkpp_nonlocal import bounds
from fkpp_nonlocal.diagnostics import fit_rate, mass
from fkpp_nonlocal.kernel import Kernel, facts
from fkpp_nonlocal.solver import (
    BlowUpError,
    DomainLimitError,
    DriftSpec,
    InitialData,
    SimConfig,
    extend,
    init,
    load_checkpoint,
    run,
    run_drift_diffusion,
    save_checkpoint,
    step,
)


def heat(t, x, shift=0.0):
    return np.exp(-((x - shift) ** 2) / (4 * t)) / math.sqrt(4 * math.pi * t)


def test_init_indicator_has_forty_unit_nodes():
    st0 = init(InitialData("indicator", a=1.0), SimConfig(dx=0.05))
    u = st0.field.values
    assert np.count_nonzero(u == 1.0) == 40 and np.count_nonzero(u) == 40
    assert st0.field.grid.x[0] == pytest.approx(-(1.0 + 20 * 0.05) + 0.025)


def test_init_rejections():
    with pytest.raises(bounds.HypothesisError):
        init(InitialData("bump", height=0.0), SimConfig())
    with pytest.raises(bounds.HypothesisError):
        init(InitialData("indicator", height=1.5), SimConfig())
    with pytest.raises(bounds.HypothesisError):
        init(InitialData("tabulated", values=(0.2, -0.1, 0.0), x_start=-1, spacing=1), SimConfig())


def test_tabulated_u0_mass():
    vals = np.array([0.0, 0.2, 0.7, 1.0, 0.7, 0.2, 0.0])
    h = 0.5
    u0 = InitialData("tabulated", values=tuple(vals), x_start=-1.5, spacing=h)
    st0 = init(u0, SimConfig(dx=h))
    trap = h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
    assert mass(st0.field) == pytest.approx(trap, abs=1e-12)


@pytest.mark.parametrize("bad", [dict(dt_max=0.6), dict(dx=0), dict(cfl_advection=1.5), dict(scheme="RK4"), dict(reaction="cubic")])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        SimConfig(**bad)


def test_pure_heat_equation_matches_kernel():
    dx, dt = 0.05, 0.0025
    cfg = SimConfig(dx=dx, dt_max=dt, t_end=1.0, reaction="none", scheme="IMEX-CN", record_every=1.0)
    # start from the exact kernel at t = 0.1 to avoid the Dirac transient
    x = np.arange(-200, 200) * dx + dx / 2
    u0 = InitialData("tabulated", values=tuple(heat(0.1, x)), x_start=x[0], spacing=dx)
    _, f = run_drift_diffusion(DriftSpec("constant", 0.0, form="kfp"), u0, cfg)
    assert np.max(np.abs(f.values - heat(1.1, f.x))) < 2e-4


def test_constant_drift_is_a_translated_heat_kernel():
    dx, dt, A = 0.025, 0.002, 0.5
    cfg = SimConfig(dx=dx, dt_max=dt, t_end=1.0, reaction="none", scheme="IMEX-CN", record_every=1.0)
    x = np.arange(-400, 400) * dx + dx / 2
    u0 = InitialData("tabulated", values=tuple(heat(0.2, x)), x_start=x[0], spacing=dx)
    _, f = run_drift_diffusion(DriftSpec("constant", A, form="kfp"), u0, cfg)
    # first-order upwind adds numerical diffusion A dx / 2
    assert np.max(np.abs(f.values - heat(1.2, f.x, A))) < 5e-3


def test_zero_kernel_stays_in_unit_interval():
    cfg = SimConfig(t_end=10.0)
    state = init(InitialData(), cfg)
    k = Kernel.zero()
    while state.time < cfg.t_end:
        state = step(state, k, cfg)
        assert 0.0 <= state.field.values.min() and state.field.values.max() <= 1.0


def test_zero_duration_run_has_one_record():
    series, f = run(Kernel.zero(), InitialData(), SimConfig(t_end=0.0))
    assert len(series) == 1 and f.time == 0.0


def test_keller_segel_respects_linf_bound_and_mass_identity():
    series, _ = run(Kernel.keller_segel(0.5, 1.0), InitialData(), SimConfig(t_end=15.0))
    assert series.column("u_max").max() <= 2.0 + 0.02
    assert series.column("mass_residual").max() <= 10.0


def test_domain_grows_and_edges_stay_small():
    cfg = SimConfig(t_end=10.0)
    series, f = run(Kernel.zero(), InitialData(), cfg)
    assert f.values[0] < cfg.edge_tol and f.values[-1] < cfg.edge_tol
    widths = series.column("domain_width")
    assert widths[-1] > widths[0] and np.all(np.diff(widths) >= 0)


@pytest.mark.parametrize(
    "kernel", [Kernel.keller_segel(0.5, 1.0), Kernel.compact_bump(-0.8, 2.0), Kernel.power_law(0.5, 0.5), Kernel.step(0.2)], ids=str
)
def test_symmetry_is_preserved(kernel):
    cfg = SimConfig(t_end=5.0, record_every=1.0)
    values = []
    run(kernel, InitialData("bump", a=2.0, height=0.8), cfg, on_record=lambda f: values.append(f.values.copy()))
    for v in values:
        assert np.max(np.abs(v - v[::-1])) < 1e-9


@pytest.mark.parametrize("kernel", [Kernel.compact_bump(-0.8, 2.0), Kernel.step(0.25), Kernel.power_law(1.0, 0.5)], ids=str)
def test_mass_increases_for_negative_chemotaxis(kernel):
    assert facts(kernel).J <= 0
    cfg = SimConfig(t_end=6.0, record_every=0.25, large_courant=facts(kernel).k_inf > 0)
    series, _ = run(kernel, InitialData(), cfg)
    assert np.all(np.diff(series.column("P")) >= -1e-8)


def _restrict(fine, coarse):
    # average fine cells onto the coarse cells they tile (cell-centred grids nest)
    r = int(round(coarse.grid.dx / fine.grid.dx))
    off = int(round((coarse.grid.x0 - fine.grid.x0) / fine.grid.dx - (r - 1) / 2))
    return fine.values[off : off + r * coarse.grid.n].reshape(-1, r).mean(axis=1)


def test_advective_refinement_is_at_least_first_order():
    k = Kernel.keller_segel(0.3, 1.0)
    u0 = InitialData("bump", a=3.0, height=0.5)
    finals = {}
    for dx in (0.1, 0.05, 0.025):
        cfg = SimConfig(dx=dx, dt_max=dx / 2, t_end=1.0, scheme="IMEX-CN", record_every=1.0, extension_chunk=2.0)
        finals[dx] = run(k, u0, cfg)[1]
    c, m, f = finals[0.1], finals[0.05], finals[0.025]
    e1 = np.max(np.abs(_restrict(m, c) - c.values))
    e2 = np.max(np.abs(_restrict(f, m) - m.values))
    # upwinding makes the scheme first order once advection matters; the
    # ratio approaches 2 from below (1.79, 1.60, 1.79, 1.89 down to dx = 0.003)
    assert e1 / e2 > 1.5


def test_crank_nicolson_diffusion_refinement_ratio_near_four():
    finals = {}
    u0 = InitialData("bump", a=3.0, height=1.0)
    for dx in (0.1, 0.05, 0.025):
        cfg = SimConfig(dx=dx, dt_max=dx / 2, t_end=1.0, scheme="IMEX-CN", record_every=1.0, reaction="logistic")
        _, finals[dx] = run(Kernel.zero(), u0, cfg)

    def at(f, x):
        return np.interp(x, f.x, f.values)

    x = np.linspace(-4, 4, 81)
    e1 = np.max(np.abs(at(finals[0.1], x) - at(finals[0.05], x)))
    e2 = np.max(np.abs(at(finals[0.05], x) - at(finals[0.025], x)))
    assert 3.0 < e1 / e2 < 5.0


def test_blow_up_is_reported():
    cfg = SimConfig(t_end=20.0, linf_cap=1.5)
    with pytest.raises(BlowUpError) as err:
        run(Kernel.keller_segel(4.0, 0.2), InitialData(), cfg)
    assert err.value.value > 1.5 and err.value.time > 0


def test_domain_limit_carries_partial_results():
    cfg = SimConfig(t_end=20.0, max_nodes=400)
    with pytest.raises(DomainLimitError) as err:
        run(Kernel.zero(), InitialData(), cfg)
    assert err.value.series is not None and len(err.value.series) >= 1
    assert err.value.final.grid.n <= 400


def test_checkpoint_resume_is_bit_identical(tmp_path):
    k = Kernel.keller_segel(0.5, 1.0)
    full_cfg = SimConfig(t_end=6.0, deterministic=True)
    _, full = run(k, InitialData(), full_cfg)

    half_cfg = SimConfig(t_end=3.0, deterministic=True)
    _, mid = run(k, InitialData(), half_cfg)
    from fkpp_nonlocal.solver import SimState

    path = save_checkpoint(tmp_path / "mid.npz", SimState(mid, 7, 0.05, 2))
    resumed = load_checkpoint(path)
    assert resumed.step_count == 7 and resumed.extensions == 2 and resumed.time == 3.0
    series, end = run(k, InitialData(), full_cfg, state=resumed)
    assert series.t[0] == 3.0 and series.t[-1] == 6.0
    assert end.grid == full.grid
    assert np.array_equal(end.values, full.values)


def test_deterministic_runs_are_byte_identical():
    cfg = SimConfig(t_end=5.0, deterministic=True)
    a, _ = run(Kernel.keller_segel(0.5, 1.0), InitialData(), cfg)
    b, _ = run(Kernel.keller_segel(0.5, 1.0), InitialData(), cfg)
    assert a.to_csv() == b.to_csv()


def test_drift_spec_norms():
    d = DriftSpec("sinusoid", 0.5, 0.25)
    assert d.norms == (0.5, 0.25, 0.125)
    x = np.linspace(-50, 50, 10001)
    assert np.max(np.abs(d.v(x))) <= 0.5 and np.max(np.abs(d.v_x(x))) <= 0.25
    with pytest.raises(ValueError):
        DriftSpec("sinusoid", 0.5, 0.25, A2=0.3)


def test_sinusoidal_gamma_obeys_hill_upper_bound():
    # Gamma solves G_t + (v_x G)_x = G_xx; the transport velocity v_x is bounded by A1
    dx = 0.05
    cfg = SimConfig(dx=dx, dt_max=0.005, t_end=1.0, reaction="none", record_every=1.0)
    _, f = run_drift_diffusion(DriftSpec("sinusoid", 0.5, 0.25, form="gamma"), InitialData("gaussian", sigma=3 * dx), cfg)
    A = 0.25
    for xi, gi in zip(f.x, f.values):
        up = bounds.hill_upper(A, 1.0, xi)
        if bounds.is_number(up) and abs(xi) > 1.0:
            assert gi <= up * 1.02


def test_large_courant_step_kernel_front_stays_bounded():
    cfg = SimConfig(t_end=8.0, dt_max=0.05, large_courant=True, record_every=0.25)
    series, f = run(Kernel.step(0.25), InitialData(), cfg)
    assert series.column("u_max").max() <= 1.0 + 1e-12
    assert f.values.min() >= 0.0
    fit = fit_rate(series, "P", "exponential")
    assert fit.coefficient > 0


def test_extend_pads_with_zeros():
    st0 = init(InitialData(), SimConfig())
    wide = extend(st0, 1.0)
    k = (wide.field.grid.n - st0.field.grid.n) // 2
    assert k == 10 and wide.extensions == 1
    assert np.array_equal(wide.field.values[k:-k], st0.field.values)
    assert wide.field.grid.x[k] == pytest.approx(st0.field.grid.x[0])


@settings(max_examples=15, deadline=None)
@given(chi=st.floats(0.05, 0.9), height=st.floats(0.1, 1.0))
def test_positivity_and_linf_for_keller_segel(chi, height):
    k = Kernel.keller_segel(chi, 1.0)
    series, f = run(k, InitialData("bump", height=height), SimConfig(t_end=3.0))
    assert f.values.min() >= 0.0
    assert series.column("u_max").max() <= bounds.linf_bound(chi) + 0.02
