"""IMEX finite-volume integration of u_t + [(K*u) u]_x = u_xx + f(u).

One step:

1. edge velocities v = K*u (midpoint rule, see :mod:`convolve`);
2. conservative first-order upwind advection, explicit (Courant number <= cfl);
3. reaction f(u) explicit;
4. diffusion implicit (backward Euler or Crank-Nicolson) with homogeneous
   Dirichlet data one cell outside the grid.

With ``large_courant`` steps 2 and 3 are replaced by a forward Lagrangian
remap: the source is added first, then every edge moves by v dt and the mass
of each cell is spread evenly over the cell's image.  The time step is then
limited by the velocity gradient only, which is what makes the accelerating
fronts of non-integrable kernels affordable.

The domain is widened symmetrically with zero fill whenever the profile
reaches the edges, so the Cauchy problem is followed as long as memory
allows.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from . import _backend
from .bounds import HypothesisError
from .convolve import Convolver, Field, Grid
from .diagnostics import TimeSeries, bulk_burning, mass
from .kernel import Kernel

log = logging.getLogger(__name__)

SCHEMES = ("IMEX-BE", "IMEX-CN")
REACTIONS = ("logistic", "linear-growth", "none")
NEGATIVE_TOL = -1e-13


class SolverError(RuntimeError):
    """Base class for simulation failures."""


class BlowUpError(SolverError):
    def __init__(self, time: float, location: float, value: float):
        super().__init__(f"max u = {value:.6g} exceeds linf_cap at t = {time:.6g}, x = {location:.6g}")
        self.time = time
        self.location = location
        self.value = value


class NumericalError(SolverError):
    """NaN/inf values or negative undershoot beyond round-off."""


class DomainLimitError(SolverError):
    """The domain would exceed ``max_nodes``; partial results are attached."""

    def __init__(self, message: str, series: TimeSeries | None = None, final: Field | None = None):
        super().__init__(message)
        self.series = series
        self.final = final


@dataclass(frozen=True)
class SimConfig:
    dx: float = 0.1
    dt_max: float = 0.05
    t_end: float = 10.0
    cfl_advection: float = 0.4
    edge_tol: float = 1e-8
    extension_chunk: float | None = None  # default: 20 cells
    scheme: str = "IMEX-BE"
    reaction: str = "logistic"
    linf_cap: float = 50.0
    record_every: float = 0.5
    # allow edges to draw mass from several cells per step; dt is then limited
    # by cfl_advection / max (K*u)_x instead of cfl_advection * dx / max |K*u|
    large_courant: bool = False
    extension_growth: float = 0.0  # extra widening as a fraction of the width
    max_nodes: int = 2_500_000
    conv_method: str = "fft"
    deterministic: bool = False
    levels: tuple[float, ...] = (0.1,)
    level_eps: float = 0.1

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if not 0 < self.dt_max <= 0.5:
            raise ValueError("dt_max must lie in (0, 0.5]")
        if not self.t_end >= 0:
            raise ValueError("t_end must be non-negative")
        if not 0 < self.cfl_advection <= 1:
            raise ValueError("cfl_advection must lie in (0, 1]")
        if not self.edge_tol > 0:
            raise ValueError("edge_tol must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.reaction not in REACTIONS:
            raise ValueError(f"reaction must be one of {REACTIONS}")
        if not self.record_every > 0:
            raise ValueError("record_every must be positive")
        if self.extension_chunk is not None and not self.extension_chunk > 0:
            raise ValueError("extension_chunk must be positive")
        object.__setattr__(self, "levels", tuple(float(m) for m in self.levels))

    @property
    def chunk(self) -> float:
        return 20 * self.dx if self.extension_chunk is None else self.extension_chunk

    def with_overrides(self, **kw: Any) -> "SimConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class InitialData:
    """Initial profile.

    kind = "indicator"  u0 = height on |x| < a
           "bump"       u0 = height cos^2(pi x / (2a)) on |x| <= a
           "tabulated"  linear interpolation of ``values`` at x_start + k*spacing
           "gaussian"   unit-mass Gaussian of width ``sigma`` centred at ``center``
                        (near-Dirac data for the linear drift-diffusion runs)
    """

    kind: str = "indicator"
    a: float = 1.0
    height: float = 1.0
    values: tuple[float, ...] = ()
    x_start: float = 0.0
    spacing: float = 0.0
    sigma: float | None = None
    center: float = 0.0

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "InitialData":
        rec = dict(rec)
        if "C" in rec:
            rec["height"] = rec.pop("C")
        if "values" in rec:
            rec["values"] = tuple(float(v) for v in rec["values"])
        return cls(**rec)

    def to_record(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind in ("indicator", "bump"):
            out.update(a=self.a, height=self.height)
        elif self.kind == "tabulated":
            out.update(values=list(self.values), x_start=self.x_start, spacing=self.spacing)
        else:
            out.update(sigma=self.sigma, center=self.center)
        return out

    def support_radius(self, dx: float) -> float:
        if self.kind in ("indicator", "bump"):
            return self.a
        if self.kind == "tabulated":
            end = self.x_start + self.spacing * (len(self.values) - 1)
            return max(abs(self.x_start), abs(end))
        sigma = self.sigma if self.sigma is not None else 3 * dx
        return abs(self.center) + 10 * sigma

    def evaluate(self, x: np.ndarray, dx: float) -> np.ndarray:
        if self.kind == "indicator":
            return np.where(np.abs(x) < self.a, self.height, 0.0)
        if self.kind == "bump":
            return np.where(np.abs(x) <= self.a, self.height * np.cos(np.pi * x / (2 * self.a)) ** 2, 0.0)
        if self.kind == "tabulated":
            if len(self.values) < 2 or not self.spacing > 0:
                raise HypothesisError("tabulated u0 needs >= 2 values and a positive spacing")
            knots = self.x_start + self.spacing * np.arange(len(self.values))
            return np.interp(x, knots, np.asarray(self.values), left=0.0, right=0.0)
        if self.kind == "gaussian":
            s = self.sigma if self.sigma is not None else 3 * dx
            return np.exp(-((x - self.center) ** 2) / (2 * s * s)) / (s * math.sqrt(2 * math.pi))
        raise HypothesisError(f"unknown initial-data kind {self.kind!r}")


@dataclass
class SimState:
    field: Field
    step_count: int = 0
    last_dt: float = 0.0
    extensions: int = 0
    _conv: Convolver | None = field(default=None, repr=False, compare=False)

    @property
    def time(self) -> float:
        return self.field.time


# -- drift-diffusion ---------------------------------------------------------


@dataclass(frozen=True)
class DriftSpec:
    """Analytic drift for the linear problems.

    profile "sinusoid":  v(x) = A0 sin(x A1 / A0), so |v| <= A0, |v_x| <= A1,
                         |v_xx| <= A1^2 / A0 (= A2 when the triple is consistent)
    profile "constant":  v(x) = A0
    form "kfp":    u_t + (v u)_x = u_xx   (transport velocity v)
    form "gamma":  G_t + (v_x G)_x = G_xx (transport velocity v_x)
    """

    profile: str = "sinusoid"
    A0: float = 0.5
    A1: float = 0.25
    A2: float | None = None
    form: str = "gamma"

    def __post_init__(self):
        if self.profile not in ("sinusoid", "constant"):
            raise ValueError("drift profile must be 'sinusoid' or 'constant'")
        if self.form not in ("kfp", "gamma"):
            raise ValueError("drift form must be 'kfp' or 'gamma'")
        if self.profile == "sinusoid":
            if not self.A0 > 0:
                raise ValueError("sinusoidal drift needs A0 > 0")
            if self.A2 is not None and not math.isclose(self.A2, self.A1**2 / self.A0, rel_tol=1e-9):
                raise ValueError("inconsistent drift norms: sinusoid has A2 = A1^2 / A0")

    @property
    def norms(self) -> tuple[float, float, float]:
        if self.profile == "constant":
            return abs(self.A0), 0.0, 0.0
        return self.A0, self.A1, self.A1**2 / self.A0

    def v(self, x):
        if self.profile == "constant":
            return np.full_like(np.asarray(x, dtype=float), self.A0)
        return self.A0 * np.sin(np.asarray(x) * self.A1 / self.A0)

    def v_x(self, x):
        if self.profile == "constant":
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.A1 * np.cos(np.asarray(x) * self.A1 / self.A0)

    def transport(self, x):
        return self.v(x) if self.form == "kfp" else self.v_x(x)


# -- core step -----------------------------------------------------------------


def init(u0: InitialData, config: SimConfig, validate: bool = True) -> SimState:
    """Cell-centred grid on [-a - m, a + m] (m = extension chunk) holding u0.

    Nodes sit at (k + 1/2) dx, so the grid is symmetric about 0 and the
    indicator of [-a, a] has mass exactly 2a when a is a multiple of dx.
    """
    dx = config.dx
    half = u0.support_radius(dx) + config.chunk
    k = int(math.ceil(half / dx - 1e-9))
    grid = Grid(-(k - 0.5) * dx, dx, max(2 * k, 8))
    values = u0.evaluate(grid.x, dx)
    if validate:
        if np.any(values < 0):
            raise HypothesisError("u0 must be non-negative")
        top = float(values.max()) if values.size else 0.0
        if not top > 0:
            raise HypothesisError("u0 must be non-zero")
        if top > 1.0 + 1e-12:
            raise HypothesisError(f"max u0 = {top:.6g} exceeds 1")
    return SimState(Field(grid, values, 0.0))


def extend(state: SimState, length: float) -> SimState:
    """Widen the domain by ``length`` (rounded up to cells) on both sides."""
    f = state.field
    dx = f.grid.dx
    k = max(1, int(math.ceil(length / dx - 1e-9)))
    grid = Grid(f.grid.x0 - k * dx, dx, f.grid.n + 2 * k)
    values = np.concatenate([np.zeros(k), f.values, np.zeros(k)])
    return SimState(Field(grid, values, f.time), state.step_count, state.last_dt, state.extensions + 1)


def _convolver(state: SimState, kernel: Kernel, config: SimConfig) -> Convolver:
    c = state._conv
    if c is None or c.grid != state.field.grid or c.kernel != kernel:
        workers = 1 if config.deterministic else None
        c = Convolver(kernel, state.field.grid, config.conv_method, workers)
        state._conv = c
    return c


def _reaction(u: np.ndarray, kind: str) -> np.ndarray:
    if kind == "logistic":
        return u * (1.0 - u)
    if kind == "linear-growth":
        return u.copy()
    return np.zeros_like(u)


def _choose_dt(v: np.ndarray, dx: float, config: SimConfig, dt_cap: float) -> float:
    dt = min(config.dt_max, dt_cap)
    if config.large_courant:
        # cell images may not overlap, and no cell may be squeezed or
        # stretched by more than the cfl fraction in one step
        rate = float(np.max(np.abs(np.diff(v)))) / dx
        dt = min(dt, config.cfl_advection / max(rate, 1e-12))
    else:
        dt = min(dt, config.cfl_advection * dx / max(float(np.max(np.abs(v))), 1e-12))
    return dt


def _reach_clear(u: np.ndarray, courant: np.ndarray, tol: float) -> bool:
    # no mass may leave through the outer edges during the step
    reach_l = int(math.ceil(max(0.0, -courant[0], -float(courant[: courant.size // 2].min())))) + 1
    reach_r = int(math.ceil(max(0.0, courant[-1], float(courant[courant.size // 2 :].max())))) + 1
    return bool(u[:reach_l].max() < tol and u[-reach_r:].max() < tol)


def _explicit(u: np.ndarray, courant: np.ndarray, dt: float, config: SimConfig) -> np.ndarray:
    """dt times the explicit right-hand side: upwind flux divergence plus reaction."""
    flux = _backend.core.upwind_fluxes(u, courant)
    return -(flux[1:] - flux[:-1]) + dt * _reaction(u, config.reaction)


def _diffuse(star: np.ndarray, old: np.ndarray | None, dt: float, dx: float, theta: float) -> np.ndarray:
    """Solve (1 - theta dt D2) new = star + (1 - theta) dt D2 old with zero Dirichlet data."""
    n = star.size
    r = theta * dt / (dx * dx)
    rhs = star
    if theta < 1.0:
        base = star if old is None else old
        lap = -2.0 * base
        lap[1:] += base[:-1]
        lap[:-1] += base[1:]
        rhs = star + (1.0 - theta) * dt / (dx * dx) * lap
    off = np.full(n - 1, -r)
    return _backend.core.tridiag_solve(off, np.full(n, 1.0 + 2.0 * r), off, np.ascontiguousarray(rhs))


def _advance(state: SimState, velocity: Callable[[SimState], np.ndarray], config: SimConfig, dt_cap: float) -> SimState:
    core = _backend.core
    for _ in range(64):
        f = state.field
        dx = f.grid.dx
        u = f.values
        v = velocity(state)
        dt = _choose_dt(v, dx, config, dt_cap)
        courant = v * (dt / dx)
        if np.max(np.abs(courant)) <= 1.0 or _reach_clear(u, courant, config.edge_tol):
            break
        reach = float(np.max(np.abs(courant))) + 2
        state = _extend_checked(state, max(config.chunk, 2 * reach * dx, config.extension_growth * f.grid.width), config)
    else:  # pragma: no cover - velocities grow with width only for absurd kernels
        raise NumericalError("could not make room for the advective reach")

    if config.large_courant:
        # the source is added before transport so that it travels with the
        # material it was produced in
        w = u + dt * _reaction(u, config.reaction)
        flux = core.remap_fluxes(w, courant)
        new = _diffuse(w - (flux[1:] - flux[:-1]), None, dt, dx, 1.0 if config.scheme == "IMEX-BE" else 0.5)
    elif config.scheme == "IMEX-BE":
        new = _diffuse(u + _explicit(u, courant, dt, config), None, dt, dx, 1.0)
    else:
        # Crank-Nicolson diffusion with a Heun predictor-corrector on the
        # explicit part, second order in time
        e0 = _explicit(u, courant, dt, config)
        pred = _diffuse(u + e0, u, dt, dx, 0.5)
        v1 = velocity(SimState(Field(f.grid, np.maximum(pred, 0.0), f.time + dt), _conv=state._conv))
        e1 = _explicit(pred, v1 * (dt / dx), dt, config)
        new = _diffuse(u + 0.5 * (e0 + e1), u, dt, dx, 0.5)

    t_new = f.time + dt
    if not np.all(np.isfinite(new)):
        raise NumericalError(f"non-finite values at t = {t_new:.6g}")
    lo = float(new.min())
    if lo < NEGATIVE_TOL:
        i = int(np.argmin(new))
        raise NumericalError(f"negative undershoot {lo:.3g} at t = {t_new:.6g}, x = {f.grid.x[i]:.6g}")
    np.maximum(new, 0.0, out=new)
    top = int(np.argmax(new))
    if new[top] > config.linf_cap:
        raise BlowUpError(t_new, float(f.grid.x[top]), float(new[top]))
    return SimState(Field(f.grid, new, t_new), state.step_count + 1, dt, state.extensions, state._conv)


def _extend_checked(state: SimState, length: float, config: SimConfig) -> SimState:
    k = max(1, int(math.ceil(length / state.field.grid.dx - 1e-9)))
    if state.field.grid.n + 2 * k > config.max_nodes:
        raise DomainLimitError(
            f"domain would reach {state.field.grid.n + 2 * k} nodes (max_nodes = {config.max_nodes})"
        )
    return extend(state, length)


def step(state: SimState, kernel: Kernel, config: SimConfig, dt_cap: float = math.inf) -> SimState:
    """Advance the nonlocal equation by one step.

    dt = min(dt_max, cfl * dx / max|K*u|, dt_cap); with ``large_courant`` the
    advective bound is cfl / max (K*u)_x instead.
    """

    def velocity(s: SimState) -> np.ndarray:
        return _convolver(s, kernel, config).edges(s.field.values)

    return _advance(state, velocity, config, dt_cap)


def step_drift(state: SimState, drift: DriftSpec, config: SimConfig, dt_cap: float = math.inf) -> SimState:
    def velocity(s: SimState) -> np.ndarray:
        g = s.field.grid
        edges = g.x0 - 0.5 * g.dx + g.dx * np.arange(g.n + 1)
        return np.asarray(drift.transport(edges), dtype=float)

    return _advance(state, velocity, config, dt_cap)


def needs_extension(state: SimState, config: SimConfig) -> bool:
    u = state.field.values
    return bool(u[0] >= config.edge_tol or u[-1] >= config.edge_tol)


def _integrate(
    state: SimState,
    advance: Callable[[SimState, float], SimState],
    config: SimConfig,
    series: TimeSeries,
    on_record: Callable[[Field], None] | None = None,
) -> SimState:
    """Step to t_end, widening the domain and recording on the way."""
    dx = config.dx
    t_end = config.t_end
    tiny = 1e-12 * max(1.0, t_end)
    k_rec = int(math.floor(state.time / config.record_every + 1e-9)) + 1
    worst = 0.0
    steps_in_interval = 0
    try:
        while state.time < t_end - tiny:
            next_rec = min(k_rec * config.record_every, t_end)
            P0 = mass(state.field)
            V0 = bulk_burning(state.field) if config.reaction == "logistic" else _source_mass(state.field, config.reaction)
            new = advance(state, next_rec - state.time)
            dt = new.last_dt
            resid = abs(mass(new.field) - P0 - dt * V0) / (dt * (dt + dx * dx))
            worst = max(worst, resid)
            steps_in_interval += 1
            state = new
            if needs_extension(state, config):
                state = _extend_checked(
                    state, max(config.chunk, config.extension_growth * state.field.grid.width), config
                )
            if state.time >= next_rec - tiny:
                # land exactly on the record time
                state.field.time = next_rec
                series.record(state.field, worst, steps_in_interval)
                if on_record is not None:
                    on_record(state.field)
                worst = 0.0
                steps_in_interval = 0
                k_rec += 1
    except DomainLimitError as exc:
        exc.series, exc.final = series, state.field
        raise
    return state


def _source_mass(f: Field, reaction: str) -> float:
    if reaction == "linear-growth":
        return mass(f)
    return 0.0


def run(
    kernel: Kernel,
    u0: InitialData,
    config: SimConfig,
    state: SimState | None = None,
    on_record: Callable[[Field], None] | None = None,
) -> tuple[TimeSeries, Field]:
    """Simulate the nonlocal equation up to ``config.t_end``.

    Returns the recorded diagnostics and the final profile.  Pass ``state`` to
    resume from a checkpoint; ``on_record`` sees the profile at every record
    time after the initial one.
    """
    series = TimeSeries(config.levels, config.level_eps)
    if state is None:
        state = init(u0, config)
    series.record(state.field)
    state = _integrate(state, lambda s, cap: step(s, kernel, config, cap), config, series, on_record)
    return series, state.field


def run_drift_diffusion(
    drift: DriftSpec,
    u0: InitialData,
    config: SimConfig,
    on_record: Callable[[Field], None] | None = None,
) -> tuple[TimeSeries, Field]:
    """Linear drift-diffusion (reaction ``none`` or ``linear-growth``)."""
    if config.reaction == "logistic":
        config = replace(config, reaction="none")
    series = TimeSeries(config.levels, config.level_eps)
    state = init(u0, config, validate=u0.kind != "gaussian")
    series.record(state.field)
    state = _integrate(state, lambda s, cap: step_drift(s, drift, config, cap), config, series, on_record)
    return series, state.field


# -- checkpoints ---------------------------------------------------------------


def save_checkpoint(path, state: SimState) -> Path:
    """Write an ``.npz`` holding grid, time, values and step counters.

    Arrays are stored as raw float64, so a resumed sequential run is
    bit-identical to an uninterrupted one.
    """
    path = Path(path)
    g = state.field.grid
    np.savez(
        path,
        x0=np.float64(g.x0),
        dx=np.float64(g.dx),
        n=np.int64(g.n),
        time=np.float64(state.time),
        values=state.field.values,
        step_count=np.int64(state.step_count),
        last_dt=np.float64(state.last_dt),
        extensions=np.int64(state.extensions),
    )
    return path if path.suffix == ".npz" else path.with_suffix(path.suffix + ".npz")


def load_checkpoint(path) -> SimState:
    with np.load(path) as z:
        grid = Grid(float(z["x0"]), float(z["dx"]), int(z["n"]))
        f = Field(grid, z["values"].copy(), float(z["time"]))
        return SimState(f, int(z["step_count"]), float(z["last_dt"]), int(z["extensions"]))
