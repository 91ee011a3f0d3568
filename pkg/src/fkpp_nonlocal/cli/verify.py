"""Certification suites: closed-form bounds against analytic or simulated data."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import bounds
from ..convolve import Grid
from ..kernel import Kernel, facts
from ..solver import DriftSpec, InitialData, SimConfig, run_drift_diffusion

TARGETS = ("gamma-envelope", "hill", "fp-tail", "conv-bounds", "phi-max")


@dataclass
class Case:
    label: str
    margin: float  # >= 0 means the bound holds
    ok: bool


@dataclass
class VerifyReport:
    target: str
    cases: list[Case] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, label: str, margin: float, ok: bool | None = None) -> None:
        self.cases.append(Case(label, float(margin), bool(margin >= 0) if ok is None else bool(ok)))

    @property
    def violations(self) -> int:
        return sum(not c.ok for c in self.cases)

    @property
    def passed(self) -> bool:
        return bool(self.cases) and self.violations == 0

    def to_text(self) -> str:
        lines = [f"target={self.target}", f"cases={len(self.cases)}", f"violations={self.violations}"]
        if self.cases:
            worst = min(self.cases, key=lambda c: c.margin)
            lines.append(f"min_margin={worst.margin!r} ({worst.label})")
        lines += [f"note={n}" for n in self.notes]
        lines += [f"{'ok' if c.ok else 'VIOLATED'} {c.label} margin={c.margin!r}" for c in self.cases]
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines) + "\n"


# -- Hill sandwich -------------------------------------------------------------


def verify_hill(points: int = 1000, seed: int = 7) -> VerifyReport:
    """Constant-drift kernel exp(-(x - A t)^2 / 4t) / sqrt(4 pi t) between
    the Gaussian lower and upper bounds.  Margins are log ratios."""
    rep = VerifyReport("hill")
    rng = np.random.default_rng(seed)
    for A in (0.25, 1.0):
        done = 0
        while done < points:
            t = float(rng.uniform(0.05, 5.0))
            side = 1.0 if rng.random() < 0.5 else -1.0
            r = A * t + float(rng.uniform(1e-3, 8.0)) * math.sqrt(t)
            x = side * r
            up = bounds.hill_upper(A, t, r)
            low = bounds.hill_lower(A, t, r)
            if not (bounds.is_number(up) and bounds.is_number(low)):
                continue
            log_exact = -((x - A * t) ** 2) / (4 * t) - 0.5 * math.log(4 * math.pi * t)
            m = min(math.log(up) - log_exact, log_exact - math.log(low))
            rep.add(f"A={A:g} t={t:.4f} x={x:.4f}", m, m >= -1e-12)
            done += 1
    return rep


# -- Fokker-Planck tail --------------------------------------------------------


def verify_fp_tail(A: float = 0.5, T: float = 4.0, a: float = 1.0, dx: float = 0.1, dt: float = 0.01) -> VerifyReport:
    """u_t + (v u)_x = u_xx from the indicator of [-a, a]; u(T, x) below the
    tail bound at every node with |x| >= A T + a + 1 (margins relative)."""
    rep = VerifyReport("fp-tail")
    u0 = InitialData("indicator", a=a)
    cfg = SimConfig(dx=dx, dt_max=dt, t_end=T, reaction="none", record_every=T, deterministic=True)
    for drift in (DriftSpec("constant", A, form="kfp"), DriftSpec("sinusoid", A, 0.5 * A, form="kfp")):
        _, f = run_drift_diffusion(drift, u0, cfg)
        for xi, ui in zip(f.x, f.values):
            b = bounds.fp_tail(A, T, a, xi)
            if bounds.is_number(b):
                rep.add(f"{drift.profile} x={xi:.2f}", (b - ui) / b if b > 0 else -ui)
    return rep


# -- heat-kernel envelope rate ---------------------------------------------------


def gamma_excess_series(
    norms=(0.5, 0.25, 0.125),
    delta: float = 0.1,
    t_lo: float = 0.5,
    t_hi: float = 4.0,
    dx: float = 0.05,
    dt: float = 0.005,
    every: float = 0.25,
    floor: float = 1e-200,
) -> tuple[np.ndarray, np.ndarray]:
    """sup_x [log G(t, x) + log(t)/2 - envelope exponent] at each record time."""
    A0, A1, _ = norms
    drift = DriftSpec("sinusoid", A0, A1, form="gamma")
    cfg = SimConfig(dx=dx, dt_max=dt, t_end=t_hi, reaction="none", record_every=every, deterministic=True)
    times, sups = [], []

    def collect(f):
        if f.time < t_lo - 1e-9:
            return
        keep = f.values > floor
        x = f.x[keep]
        g = f.values[keep]
        env = np.array([bounds.gamma_envelope(norms, delta, f.time, xi) for xi in x])
        times.append(f.time)
        sups.append(float(np.max(np.log(g) + 0.5 * math.log(f.time) - env)))

    run_drift_diffusion(drift, InitialData("gaussian", sigma=3 * dx), cfg, on_record=collect)
    return np.array(times), np.array(sups)


def verify_gamma_envelope(max_slope: float = 0.01, **kw) -> VerifyReport:
    rep = VerifyReport("gamma-envelope")
    t, s = gamma_excess_series(**kw)
    slope = float(np.polyfit(t, s, 1)[0])
    for ti, si in zip(t, s):
        rep.add(f"t={ti:.2f} sup_x excess={si:.4f}", 0.0 if math.isfinite(si) else -1.0)
    rep.add(f"slope of sup vs t = {slope:.4f} <= {max_slope}", max_slope - slope)
    rep.notes.append("the constant C_delta is unknown: only boundedness and non-growth of the excess are checked")
    return rep


# -- convolution bounds ------------------------------------------------------------


def conv_kernels() -> list[Kernel]:
    tab = 0.3 * np.exp(-np.arange(0, 41) * 0.2)
    return [
        Kernel.zero(),
        Kernel.keller_segel(0.5, 1.0),
        Kernel.compact_bump(0.5, 2.0),
        Kernel.power_law(1.0, 0.5),
        Kernel.step(0.25),
        Kernel.tabulated(tab, 0.2),
    ]


def _smooth_field(rng, count: int = 4):
    centers = rng.uniform(-3.0, 3.0, count)
    widths = rng.uniform(0.3, 0.8, count)
    heights = rng.uniform(0.0, 1.0, count)
    return lambda x: sum(h * np.exp(-(((x - c) / w) ** 2)) for c, w, h in zip(centers, widths, heights))


def conv_refinement(
    kernel: Kernel,
    n_fields: int = 200,
    grids=(0.04, 0.02),
    ref_dx: float = 0.005,
    half_width: float = 8.0,
    seed: int = 11,
):
    """Per-grid maxima of |K*u|, |(K*u)_x| and their distance to a fine reference.

    Returns ``{dx: dict(conv=..., dconv=..., umax=..., err=...)}`` with one
    entry per field in each array, and ``err`` the largest nodal difference
    from the reference over all fields and both quantities.
    """
    from ..convolve import Field, conv, conv_dx

    rng = np.random.default_rng(seed)
    funcs = [_smooth_field(rng) for _ in range(n_fields)]
    out = {}
    ref_grid = Grid(-half_width, ref_dx, int(round(2 * half_width / ref_dx)) + 1)
    refs = []
    for fn in funcs:
        u = Field(ref_grid, fn(ref_grid.x))
        refs.append((conv(kernel, u).values, conv_dx(kernel, u).values))
    for dx in grids:
        stride = int(round(dx / ref_dx))
        g = Grid(-half_width, dx, int(round(2 * half_width / dx)) + 1)
        cmax, dmax, umax = [], [], []
        err = 0.0
        for fn, (rc, rd) in zip(funcs, refs):
            u = Field(g, fn(g.x))
            c = conv(kernel, u).values
            d = conv_dx(kernel, u).values
            cmax.append(np.max(np.abs(c)))
            dmax.append(np.max(np.abs(d)))
            umax.append(np.max(u.values))
            err = max(err, float(np.max(np.abs(c - rc[::stride]))), float(np.max(np.abs(d[1:-1] - rd[::stride][1:-1]))))
        out[dx] = dict(conv=np.array(cmax), dconv=np.array(dmax), umax=np.array(umax), err=err)
    return out


def verify_conv_bounds(n_fields: int = 200, min_ratio: float = 3.0) -> VerifyReport:
    rep = VerifyReport("conv-bounds")
    for k in conv_kernels():
        kf = facts(k)
        res = conv_refinement(k, n_fields)
        (dx1, r1), (dx2, r2) = sorted(res.items(), reverse=True)
        for dx, r in res.items():
            e = r["err"]
            if math.isfinite(kf.l1_norm):
                m = np.min(0.5 * kf.l1_norm * r["umax"] + e - r["conv"])
                rep.add(f"{k} dx={dx:g} |K*u| <= |K|_1 max u / 2 + err", m)
            m = np.min(abs(kf.J) * r["umax"] + e - r["dconv"])
            rep.add(f"{k} dx={dx:g} |(K*u)_x| <= |J| max u + err", m)
        if r2["err"] > 1e-13:
            ratio = r1["err"] / r2["err"]
            rep.add(f"{k} err({dx1:g}) / err({dx2:g}) = {ratio:.3f} >= {min_ratio}", ratio - min_ratio)
        else:
            rep.notes.append(f"{k}: discretisation error at round-off level ({r1['err']:.2e})")
    return rep


# -- rearrangement maximum ----------------------------------------------------------


def _cumulative(phi: np.ndarray, h: float):
    # exact antiderivative of the piecewise-linear phi (zero past the table)
    cells = 0.5 * h * (phi[:-1] + phi[1:])
    cum = np.concatenate(([0.0], np.cumsum(cells)))
    end = h * (phi.size - 1)

    def Phi(y):
        y = np.clip(np.asarray(y, dtype=float), 0.0, end)
        k = np.minimum((y // h).astype(int), phi.size - 2)
        r = y - k * h
        slope = (phi[k + 1] - phi[k]) / h
        return cum[k] + phi[k] * r + 0.5 * slope * r * r

    return Phi


def random_phi(rng, n: int = 200, h: float = 0.05) -> np.ndarray:
    drops = rng.exponential(1.0, n - 1) * (rng.random(n - 1) < 0.6)
    phi = rng.uniform(0.5, 3.0) - np.concatenate(([0.0], np.cumsum(drops))) * rng.uniform(0.005, 0.05)
    return np.maximum(phi, 0.0)


def random_w(rng, M: float, span: float):
    """Step function with values in [0, 2] and mass <= M: (left, right, height) arrays."""
    k = int(rng.integers(1, 6))
    if rng.random() < 0.3:
        # near-extremal: one high block close to the origin
        h = rng.uniform(1.0, 2.0)
        s = rng.exponential(0.05 * M)
        length = rng.uniform(0.5, 1.0) * M / h
        return np.array([s]), np.array([s + length]), np.array([h])
    cuts = np.sort(rng.uniform(0.0, span, 2 * k))
    lefts, rights = cuts[0::2], cuts[1::2]
    heights = rng.uniform(0.0, 2.0, k)
    mass = float(np.sum(heights * (rights - lefts)))
    if mass > M:
        heights *= M / mass
    return lefts, rights, heights


def verify_phi_max(n_phi: int = 20, n_w: int = 10_000, seed: int = 3) -> VerifyReport:
    rep = VerifyReport("phi-max")
    rng = np.random.default_rng(seed)
    h = 0.05
    for j in range(n_phi):
        phi = random_phi(rng, h=h)
        M = float(rng.uniform(0.2, 6.0))
        best = bounds.phi_max(phi, h, M)
        Phi = _cumulative(phi, h)
        span = h * (phi.size - 1)
        worst = -math.inf
        for _ in range(n_w):
            lefts, rights, heights = random_w(rng, M, span)
            val = float(np.sum(heights * (Phi(rights) - Phi(lefts))))
            worst = max(worst, val)
        extremal = 2.0 * float(Phi(M / 2.0))
        rep.add(f"phi#{j} M={M:.3f} brute-force sup {worst:.6f} <= {best:.6f}", best - worst, worst <= best * (1 + 1e-12))
        rep.add(f"phi#{j} extremal w attains {extremal:.8f}", 1e-6 - abs(extremal - best))
    return rep


def run_target(target: str) -> VerifyReport:
    suites = {
        "gamma-envelope": verify_gamma_envelope,
        "hill": verify_hill,
        "fp-tail": verify_fp_tail,
        "conv-bounds": verify_conv_bounds,
        "phi-max": verify_phi_max,
    }
    if target not in suites:
        raise KeyError(target)
    return suites[target]()
