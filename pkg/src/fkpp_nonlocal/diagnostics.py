"""Observables of a simulated profile and fits of propagation laws."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .convolve import Field

MODELS = ("linear", "log-corrected", "power", "exponential")


class DataError(ValueError):
    """Requested observable or window is not available in a time series."""


def _trapezoid(values: np.ndarray, dx: float) -> float:
    if values.size == 0:
        return 0.0
    return float(dx * (values.sum() - 0.5 * (values[0] + values[-1])))


def mass(f: Field) -> float:
    """P = integral of u (trapezoid rule)."""
    return _trapezoid(f.values, f.grid.dx)


def bulk_burning(f: Field) -> float:
    """V = integral of u(1 - u) (trapezoid rule)."""
    u = f.values
    return _trapezoid(u * (1.0 - u), f.grid.dx)


def front(f: Field, mu: float) -> tuple[float, float] | None:
    """Leftmost and rightmost crossings of the level ``mu``.

    Positions are linearly interpolated between the bracketing nodes; ``None``
    when ``max u < mu``.
    """
    if not 0.0 < mu < 1.0:
        raise ValueError("level mu must lie in (0, 1)")
    u = f.values
    x = f.grid.x
    idx = np.flatnonzero(u >= mu)
    if idx.size == 0:
        return None
    i, j = idx[0], idx[-1]
    if i == 0:
        left = x[0]
    else:
        left = x[i] - (u[i] - mu) / (u[i] - u[i - 1]) * f.grid.dx
    if j == u.size - 1:
        right = x[-1]
    else:
        right = x[j] + (u[j] - mu) / (u[j] - u[j + 1]) * f.grid.dx
    return float(left), float(right)


def _measure_above(u: np.ndarray, level: float, dx: float) -> float:
    # length of {u > level} for the piecewise-linear interpolant
    a, b = u[:-1], u[1:]
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    full = lo > level
    part = (hi > level) & ~full
    frac = np.zeros_like(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac[part] = (hi[part] - level) / (hi[part] - lo[part])
    return float(dx * (full.sum() + frac.sum()))


def level_measures(f: Field, eps: float) -> tuple[float, float, float]:
    """(|G|, |B|, |T ∩ domain|) for G = {u > 1-eps}, B = {eps < u < 1-eps}, T = {u <= eps}."""
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    dx = f.grid.dx
    width = f.grid.width
    above_hi = _measure_above(f.values, 1.0 - eps, dx)
    above_lo = _measure_above(f.values, eps, dx)
    return above_hi, above_lo - above_hi, width - above_lo


@dataclass
class Record:
    t: float
    P: float
    V: float
    u_max: float
    fronts: dict[float, tuple[float, float] | None]
    level_measures: tuple[float, float, float]
    domain_width: float
    mass_residual: float = 0.0
    steps: int = 0


@dataclass
class TimeSeries:
    levels: tuple[float, ...] = (0.1,)
    eps: float = 0.1
    records: list[Record] = field(default_factory=list)

    def record(self, f: Field, mass_residual: float = 0.0, steps: int = 0) -> Record:
        t = f.time
        if self.records and not t > self.records[-1].t:
            raise DataError("record times must be strictly increasing")
        rec = Record(
            t=t,
            P=mass(f),
            V=bulk_burning(f),
            u_max=float(f.values.max()),
            fronts={mu: front(f, mu) for mu in self.levels},
            level_measures=level_measures(f, self.eps),
            domain_width=f.grid.width,
            mass_residual=mass_residual,
            steps=steps,
        )
        self.records.append(rec)
        return rec

    def __len__(self) -> int:
        return len(self.records)

    @property
    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def front_positions(self, mu: float | None = None, side: str = "right") -> np.ndarray:
        mu = self.levels[0] if mu is None else mu
        if mu not in self.levels:
            raise DataError(f"level {mu} was not recorded (have {self.levels})")
        k = 0 if side == "left" else 1
        return np.array([np.nan if r.fronts[mu] is None else r.fronts[mu][k] for r in self.records])

    def header(self) -> list[str]:
        cols = ["t", "P", "V", "u_max"]
        for mu in self.levels:
            cols += [f"front_left_{mu:g}", f"front_right_{mu:g}"]
        return cols + ["G_eps", "B_eps", "T_eps", "domain_width"]

    def rows(self) -> Iterable[list[float]]:
        for r in self.records:
            row = [r.t, r.P, r.V, r.u_max]
            for mu in self.levels:
                fr = r.fronts[mu]
                row += [math.nan, math.nan] if fr is None else list(fr)
            row += list(r.level_measures) + [r.domain_width]
            yield row

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows():
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


@dataclass(frozen=True)
class RateFit:
    model: str
    coefficient: float
    intercept: float
    r_squared: float
    window: tuple[float, float]


def _least_squares(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0.0:
        raise DataError("degenerate fit window")
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    icpt = float(ym - slope * xm)
    ss_tot = float(((y - ym) ** 2).sum())
    ss_res = float(((y - (slope * x + icpt)) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return slope, icpt, r2


def fit_arrays(t: Sequence[float], y: Sequence[float], model: str) -> tuple[float, float, float]:
    """Least squares in the model's linearising coordinates: (coef, intercept, r^2)."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if model == "linear":
        return _least_squares(t, y)
    if model == "log-corrected":
        return _least_squares(t, y + 1.5 * np.log(t))
    if model == "power":
        c, b, r2 = _least_squares(np.log(t), np.log(y))
        return c, b, r2
    if model == "exponential":
        return _least_squares(t, np.log(y))
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def fit_rate(
    series: TimeSeries,
    observable: str = "front_right",
    model: str = "linear",
    window_fraction: float = 0.5,
    window: tuple[float, float] | None = None,
    mu: float | None = None,
) -> RateFit:
    """Fit a propagation law to ``front_right``/``front_left`` or ``P``.

    The default window is the last ``window_fraction`` of the recorded time
    span; an explicit ``window=(t_lo, t_hi)`` overrides it.
    """
    if not series.records:
        raise DataError("empty time series")
    t = series.t
    if observable in ("front_right", "front_left"):
        y = series.front_positions(mu, observable.split("_")[1])
    elif observable == "P":
        y = series.column("P")
    else:
        raise DataError(f"unknown observable {observable!r}")
    if window is None:
        t_lo = t[0] + (1.0 - window_fraction) * (t[-1] - t[0])
        window = (t_lo, t[-1])
    sel = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12) & np.isfinite(y)
    if model in ("log-corrected", "power"):
        sel &= t > 0
    if model in ("power", "exponential"):
        sel &= y > 0
    if sel.sum() < 10:
        raise DataError(f"need at least 10 records in window {window}, have {int(sel.sum())}")
    coef, icpt, r2 = fit_arrays(t[sel], y[sel], model)
    return RateFit(model, coef, icpt, r2, (float(window[0]), float(window[1])))
