"""Parameter sweeps over kernel families: one CSV row per grid point.

Sweep file::

    name: chi-inverse-d
    kernel: {family: keller-segel}
    grid: {chi: [0.001, 0.01, 0.1]}           # cartesian product
    tie: {d: {param: chi, power: -1}}         # d = scale * chi^power
    normalize: {excess_over_chi2: {param: chi, power: 2}}
    u_inf: null                               # default 1/(1 - J)
    measure: false                            # or a scenario 'sim' mapping

With ``measure`` set, every point is also simulated and the fitted front speed
is added (points run in parallel worker processes).
"""
from __future__ import annotations

import csv
import io
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any

from ..bounds import cstar
from ..diagnostics import fit_rate
from ..kernel import Kernel, KernelError, facts
from ..solver import InitialData, SimConfig, run
from .config import ConfigError

MAX_POINTS = 10_000
BOUND_COLUMNS = (
    "J",
    "u_inf",
    "cstar_term1",
    "cstar_term2",
    "cstar_term3",
    "cstar",
    "cstar_minus_2",
    "eps_argmin",
    "linf_bound",
    "plateau_upper",
    "plateau_lower",
)


def expand(doc: dict[str, Any]) -> list[dict[str, float]]:
    grid = doc.get("grid") or {}
    if not isinstance(grid, dict):
        raise ConfigError("grid must map parameter names to value lists")
    names = list(grid)
    values = [list(v) if isinstance(v, (list, tuple)) else [v] for v in grid.values()]
    points = [dict(zip(names, combo)) for combo in itertools.product(*values)] if names else []
    if len(points) > MAX_POINTS:
        raise ConfigError(f"sweep has {len(points)} points, limit is {MAX_POINTS}")
    fixed = dict((doc.get("kernel") or {}).get("params") or {})
    ties = doc.get("tie") or {}
    out = []
    for p in points:
        q = dict(fixed)
        q.update(p)
        for name, rule in ties.items():
            try:
                base = float(q[rule["param"]])
                q[name] = float(rule.get("scale", 1.0)) * base ** float(rule.get("power", 1.0))
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"bad tie rule for {name!r}: {exc}") from None
        out.append(q)
    return out


def header(doc: dict[str, Any]) -> list[str]:
    cols = list((doc.get("grid") or {}).keys())
    cols += [k for k in (doc.get("tie") or {}) if k not in cols]
    cols += list(BOUND_COLUMNS)
    cols += list(doc.get("normalize") or {})
    if doc.get("measure"):
        cols += ["c_fit", "c_fit_r2", "u_max"]
    return cols


def _measure(kernel: Kernel, sim: dict[str, Any]) -> tuple[float, float, float]:
    cfg = SimConfig(**sim)
    series, _ = run(kernel, InitialData(), cfg)
    fit = fit_rate(series, "front_right", "linear")
    return fit.coefficient, fit.r_squared, float(series.column("u_max").max())


def evaluate_point(args) -> dict[str, str]:
    doc, params = args
    family = (doc.get("kernel") or {}).get("family")
    try:
        kernel = Kernel.from_record({"family": family, "params": params})
    except KernelError as exc:
        raise ConfigError(f"sweep point {params}: {exc}") from None
    row: dict[str, str] = {k: repr(float(v)) for k, v in params.items() if isinstance(v, (int, float))}
    measured = None
    if doc.get("measure"):
        sim = doc["measure"] if isinstance(doc["measure"], dict) else {}
        c, r2, top = _measure(kernel, sim)
        measured = top
        row.update(c_fit=repr(c), c_fit_r2=repr(r2), u_max=repr(top))
    u_inf = doc.get("u_inf")
    if u_inf is None and measured is not None and facts(kernel).J >= 1.0:
        u_inf = measured
    try:
        rep = cstar(kernel, u_inf)
    except ValueError as exc:
        raise ConfigError(f"sweep point {params}: {exc}") from None
    row.update(rep.flat())
    for name, rule in (doc.get("normalize") or {}).items():
        base = float(params[rule["param"]])
        row[name] = repr(rep.excess / base ** float(rule.get("power", 1.0)))
    return row


def run_sweep(doc: dict[str, Any], jobs: int = 1) -> str:
    points = expand(doc)
    cols = header(doc)
    tasks = [(doc, p) for p in points]
    if jobs > 1 and doc.get("measure") and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(evaluate_point, tasks))
    else:
        rows = [evaluate_point(t) for t in tasks]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([r.get(c, "") for c in cols])
    return buf.getvalue()


def default_jobs() -> int:
    return max(1, min(4, os.cpu_count() or 1))
