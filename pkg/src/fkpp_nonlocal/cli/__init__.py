"""Command-line front end: ``fkpp-nonlocal run|bounds|verify|sweep``.

Exit status: 0 success, 1 a claim or bound failed, 2 bad configuration,
3 numerical failure (blow-up, NaN, undershoot, domain limit).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from ..bounds import HypothesisError, cstar, default_u_inf
from ..diagnostics import DataError, fit_rate
from ..kernel import facts
from ..solver import DomainLimitError, SimState, SolverError, load_checkpoint, run, save_checkpoint
from . import claims as claims_mod
from . import svgplot, verify
from .config import PRESETS, ConfigError, Scenario, load, parse_kernel_spec
from .sweep import default_jobs, run_sweep

EXIT_OK, EXIT_CLAIM, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _bounds_csv(flat: dict[str, str]) -> str:
    return ",".join(flat) + "\n" + ",".join(flat.values()) + "\n"


def scenario_report(sc: Scenario, series, final):
    kf = facts(sc.kernel)
    measured = float(series.column("u_max").max())
    u_inf = default_u_inf(kf.J, measured) if 0.0 <= kf.J < 1.0 else measured
    return kf, cstar(kf, u_inf)


def chart(sc: Scenario, series, report, kf) -> str:
    t = series.t
    mu = sc.levels[0]
    P = svgplot.Panel("mass P(t)", "t", "P", [svgplot.Line("P", t, series.column("P"))], logy=not kf.integrable)
    fr = svgplot.Panel(
        f"front positions, level {mu:g}",
        "t",
        "x",
        [
            svgplot.Line("right", t, series.front_positions(mu, "right")),
            svgplot.Line("left", t, series.front_positions(mu, "left")),
        ],
    )
    try:
        fit = fit_rate(series, "front_right", "linear", window_fraction=sc.window_fraction, mu=mu)
        tw = np.linspace(*fit.window, 50)
        fr.lines.append(svgplot.Line(f"fit c = {fit.coefficient:.3f}", tw, fit.coefficient * tw + fit.intercept, dashed=True))
    except DataError:
        pass
    um = svgplot.Panel("max u", "t", "u", [svgplot.Line("max u", t, series.column("u_max"))])
    if np.isfinite(report.linf_bound):
        um.lines.append(svgplot.Line("L-inf bound", t, np.full(t.size, report.linf_bound), dashed=True))
    if kf.k_inf > 0:
        um.lines.append(svgplot.Line("plateau upper", t, np.full(t.size, report.plateau_upper), dashed=True))
        um.lines.append(svgplot.Line("plateau lower", t, np.full(t.size, report.plateau_lower), dashed=True))
    return svgplot.render([P, fr, um])


def cmd_run(args, extra: list[str]) -> int:
    overrides = list(args.override or [])
    # shorthand flags such as --chi 0.5 become overrides
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        if "=" in tok:
            overrides.append(tok[2:])
        else:
            try:
                overrides.append(f"{tok[2:]}={next(it)}")
            except StopIteration:
                raise ConfigError(f"flag {tok} needs a value") from None
    sc = load(args.target, overrides)
    if args.deterministic:
        sc.config = replace(sc.config, deterministic=True)
    out = Path(args.out)
    state = None
    if args.resume:
        state = load_checkpoint(args.resume)
        if state.field.grid.dx != sc.config.dx:
            raise ConfigError("checkpoint dx differs from the scenario dx")
    try:
        series, final = run(sc.kernel, sc.u0, sc.config, state=state)
    except DomainLimitError as exc:
        if exc.series is not None:
            write_atomic(out / f"{sc.name}.partial.csv", exc.series.to_csv())
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    kf, report = scenario_report(sc, series, final)
    ctx = claims_mod.Context(series, final, report, kf, sc.window_fraction)
    results = claims_mod.evaluate(sc.claims, ctx)
    write_atomic(out / f"{sc.name}.csv", series.to_csv())
    write_atomic(out / f"{sc.name}.bounds.txt", report.to_text() + "\n" + _bounds_csv(report.flat()))
    write_atomic(out / f"{sc.name}.svg", chart(sc, series, report, kf))
    write_atomic(out / f"{sc.name}.claims.txt", "".join(r.line() + "\n" for r in results))
    write_atomic(out / f"{sc.name}.scenario.yaml", yaml.safe_dump(sc.source, sort_keys=False))
    if args.checkpoint:
        steps = int(sum(r.steps for r in series.records))
        save_checkpoint(args.checkpoint, SimState(final, steps, 0.0, 0))
    for r in results:
        print(r.line())
    return EXIT_CLAIM if any(r.failed for r in results) else EXIT_OK


def cmd_bounds(args, extra) -> int:
    if extra:
        raise ConfigError(f"unexpected arguments {extra}")
    kernel = parse_kernel_spec(args.kernel)
    try:
        rep = cstar(kernel, args.u_inf)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    text = f"kernel={kernel}\n" + rep.to_text()
    sys.stdout.write(text + "\n" + _bounds_csv(rep.flat()))
    if args.out:
        write_atomic(Path(args.out), text + "\n" + _bounds_csv(rep.flat()))
    return EXIT_OK


def cmd_verify(args, extra) -> int:
    if extra:
        raise ConfigError(f"unexpected arguments {extra}")
    rep = verify.run_target(args.target)
    text = rep.to_text()
    if args.out:
        write_atomic(Path(args.out), text)
    summary = text.splitlines()
    sys.stdout.write("\n".join(summary[:5] + summary[-1:]) + "\n" if not args.verbose else text)
    return EXIT_OK if rep.passed else EXIT_CLAIM


def cmd_sweep(args, extra) -> int:
    if extra:
        raise ConfigError(f"unexpected arguments {extra}")
    path = Path(args.file)
    if not path.exists():
        raise ConfigError(f"no such sweep file {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    jobs = 1 if args.deterministic else (args.jobs or default_jobs())
    text = run_sweep(doc, jobs)
    if args.out:
        write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fkpp-nonlocal", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--deterministic", action="store_true", help="single-threaded FFTs and sequential sweeps")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help=f"run a preset ({', '.join(PRESETS)}) or scenario file")
    r.add_argument("target")
    r.add_argument("--override", "-o", action="append", metavar="KEY=VALUE")
    r.add_argument("--out", default=".", help="output directory")
    r.add_argument("--checkpoint", help="write the final state to this .npz file")
    r.add_argument("--resume", help="continue from a checkpoint")
    r.add_argument("--deterministic", action="store_true", default=argparse.SUPPRESS)
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bounds", help="print the closed-form bounds for a kernel")
    b.add_argument("kernel", help="family:key=value,... (e.g. keller-segel:chi=0.5,d=1), preset or file")
    b.add_argument("--u-inf", type=float, default=None)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("verify", help="run a certification suite")
    v.add_argument("target", choices=verify.TARGETS)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="bounds (and optionally fits) over a parameter grid")
    s.add_argument("file")
    s.add_argument("--out")
    s.add_argument("--jobs", type=int, default=None)
    s.add_argument("--deterministic", action="store_true", default=argparse.SUPPRESS)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    args, extra = parser().parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args, extra)
    except (ConfigError, HypothesisError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
