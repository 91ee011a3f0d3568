"""Scenario files and the built-in presets.

A scenario is a small YAML document::

    name: keller-segel
    kernel: {family: keller-segel, params: {chi: 0.5, d: 1.0}}
    u0: {kind: indicator, a: 1.0, height: 1.0}
    sim: {dx: 0.1, dt_max: 0.05, t_end: 50.0}      # any SimConfig field
    diagnostics: {levels: [0.1], eps: 0.1, window_fraction: 0.5}
    claims: [speed-bracket, linf, mass-identity]

Every section but ``kernel`` is optional.  Overrides use dotted paths
(``sim.t_end=20``, ``kernel.params.chi=0.3``); a bare key is looked up in the
kernel parameters first and then in ``sim``.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import yaml

from ..kernel import Kernel, KernelError
from ..solver import InitialData, SimConfig


class ConfigError(ValueError):
    """Scenario file or override cannot be used."""


PRESETS: dict[str, dict[str, Any]] = {
    "kpp-local": {
        "kernel": {"family": "zero"},
        "sim": {"dx": 0.1, "dt_max": 0.05, "t_end": 40.0},
        "claims": ["speed-two", "log-delay", "linf", "mass-identity"],
    },
    "keller-segel": {
        "kernel": {"family": "keller-segel", "params": {"chi": 0.5, "d": 1.0}},
        "sim": {"dx": 0.1, "dt_max": 0.05, "t_end": 50.0},
        "claims": ["speed-bracket", "linf", "mass-identity"],
    },
    "converge-one": {
        "kernel": {"family": "keller-segel", "params": {"chi": 0.4, "d": 1.0}},
        "sim": {"dx": 0.1, "dt_max": 0.05, "t_end": 30.0},
        "claims": ["converge-one", "speed-bracket", "linf", "mass-identity"],
    },
    "compact-bump": {
        "kernel": {"family": "compact-bump", "params": {"J": 0.5, "R": 2.0}},
        "sim": {"dx": 0.1, "dt_max": 0.05, "t_end": 40.0},
        "claims": ["speed-bracket", "linf", "mass-identity"],
    },
    # accelerating fronts: the velocity grows with the mass, so edges are
    # moved many cells per step (large_courant) and the domain grows fast
    "step": {
        "kernel": {"family": "step", "params": {"k_inf": 0.25}},
        "sim": {"dx": 0.1, "dt_max": 0.05, "t_end": 30.0, "large_courant": True},
        "claims": ["exp-mass", "plateau", "level-growth", "mass-identity"],
    },
    "power-law": {
        "kernel": {"family": "power-law", "params": {"A": 1.0, "alpha": 0.5, "sign": 1}},
        "sim": {
            "dx": 0.1,
            "dt_max": 0.1,
            "t_end": 200.0,
            "record_every": 1.0,
            "large_courant": True,
        },
        "diagnostics": {"window_fraction": 0.75},
        "claims": ["power-mass", "level-growth", "mass-identity"],
    },
}

_SIM_FIELDS = {f.name for f in fields(SimConfig)}
_PARAM_ALIASES = {"kinf": "k_inf", "K_inf": "k_inf", "j": "J", "r": "R"}


@dataclass
class Scenario:
    name: str
    kernel: Kernel
    u0: InitialData
    config: SimConfig
    levels: tuple[float, ...] = (0.1,)
    eps: float = 0.1
    window_fraction: float = 0.5
    claims: tuple[str, ...] = ()
    source: dict | None = None


def load_document(target: str) -> dict[str, Any]:
    """Preset name or path to a YAML scenario file -> raw document."""
    if target in PRESETS:
        doc = copy.deepcopy(PRESETS[target])
        doc.setdefault("name", target)
        return doc
    path = Path(target)
    if not path.exists():
        raise ConfigError(f"{target!r} is neither a preset ({', '.join(PRESETS)}) nor a file")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    doc.setdefault("name", path.stem)
    return doc


def _coerce(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def apply_override(doc: dict[str, Any], assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    key, text = assignment.split("=", 1)
    key = key.strip().lstrip("-").replace("-", "_") if "." not in key else key.strip()
    value = _coerce(text.strip())
    parts = key.split(".")
    if len(parts) == 1:
        name = _PARAM_ALIASES.get(parts[0], parts[0])
        params = doc.setdefault("kernel", {}).setdefault("params", {})
        if name in params:
            parts = ["kernel", "params", name]
        elif name in _SIM_FIELDS:
            parts = ["sim", name]
        elif name in ("levels", "eps", "window_fraction"):
            parts = ["diagnostics", name]
        elif name in ("name", "claims"):
            parts = [name]
        else:
            raise ConfigError(f"unknown override key {key!r}")
    node = doc
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"override {key!r} descends into a non-mapping")
        node = nxt
    node[parts[-1]] = value


def build(doc: dict[str, Any]) -> Scenario:
    """Validate a raw document into a :class:`Scenario`."""
    known = {"name", "kernel", "u0", "sim", "diagnostics", "claims"}
    extra = set(doc) - known
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    from .claims import REGISTRY

    try:
        kernel = Kernel.from_record(doc.get("kernel") or {})
    except KernelError as exc:
        raise ConfigError(str(exc)) from None
    try:
        u0 = InitialData.from_record(doc.get("u0") or {})
    except TypeError as exc:
        raise ConfigError(f"u0: {exc}") from None
    diag = dict(doc.get("diagnostics") or {})
    levels = diag.pop("levels", [0.1])
    if isinstance(levels, (int, float)):
        levels = [levels]
    eps = diag.pop("eps", 0.1)
    window_fraction = diag.pop("window_fraction", 0.5)
    if diag:
        raise ConfigError(f"unknown diagnostics keys: {sorted(diag)}")
    sim = dict(doc.get("sim") or {})
    bad = set(sim) - _SIM_FIELDS
    if bad:
        raise ConfigError(f"unknown sim keys: {sorted(bad)}")
    sim["levels"] = tuple(float(m) for m in levels)
    sim["level_eps"] = float(eps)
    try:
        config = SimConfig(**sim)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sim: {exc}") from None
    if not all(0.0 < m < 1.0 for m in config.levels):
        raise ConfigError("levels must lie in (0, 1)")
    if not 0.0 < config.level_eps < 0.5:
        raise ConfigError("eps must lie in (0, 1/2)")
    if not 0.0 < float(window_fraction) <= 1.0:
        raise ConfigError("window_fraction must lie in (0, 1]")
    claims = tuple(doc.get("claims") or ())
    unknown = [c for c in claims if c not in REGISTRY]
    if unknown:
        raise ConfigError(f"unknown claim ids {unknown}; known: {sorted(REGISTRY)}")
    name = str(doc.get("name") or "scenario")
    if not name.replace("-", "").replace("_", "").replace(".", "").isalnum():
        raise ConfigError(f"scenario name {name!r} must be alphanumeric (with - _ .)")
    return Scenario(name, kernel, u0, config, config.levels, config.level_eps, float(window_fraction), claims, doc)


def load(target: str, overrides: list[str] | tuple[str, ...] = ()) -> Scenario:
    doc = load_document(target)
    for ov in overrides:
        apply_override(doc, ov)
    return build(doc)


def parse_kernel_spec(spec: str) -> Kernel:
    """``family:key=value,key=value``, a preset name or a scenario file."""
    if spec in PRESETS or Path(spec).exists():
        return load(spec).kernel
    family, _, rest = spec.partition(":")
    params: dict[str, Any] = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        if "=" not in item:
            raise ConfigError(f"kernel parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        params[_PARAM_ALIASES.get(k.strip(), k.strip())] = _coerce(v.strip())
    try:
        return Kernel.from_record({"family": family, "params": params})
    except KernelError as exc:
        raise ConfigError(str(exc)) from None
