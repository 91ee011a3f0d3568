"""Odd advection kernels K and their closed-form facts.

Every kernel is odd, has one sign on (0, inf), is monotone on each half-line
and has a jump at the origin.  The value at x = 0 is taken to be 0; it never
enters a quadrature because sampling is staggered (see :func:`sample`).

Families
--------
zero            K = 0
keller-segel    K(x) = -chi sign(x) exp(-|x|/sqrt(d)) / (2 d)
compact-bump    K(x) = -(J/2) sign(x) (1 - |x|/R)_+
power-law       K(x) = s A sign(x) (1 + |x|)^(-alpha),  alpha in (0, 1)
step            K(x) = K_inf sign(x)
tabulated       linear interpolation of a half-profile sampled at 0, h, 2h, ...
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy import integrate

FAMILIES = ("zero", "keller-segel", "compact-bump", "power-law", "step", "tabulated")

_ALIASES = {
    "zero": "zero",
    "none": "zero",
    "keller-segel": "keller-segel",
    "keller_segel": "keller-segel",
    "ks": "keller-segel",
    "compact-bump": "compact-bump",
    "compact_bump": "compact-bump",
    "bump": "compact-bump",
    "power-law": "power-law",
    "power_law": "power-law",
    "powerlaw": "power-law",
    "step": "step",
    "tabulated": "tabulated",
}


class KernelError(ValueError):
    """Kernel parameters violate the structural hypotheses."""


@dataclass(frozen=True)
class KernelFacts:
    """Analytic facts about a kernel.

    ``l1_norm`` is ``math.inf`` for non-integrable kernels and ``kbar_l1`` is
    ``None`` when K is not the derivative of an integrable even profile.
    """

    J: float
    l1_norm: float
    lp_finite_for: str
    kbar_l1: float | None
    k_inf: float
    power_alpha: float | None = None
    sup_norm: float = 0.0

    @property
    def integrable(self) -> bool:
        return math.isfinite(self.l1_norm)


@dataclass(frozen=True)
class Kernel:
    family: str
    params: tuple[tuple[str, Any], ...] = field(default=())

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls) -> "Kernel":
        return cls("zero")

    @classmethod
    def keller_segel(cls, chi: float, d: float) -> "Kernel":
        if not (chi > 0 and d > 0):
            raise KernelError("keller-segel needs chi > 0 and d > 0")
        return cls("keller-segel", (("chi", float(chi)), ("d", float(d))))

    @classmethod
    def compact_bump(cls, J: float, R: float) -> "Kernel":
        if not R > 0:
            raise KernelError("compact-bump needs a positive support radius R")
        return cls("compact-bump", (("J", float(J)), ("R", float(R))))

    @classmethod
    def power_law(cls, A: float, alpha: float, sign: int = 1) -> "Kernel":
        if not A > 0:
            raise KernelError("power-law needs A > 0")
        if not 0.0 < alpha < 1.0:
            raise KernelError("power-law needs alpha in (0, 1)")
        if sign not in (1, -1):
            raise KernelError("power-law sign must be +1 or -1")
        return cls("power-law", (("A", float(A)), ("alpha", float(alpha)), ("sign", int(sign))))

    @classmethod
    def step(cls, k_inf: float) -> "Kernel":
        if not k_inf > 0:
            raise KernelError("step needs K_inf > 0")
        return cls("step", (("k_inf", float(k_inf)),))

    @classmethod
    def tabulated(
        cls,
        values,
        spacing: float,
        tail: str = "zero",
        monotone: str = "non-increasing",
    ) -> "Kernel":
        """Half-profile ``values[k] = K(k * spacing)`` for k >= 0, ``values[0] = K(0+)``.

        ``tail`` is ``"zero"`` (compact) or ``"constant"`` (last value held).
        ``monotone`` is the declared direction on (0, inf); it is checked here.
        """
        vals = tuple(float(v) for v in np.asarray(values, dtype=float).ravel())
        if len(vals) < 2:
            raise KernelError("tabulated kernel needs at least two samples")
        if not spacing > 0:
            raise KernelError("tabulated spacing must be positive")
        if tail not in ("zero", "constant"):
            raise KernelError("tail must be 'zero' or 'constant'")
        if monotone not in ("non-increasing", "non-decreasing"):
            raise KernelError("monotone must be 'non-increasing' or 'non-decreasing'")
        arr = np.array(vals + ((0.0,) if tail == "zero" else ()))
        if not np.all(np.isfinite(arr)):
            raise KernelError("tabulated values must be finite")
        if np.any(arr > 0) and np.any(arr < 0):
            raise KernelError("tabulated kernel changes sign on (0, inf)")
        steps = np.diff(arr)
        if monotone == "non-increasing" and np.any(steps > 0):
            raise KernelError("tabulated kernel is not non-increasing on (0, inf)")
        if monotone == "non-decreasing" and np.any(steps < 0):
            raise KernelError("tabulated kernel is not non-decreasing on (0, inf)")
        return cls(
            "tabulated",
            (("values", vals), ("spacing", float(spacing)), ("tail", tail), ("monotone", monotone)),
        )

    # serialization --------------------------------------------------------

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> "Kernel":
        """Build from a ``{family, params}`` record (scenario config)."""
        family = _ALIASES.get(str(record.get("family", "")).lower())
        if family is None:
            raise KernelError(f"unknown kernel family {record.get('family')!r}")
        p = dict(record.get("params") or {})
        try:
            if family == "zero":
                return cls.zero()
            if family == "keller-segel":
                return cls.keller_segel(p["chi"], p["d"])
            if family == "compact-bump":
                return cls.compact_bump(p["J"], p["R"])
            if family == "power-law":
                return cls.power_law(p["A"], p["alpha"], int(p.get("sign", 1)))
            if family == "step":
                return cls.step(p.get("k_inf", p.get("kinf")))
            return cls.tabulated(
                p["values"], p["spacing"], p.get("tail", "zero"), p.get("monotone", "non-increasing")
            )
        except KeyError as exc:
            raise KernelError(f"{family} kernel is missing parameter {exc.args[0]!r}") from None
        except TypeError as exc:
            raise KernelError(f"bad parameters for {family}: {exc}") from None

    def to_record(self) -> dict[str, Any]:
        params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params}
        return {"family": self.family, "params": params}

    def param(self, name: str) -> Any:
        return dict(self.params)[name]

    def __str__(self) -> str:
        if self.family == "tabulated":
            return f"tabulated(n={len(self.param('values'))}, h={self.param('spacing')})"
        inner = ", ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.params)
        return f"{self.family}({inner})"


def eval_kernel(kernel: Kernel, x):
    """Evaluate K at ``x`` (scalar or array).  K(0) is 0 by convention."""
    xa = np.asarray(x, dtype=float)
    s = np.sign(xa)
    r = np.abs(xa)
    p = dict(kernel.params)
    fam = kernel.family
    if fam == "zero":
        out = np.zeros_like(xa)
    elif fam == "keller-segel":
        chi, d = p["chi"], p["d"]
        out = -chi * s * np.exp(-r / math.sqrt(d)) / (2.0 * d)
    elif fam == "compact-bump":
        J, R = p["J"], p["R"]
        out = -0.5 * J * s * np.clip(1.0 - r / R, 0.0, None)
    elif fam == "power-law":
        out = p["sign"] * p["A"] * s * (1.0 + r) ** (-p["alpha"])
    elif fam == "step":
        out = p["k_inf"] * s
    elif fam == "tabulated":
        vals = np.asarray(p["values"])
        h = p["spacing"]
        knots = h * np.arange(len(vals))
        right = vals[-1] if p["tail"] == "constant" else 0.0
        half = np.interp(r, knots, vals, right=right)
        # np.interp holds the last value up to and including the last knot
        if p["tail"] == "zero":
            half = np.where(r > knots[-1], 0.0, half)
        out = s * half
    else:  # pragma: no cover - guarded by constructors
        raise KernelError(f"unknown family {fam}")
    if np.ndim(out) == 0:
        return float(out)
    return out


def facts(kernel: Kernel) -> KernelFacts:
    """Jump, norms and far-field limit of ``kernel``."""
    p = dict(kernel.params)
    fam = kernel.family
    if fam == "zero":
        return KernelFacts(J=0.0, l1_norm=0.0, lp_finite_for="all p in [1, inf]", kbar_l1=0.0, k_inf=0.0)
    if fam == "keller-segel":
        chi, d = p["chi"], p["d"]
        return KernelFacts(
            J=chi / d,
            l1_norm=chi / math.sqrt(d),
            lp_finite_for="all p in [1, inf]",
            kbar_l1=chi,
            k_inf=0.0,
            sup_norm=chi / (2 * d),
        )
    if fam == "compact-bump":
        J, R = p["J"], p["R"]
        return KernelFacts(
            J=J,
            l1_norm=abs(J) * R / 2.0,
            lp_finite_for="all p in [1, inf]",
            kbar_l1=abs(J) * R**2 / 6.0,
            k_inf=0.0,
            sup_norm=abs(J) / 2.0,
        )
    if fam == "power-law":
        A, alpha, sgn = p["A"], p["alpha"], p["sign"]
        return KernelFacts(
            J=-2.0 * sgn * A,
            l1_norm=math.inf,
            lp_finite_for=f"p > {1.0 / alpha:g}",
            kbar_l1=None,
            k_inf=0.0,
            power_alpha=alpha,
            sup_norm=A,
        )
    if fam == "step":
        k = p["k_inf"]
        return KernelFacts(J=-2.0 * k, l1_norm=math.inf, lp_finite_for="p = inf only", kbar_l1=None, k_inf=k, sup_norm=k)
    if fam == "tabulated":
        return _tabulated_facts(p)
    raise KernelError(f"unknown family {fam}")  # pragma: no cover


def _tabulated_facts(p: dict) -> KernelFacts:
    vals = np.asarray(p["values"])
    h = p["spacing"]
    end = h * (len(vals) - 1)
    J = -2.0 * vals[0]
    sup = float(np.max(np.abs(vals)))
    if p["tail"] == "constant" and vals[-1] != 0.0:
        return KernelFacts(J=J, l1_norm=math.inf, lp_finite_for="p = inf only", kbar_l1=None, k_inf=abs(vals[-1]), sup_norm=sup)
    knots = h * np.arange(len(vals))

    def half(y):
        return abs(np.interp(y, knots, vals))

    pts = knots[1:-1] if len(knots) <= 52 else None
    opts = dict(epsrel=1e-10, epsabs=1e-14, limit=max(200, 4 * len(vals)))
    l1, _ = integrate.quad(half, 0.0, end, points=pts, **opts)
    # ||Kbar||_1 = 2 int_0^inf y |K(y)| dy since K keeps one sign on (0, inf)
    m1, _ = integrate.quad(lambda y: y * half(y), 0.0, end, points=pts, **opts)
    return KernelFacts(
        J=J,
        l1_norm=2.0 * l1,
        lp_finite_for="all p in [1, inf]",
        kbar_l1=2.0 * m1,
        k_inf=0.0,
        sup_norm=sup,
    )


def sample_positions(dx: float, half_width: float) -> np.ndarray:
    m = _half_count(dx, half_width)
    return (np.arange(2 * m) - m + 0.5) * dx


def sample(kernel: Kernel, dx: float, half_width: float) -> np.ndarray:
    """K at the staggered points ±dx/2, ±3dx/2, ... up to ``half_width``.

    The array is ordered from the most negative point to the most positive one
    and is exactly odd-symmetric.
    """
    m = _half_count(dx, half_width)
    pos = (np.arange(m) + 0.5) * dx
    right = np.asarray(eval_kernel(kernel, pos), dtype=float)
    return np.concatenate([-right[::-1], right])


def _half_count(dx: float, half_width: float) -> int:
    if not dx > 0:
        raise KernelError("dx must be positive")
    if half_width < dx:
        raise KernelError("half_width must be at least dx")
    return int(math.ceil(half_width / dx - 1e-9))
