"""Closed-form bounds: spreading speed, L-infinity bound, heat-kernel envelopes,
tail bounds, plateau values and the rearrangement maximum.

Bounds whose hypotheses fail return :data:`INAPPLICABLE` (falsy, prints as
``n/a``) rather than a number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .kernel import Kernel, KernelFacts, facts as kernel_facts

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
PRESCAN = 64
EPS_TOL = 1e-12


@dataclass(frozen=True)
class Inapplicable:
    reason: str = "hypothesis not met"

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return "n/a"


INAPPLICABLE = Inapplicable()


def is_number(value) -> bool:
    return not isinstance(value, Inapplicable) and value is not None


# -- scalar minimisation on (0, 1) ---------------------------------------------


def _eps_grid(n: int = PRESCAN) -> np.ndarray:
    # logistic spacing resolves minimisers hugging either end of (0, 1)
    s = np.linspace(-36.0, 36.0, n)
    return 1.0 / (1.0 + np.exp(-s))


def minimize_unit(f: Callable[[float], float], tol: float = EPS_TOL) -> tuple[float, float]:
    """Minimise ``f`` on (0, 1): 64-point pre-scan, then golden section.

    Returns ``(argmin, min)``.  The bracket around the best scan point is
    shrunk until it is narrower than ``tol``.
    """
    grid = _eps_grid()
    vals = np.array([f(float(e)) for e in grid])
    i = int(np.argmin(vals))
    lo = float(grid[i - 1]) if i > 0 else 0.0
    hi = float(grid[i + 1]) if i + 1 < grid.size else 1.0
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
        if c >= d:  # bracket collapsed to round-off
            break
    best_x, best_f = (c, fc) if fc <= fd else (d, fd)
    if vals[i] < best_f:
        best_x, best_f = float(grid[i]), float(vals[i])
    return best_x, best_f


# -- spreading speed -----------------------------------------------------------


@dataclass(frozen=True)
class BoundInputs:
    facts: KernelFacts
    u_inf: float | None = None
    drift_norms: tuple[float, float, float] | None = None
    support_radius: float = 1.0
    drift_cap: float | None = None

    def __post_init__(self):
        if self.u_inf is not None and not self.u_inf > 0:
            raise ValueError("u_inf must be positive")
        if self.drift_norms is not None and min(self.drift_norms) < 0:
            raise ValueError("drift norms must be non-negative")


@dataclass(frozen=True)
class BoundReport:
    cstar_terms: tuple
    cstar: float
    eps_argmin: float | None
    linf_bound: float
    plateau_upper: float | None
    plateau_lower: float | None
    u_inf: float
    J: float
    # cstar - 2 without the round-off of forming 2 + tiny
    excess: float = math.nan

    def flat(self) -> dict[str, str]:
        """Ordered ``key -> text`` view used by the text and CSV reports."""

        def fmt(v):
            if v is None or isinstance(v, Inapplicable):
                return "n/a"
            return repr(float(v))

        return {
            "J": fmt(self.J),
            "u_inf": fmt(self.u_inf),
            "cstar_term1": fmt(self.cstar_terms[0]),
            "cstar_term2": fmt(self.cstar_terms[1]),
            "cstar_term3": fmt(self.cstar_terms[2]),
            "cstar": fmt(self.cstar),
            "cstar_minus_2": fmt(self.excess),
            "eps_argmin": fmt(self.eps_argmin),
            "linf_bound": fmt(self.linf_bound),
            "plateau_upper": fmt(self.plateau_upper),
            "plateau_lower": fmt(self.plateau_lower),
        }

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.flat().items())


def linf_bound(J: float) -> float:
    """max{1, 1/(1 - J)} for J < 1, infinity otherwise."""
    if J >= 1.0:
        return math.inf
    return max(1.0, 1.0 / (1.0 - J))


def default_u_inf(J: float, measured: float | None = None) -> float:
    """(1 - J)^-1 when 0 <= J < 1; otherwise the measured maximum (or 1 if J < 0)."""
    if 0.0 <= J < 1.0:
        return 1.0 / (1.0 - J)
    if measured is not None:
        return float(measured)
    if J < 0.0:
        return 1.0
    raise ValueError("J >= 1: no a-priori L-infinity bound, pass a measured u_inf")


def _excess(x_minus_one: float) -> float:
    # 2 sqrt(X) - 2 without cancellation when X is close to 1
    return 2.0 * x_minus_one / (math.sqrt(1.0 + x_minus_one) + 1.0)


def cstar_excess(l1: float, kbar: float | None, J: float, u: float) -> tuple[tuple, float | None]:
    """The three branches of c* minus 2, and the minimising epsilon.

    term1 = l1 u / 2
    term2 = 2 sqrt((1 + |J| u / 2)(1 + kbar^2 u^2)) - 2
    term3 = inf_eps 2 sqrt((1 + l1^2 u^2 / (16 eps))(1 + kbar^2 u^2 / (1 - eps))) - 2
    """
    if not math.isfinite(l1):
        return (INAPPLICABLE, INAPPLICABLE, INAPPLICABLE), None
    t1 = 0.5 * l1 * u
    if kbar is None:
        return (t1, INAPPLICABLE, INAPPLICABLE), None
    p = 0.5 * abs(J) * u
    q = (kbar * u) ** 2
    t2 = _excess(p + q + p * q)
    a = (l1 * u) ** 2 / 16.0
    b = q
    if a == 0.0 or b == 0.0:
        # the infimum is the eps -> 1 (resp. eps -> 0) limit
        eps = 1.0 if b == 0.0 else 0.0
        return (t1, t2, _excess(a + b)), eps

    def g(eps: float) -> float:
        if eps <= 0.0 or eps >= 1.0:
            return math.inf
        return a / eps + b / (1.0 - eps) + a * b / (eps * (1.0 - eps))

    eps, gmin = minimize_unit(g)
    return (t1, t2, _excess(gmin)), eps


def cstar(inputs: BoundInputs | KernelFacts | Kernel, u_inf: float | None = None) -> BoundReport:
    """Evaluate the explicit spreading-speed bound and the related constants.

    ``u_inf`` defaults to 1/(1 - J) when 0 <= J < 1.  Kernels outside L^1
    get ``cstar = inf``; kernels without an integrable antiderivative get the
    first branch only.
    """
    if isinstance(inputs, Kernel):
        inputs = BoundInputs(kernel_facts(inputs), u_inf)
    elif isinstance(inputs, KernelFacts):
        inputs = BoundInputs(inputs, u_inf)
    f = inputs.facts
    u = inputs.u_inf if inputs.u_inf is not None else default_u_inf(f.J)
    ex, eps = cstar_excess(f.l1_norm, f.kbar_l1, f.J, u)
    terms = tuple(2.0 + e if is_number(e) else e for e in ex)
    numbers = [e for e in ex if is_number(e)]
    excess = min(numbers) if numbers else math.inf
    up, low = plateau(f)
    return BoundReport(
        cstar_terms=terms,
        cstar=2.0 + excess,
        eps_argmin=eps,
        linf_bound=linf_bound(f.J),
        plateau_upper=up,
        plateau_lower=low,
        u_inf=u,
        J=f.J,
        excess=excess,
    )


# -- heat-kernel envelopes ---------------------------------------------------------


@dataclass(frozen=True)
class GammaEnvelope:
    """Rate part of the fundamental-solution bound.

    The full bound is ``C_delta * tau^(-1/2) * exp(exponent)`` with an
    unknown constant ``C_delta``; only the exponent is computed.
    """

    exponent: float
    branch: str  # "A2" or "A1"
    eps_argmin: float | None
    prefactor: str = "unknown constant x (t-s)^(-1/2)"


def gamma_envelope_detail(drift_norms: Sequence[float], delta: float, tau: float, z: float) -> GammaEnvelope:
    A0, A1, A2 = (float(v) for v in drift_norms)
    if not delta > 0 or not tau > 0:
        raise ValueError("delta and t - s must be positive")
    z2 = z * z
    first = A2 * tau / 2.0 - z2 / (4.0 * (1.0 + delta + A0 * A0) * tau)

    def inner(eps: float) -> float:
        if eps <= 0.0 or eps >= 1.0:
            return math.inf
        return A1 * A1 * tau / (4.0 * eps) - z2 / (4.0 * (1.0 + delta + A0 * A0 / (1.0 - eps)) * tau)

    if A1 == 0.0:
        # integrand increases with eps; the infimum is the eps -> 0 limit
        eps, second = 0.0, -z2 / (4.0 * (1.0 + delta + A0 * A0) * tau)
    else:
        eps, second = minimize_unit(inner)
    if first <= second:
        return GammaEnvelope(delta * tau + first, "A2", None)
    return GammaEnvelope(delta * tau + second, "A1", eps)


def gamma_envelope(drift_norms: Sequence[float], delta: float, tau: float, z: float) -> float:
    """Exponent delta tau + min[A2 branch, inf_eps A1 branch] of the envelope."""
    return gamma_envelope_detail(drift_norms, delta, tau, z).exponent


def hill_uniform_upper(A: float, tau: float, n: int = 1) -> float:
    return (1.0 / math.sqrt(4.0 * math.pi * tau) + A / 2.0) ** n


def hill_upper(A: float, tau: float, r: float, n: int = 1):
    """Gaussian upper bound for |x - y| = r > A tau."""
    r = abs(r)
    if not tau > 0 or r <= A * tau:
        return Inapplicable("needs |x - y| > A (t - s)")
    s = r - A * tau
    lead = 1.0 / math.sqrt(4.0 * math.pi * tau) + A * math.sqrt(tau) / (math.sqrt(4.0 * math.pi) * s)
    return hill_uniform_upper(A, tau, n - 1) * lead * math.exp(-s * s / (4.0 * tau))


def hill_lower(A: float, tau: float, r: float, n: int = 1):
    """Gaussian lower bound for |x - y| = r > A sqrt(n) tau."""
    r = abs(r)
    shift = A * math.sqrt(n) * tau
    if not tau > 0 or r <= shift:
        return Inapplicable("needs |x - y| > A sqrt(n) (t - s)")
    return math.exp(-((r + shift) ** 2) / (4.0 * tau)) / (16.0 * math.pi * tau) ** (n / 2.0)


def fp_tail(A: float, T: float, a: float, x: float):
    """Tail bound for u_t + (v u)_x = u_xx with |v| <= A and supp u0 in [-a, a]."""
    r = abs(x)
    if not T > 0 or r < A * T + a + 1.0:
        return Inapplicable("needs |x| >= A T + a + 1")
    s = r - A * T - a
    return a / math.sqrt(math.pi) * (1.0 / math.sqrt(T) + A * math.sqrt(T) / s) * math.exp(-s * s / (4.0 * T))


# -- accelerating fronts ---------------------------------------------------------


def plateau(f: KernelFacts) -> tuple[float, float]:
    """(1/(1 + 2 K_inf), 1/(2 (1 + |J|))); the first is 1 when K_inf = 0."""
    return 1.0 / (1.0 + 2.0 * f.k_inf), 1.0 / (2.0 * (1.0 + abs(f.J)))


class HypothesisError(ValueError):
    """Input function violates the stated monotonicity/sign hypotheses."""


def phi_max(values: Sequence[float], spacing: float, M: float) -> float:
    """sup of int phi w over 0 <= w <= 2, int w <= M, i.e. 2 int_0^{M/2} phi.

    ``phi`` is the piecewise-linear interpolant of ``values`` at
    0, spacing, 2 spacing, ... and zero past the table; it must be
    non-negative and non-increasing.
    """
    phi = np.asarray(values, dtype=float)
    if phi.ndim != 1 or phi.size < 2 or not spacing > 0:
        raise ValueError("phi needs at least two samples and a positive spacing")
    if np.any(phi < 0):
        raise HypothesisError("phi must be non-negative")
    if np.any(np.diff(phi) > 0):
        raise HypothesisError("phi must be non-increasing")
    if not M > 0:
        raise ValueError("M must be positive")
    half = M / 2.0
    k = min(int(half // spacing), phi.size - 1)
    # whole trapezoid cells, then the partial cell up to M/2
    total = spacing * (phi[:k].sum() + phi[1 : k + 1].sum()) / 2.0 if k > 0 else 0.0
    if k < phi.size - 1:
        rest = half - k * spacing
        end = phi[k] + (phi[k + 1] - phi[k]) * rest / spacing
        total += rest * (phi[k] + end) / 2.0
    return 2.0 * float(total)
