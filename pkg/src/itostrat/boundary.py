"""Classification of degenerate finite boundaries of Ito diffusions.

Two independent routes:

* the analytic criterion: a left endpoint ``a`` with ``g(a) = 0``,
  ``g'(a) > 0`` and ``f(a) >= 0`` is accessible iff ``f(a) < g'(a)`` and
  absorbing iff ``f(a) = 0``;
* the speed/scale accessibility integral

      I(eps) = int_{a+eps}^{a+delta} int_x^{a+delta}
                   exp(int_x^y f/g ds) / g(y) dy dx,

  evaluated for shrinking ``eps`` and judged finite or divergent.

Right endpoints are handled by the reflection ``x -> b - x``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .coefficients import ZERO_TOL, DiffusionSpec, Interpretation, validate_spec
from .expr import BinOp, Neg, Num, Var, compile_expr, eval_expr, substitute

__all__ = [
    "BoundaryClass", "IntegralVerdict", "BoundaryReport",
    "NonDegenerateBoundaryError", "classify_boundary", "accessibility_integral",
    "classify_via_integral", "boundary_report", "reflect", "default_delta",
    "EPSILONS",
]

EPSILONS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
SIMPSON_NODES_PER_DECADE = 2000
GL_NODES = 64


class BoundaryClass(str, enum.Enum):
    INACCESSIBLE = "Inaccessible"
    ACCESSIBLE_ABSORBING = "AccessibleAbsorbing"
    ACCESSIBLE_REFLECTING = "AccessibleReflecting"


class IntegralVerdict(str, enum.Enum):
    FINITE = "Finite"
    DIVERGENT = "Divergent"
    INDETERMINATE = "Indeterminate"


class NonDegenerateBoundaryError(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryReport:
    endpoint: float
    side: str
    f_at: float
    gprime_at: float
    analytic_class: BoundaryClass
    integral_estimates: tuple[tuple[float, float], ...]
    integral_verdict: IntegralVerdict
    agreement: bool

    def to_dict(self) -> dict:
        return {
            "endpoint": self.endpoint,
            "side": self.side,
            "f_at": self.f_at,
            "gprime_at": self.gprime_at,
            "analytic_class": self.analytic_class.value,
            "integral_estimates": [list(p) for p in self.integral_estimates],
            "integral_verdict": self.integral_verdict.value,
            "agreement": self.agreement,
        }


def reflect(s: DiffusionSpec) -> DiffusionSpec:
    """The diffusion seen from its right endpoint: ``(-f(b - x), g(b - x))`` on ``[0, b - a]``."""
    if not math.isfinite(s.b):
        raise ValueError("cannot reflect a domain with an infinite right endpoint")
    mirror = BinOp("-", Num(s.b), Var())
    return DiffusionSpec(Neg(substitute(s.f, mirror)), substitute(s.g, mirror),
                         (0.0, s.b - s.a), s.interpretation, s.name)


def _side(s: DiffusionSpec, endpoint: float) -> str:
    if endpoint == s.a:
        return "left"
    if endpoint == s.b and math.isfinite(s.b):
        return "right"
    raise ValueError(f"{endpoint!r} is not a finite endpoint of {s.domain}")


def _left_frame(s: DiffusionSpec, endpoint: float) -> DiffusionSpec:
    return s if _side(s, endpoint) == "left" else reflect(s)


def _check_applicable(s: DiffusionSpec, endpoint: float):
    if s.interpretation is not Interpretation.ITO:
        raise ValueError("boundary classification applies to Ito equations")
    side = _side(s, endpoint)
    if not s.is_degenerate(endpoint):
        raise NonDegenerateBoundaryError(
            "Feller test not applicable; boundary non-degenerate")
    report = validate_spec(s)
    if not report.hypotheses_met:
        raise ValueError("hypotheses not met: " + "; ".join(report.failures()))
    return side


def classify_boundary(s: DiffusionSpec, endpoint: float) -> BoundaryClass:
    """Analytic class of a degenerate endpoint.

    In the left frame (inward drift ``f(a)``, inward slope ``g'(a)``):
    absorbing iff ``f(a) = 0``, inaccessible iff ``f(a) >= g'(a)``, otherwise
    accessible and reflecting.  Endpoints violating the compatibility sign
    are refused rather than extrapolated.
    """
    side = _check_applicable(s, endpoint)
    fa = eval_expr(s.f, endpoint)
    gpa = eval_expr(s.gprime, endpoint)
    if side == "right":
        fa, gpa = -fa, -gpa
    if abs(fa) <= ZERO_TOL:
        return BoundaryClass.ACCESSIBLE_ABSORBING
    if fa >= gpa:
        return BoundaryClass.INACCESSIBLE
    return BoundaryClass.ACCESSIBLE_REFLECTING


def default_delta(s: DiffusionSpec) -> float:
    return 0.5 * min(1.0, s.b - s.a)


class _ScaleTable:
    """``F(z) = int_{a+delta}^z f/g ds`` tabulated against ``u = log(z - a)``."""

    def __init__(self, s: DiffusionSpec, delta: float, eps_min: float):
        a = s.a
        lo, hi = math.log(eps_min), math.log(delta)
        decades = (hi - lo) / math.log(10.0)
        n = max(int(math.ceil(decades * SIMPSON_NODES_PER_DECADE)), 2)
        n += n % 2  # even number of panels
        self.u = np.linspace(lo, hi, n + 1)
        z = a + np.exp(self.u)
        self._f, self._g = compile_expr(s.f), compile_expr(s.g)
        integrand = self._f(z) / self._g(z) * np.exp(self.u)
        if not np.all(np.isfinite(integrand)):
            raise FloatingPointError("non-finite f/g away from the endpoint")
        cum = cumulative_simpson(integrand, x=self.u, initial=0.0)
        self.F = cum - cum[-1]
        self.a = a

    def __call__(self, u):
        return np.interp(u, self.u, self.F)

    def g(self, u):
        return self._g(self.a + np.exp(u))


def _integral(table: _ScaleTable, delta: float, eps: float) -> float:
    # iterated Gauss-Legendre on the stretched variables u = log(x - a), v = log(y - a)
    t, w = np.polynomial.legendre.leggauss(GL_NODES)
    top = math.log(delta)
    lo = math.log(eps)
    ux = 0.5 * (top - lo) * t + 0.5 * (top + lo)
    wx = 0.5 * (top - lo) * w
    # inner nodes for every outer node: shape (outer, inner)
    half = 0.5 * (top - ux)[:, None]
    vy = half * t[None, :] + 0.5 * (top + ux)[:, None]
    wy = half * w[None, :]
    gy = table.g(vy)
    if np.any(gy <= 0) or not np.all(np.isfinite(gy)):
        raise FloatingPointError("g not positive inside the integration range")
    inner = np.sum(wy * np.exp(table(vy) - table(ux)[:, None] + vy) / gy, axis=1)
    value = float(np.sum(wx * np.exp(ux) * inner))
    if not math.isfinite(value):
        raise FloatingPointError("accessibility integral overflowed")
    return value


def accessibility_integral(s: DiffusionSpec, endpoint: float, delta: float,
                           eps: float) -> float:
    """Truncated accessibility integral ``I(eps)`` at a degenerate endpoint.

    The inner ``int f/g`` is a cumulative Simpson rule with 2000 nodes per
    decade of ``log(x - a)``; the double integral is 64-node Gauss-Legendre in
    each stretched variable.
    """
    if not 0 < eps < delta:
        raise ValueError("need 0 < eps < delta")
    left = _left_frame(s, endpoint)
    return _integral(_ScaleTable(left, delta, eps), delta, eps)


def _verdict(values: list[float]) -> IntegralVerdict:
    v = np.asarray(values)
    d = np.diff(v)
    if abs(d[-1]) < 1e-3 * abs(v[-1]):
        return IntegralVerdict.FINITE
    with np.errstate(divide="ignore", invalid="ignore"):
        q = d[1:] / d[:-1]
        ratios = v[1:] / v[:-1]
    # increments shrinking geometrically: a convergent power-law tail
    if np.all(d[-3:] > 0) and np.all((q[-2:] >= 0) & (q[-2:] <= 0.8)):
        return IntegralVerdict.FINITE
    if np.all(ratios >= 1.05) or (np.all(d[-3:] > 0) and np.all(q[-2:] >= 0.95)):
        return IntegralVerdict.DIVERGENT
    return IntegralVerdict.INDETERMINATE


def _estimates(s: DiffusionSpec, endpoint: float, delta: float | None):
    left = _left_frame(s, endpoint)
    delta = default_delta(s) if delta is None else delta
    table = _ScaleTable(left, delta, min(EPSILONS))
    return [(eps, _integral(table, delta, eps)) for eps in EPSILONS]


def classify_via_integral(s: DiffusionSpec, endpoint: float,
                          delta: float | None = None) -> IntegralVerdict:
    """Finite / Divergent / Indeterminate from ``I(eps)``, ``eps = 1e-2 ... 1e-6``.

    Finite when the last increment is below ``1e-3 |I|`` or the increments
    decay geometrically (ratio <= 0.8); Divergent when every successive ratio
    of values is >= 1.05 or the increments stop shrinking (ratio >= 0.95).
    """
    _check_applicable(s, endpoint)
    return _verdict([v for _, v in _estimates(s, endpoint, delta)])


def boundary_report(s: DiffusionSpec, endpoint: float,
                    delta: float | None = None) -> BoundaryReport:
    """Both verdicts for one endpoint; ``agreement`` treats Indeterminate as a miss."""
    cls = classify_boundary(s, endpoint)
    est = _estimates(s, endpoint, delta)
    verdict = _verdict([v for _, v in est])
    if verdict is IntegralVerdict.INDETERMINATE:
        agree = False
    else:
        agree = (verdict is IntegralVerdict.FINITE) == (cls is not BoundaryClass.INACCESSIBLE)
    return BoundaryReport(
        endpoint=endpoint,
        side=_side(s, endpoint),
        f_at=eval_expr(s.f, endpoint),
        gprime_at=eval_expr(s.gprime, endpoint),
        analytic_class=cls,
        integral_estimates=tuple(est),
        integral_verdict=verdict,
        agreement=agree,
    )
