"""Diffusion specifications ``dX = f(X) dt + sqrt(2 g(X)) dW`` and their validation."""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .expr import (
    Expr, ExprDomainError, compile_expr, differentiate, eval_expr, parse_expr,
    to_string,
)

__all__ = [
    "Interpretation", "DiffusionSpec", "ValidationReport", "validate_spec",
    "parse_domain", "format_domain", "validation_grid", "ZERO_TOL",
]

# absolute tolerance for "f(e) = 0" / "g(e) = 0" at endpoints and fixed points
ZERO_TOL = 1e-12
GRID_POINTS = 1001
GRID_SPAN = 100.0


class Interpretation(str, enum.Enum):
    ITO = "Ito"
    STRATONOVICH = "Stratonovich"

    @classmethod
    def parse(cls, value) -> "Interpretation":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if member.value.lower() == key or member.name.lower() == key:
                return member
        if key in ("strat", "s"):
            return cls.STRATONOVICH
        raise ValueError(f"unknown interpretation {value!r}")


_DOMAIN = re.compile(r"^\s*[\[(]?\s*([^,\s]+)\s*,\s*([^,\]\)\s]+)\s*[\])]?\s*$")


def parse_domain(text: str) -> tuple[float, float]:
    """Parse ``"[0, inf)"``, ``"0, 1"`` or ``"[0,1]"`` into ``(a, b)``.

    The left endpoint must be finite; ``inf`` is allowed on the right.
    """
    m = _DOMAIN.match(text)
    if m is None:
        raise ValueError(f"unparseable domain {text!r}")
    try:
        a, b = float(m.group(1)), float(m.group(2))
    except ValueError:
        raise ValueError(f"unparseable domain {text!r}") from None
    if not math.isfinite(a):
        raise ValueError(f"left endpoint must be finite in {text!r}")
    if math.isnan(b) or b <= a:
        raise ValueError(f"empty domain {text!r}")
    return a, b


def _short(v: float) -> str:
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text


def format_domain(domain: tuple[float, float]) -> str:
    """Inverse of :func:`parse_domain` (shortest round-tripping floats)."""
    a, b = domain
    right = "inf)" if math.isinf(b) else f"{_short(b)}]"
    return f"[{_short(a)}, {right}"


@dataclass(frozen=True)
class DiffusionSpec:
    """Drift ``f``, half squared diffusion ``g`` and a state space ``[a, b]``.

    The SDE is ``dX = f(X) dt + sqrt(2 g(X)) dW`` read in ``interpretation``.
    ``b`` may be ``math.inf``.
    """

    f: Expr
    g: Expr
    domain: tuple[float, float]
    interpretation: Interpretation = Interpretation.ITO
    name: str = field(default="", compare=False)

    def __post_init__(self):
        a, b = self.domain
        if not math.isfinite(a) or not b > a:
            raise ValueError(f"invalid domain {self.domain!r}")
        object.__setattr__(self, "domain", (float(a), float(b)))
        object.__setattr__(self, "interpretation",
                           Interpretation.parse(self.interpretation))

    @classmethod
    def from_strings(cls, f: str, g: str, domain="[0, inf)",
                     interpretation="Ito", name: str = "") -> "DiffusionSpec":
        if isinstance(domain, str):
            domain = parse_domain(domain)
        return cls(parse_expr(f), parse_expr(g), tuple(domain),
                   Interpretation.parse(interpretation), name)

    @property
    def a(self) -> float:
        return self.domain[0]

    @property
    def b(self) -> float:
        return self.domain[1]

    @property
    def gprime(self) -> Expr:
        return differentiate(self.g)

    def finite_endpoints(self) -> list[float]:
        return [e for e in self.domain if math.isfinite(e)]

    def is_degenerate(self, endpoint: float) -> bool:
        return abs(eval_expr(self.g, endpoint)) <= ZERO_TOL

    def with_drift(self, f: Expr, interpretation) -> "DiffusionSpec":
        return DiffusionSpec(f, self.g, self.domain, interpretation, self.name)

    def to_dict(self) -> dict:
        return {
            "f": to_string(self.f),
            "g": to_string(self.g),
            "domain": format_domain(self.domain),
            "interpretation": self.interpretation.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiffusionSpec":
        return cls.from_strings(d["f"], d["g"], d["domain"], d["interpretation"])

    def __str__(self):
        noise = "o dW" if self.interpretation is Interpretation.STRATONOVICH else "dW"
        return (f"dX = ({to_string(self.f)}) dt + sqrt(2*({to_string(self.g)})) "
                f"{noise} on {format_domain(self.domain)}")


def validation_grid(domain: tuple[float, float]) -> np.ndarray:
    a, b = domain
    return np.linspace(a, min(b, a + GRID_SPAN), GRID_POINTS)


@dataclass(frozen=True)
class ValidationReport:
    g_nonnegative: bool
    g_min: float
    g_min_at: float
    evaluation_errors: tuple[str, ...]
    zero_endpoints: tuple[float, ...]
    gprime_at: dict
    gprime_nonzero: dict
    f_at: dict
    compatible: dict
    hypotheses_met: bool

    def failures(self) -> list[str]:
        out = list(self.evaluation_errors)
        if not self.g_nonnegative:
            out.append(f"g < 0 on the validation grid (min {self.g_min:.3g} "
                       f"at x={self.g_min_at:.6g})")
        for e, ok in self.gprime_nonzero.items():
            if not ok:
                out.append(f"g'({e:g}) = 0 at degenerate endpoint")
        for e, ok in self.compatible.items():
            if not ok and e in self.zero_endpoints:
                out.append(f"compatibility violated at endpoint {e:g} "
                           f"(f = {self.f_at[e]:.6g})")
        return out

    def to_dict(self) -> dict:
        key = lambda d: {format(k, "g"): v for k, v in d.items()}  # noqa: E731
        return {
            "g_nonnegative": self.g_nonnegative,
            "g_min": self.g_min,
            "g_min_at": self.g_min_at,
            "evaluation_errors": list(self.evaluation_errors),
            "zero_endpoints": list(self.zero_endpoints),
            "gprime_at": key(self.gprime_at),
            "gprime_nonzero": key(self.gprime_nonzero),
            "f_at": key(self.f_at),
            "compatible": key(self.compatible),
            "hypotheses_met": self.hypotheses_met,
        }


def validate_spec(s: DiffusionSpec) -> ValidationReport:
    """Check the standing hypotheses; violations are reported, never raised.

    * ``g >= 0`` on 1001 uniform points of ``[a, min(b, a + 100)]``;
    * ``g'(e) != 0`` at each finite endpoint ``e`` with ``g(e) = 0``;
    * ``f(a) >= 0`` at the left endpoint and ``f(b) <= 0`` at a finite right one.

    The compatibility sign is reported for every finite endpoint but only
    enters ``hypotheses_met`` at degenerate ones.
    """
    errors = []
    grid = validation_grid(s.domain)
    try:
        gv = compile_expr(s.g)(grid)
        imin = int(np.argmin(gv))
        g_min, g_min_at = float(gv[imin]), float(grid[imin])
        g_ok = bool(g_min >= -ZERO_TOL)
    except ExprDomainError as exc:
        errors.append(f"g not evaluable on the domain: {exc}")
        g_min, g_min_at, g_ok = math.nan, math.nan, False

    gp = s.gprime
    zeros, gprime_at, gprime_nonzero, f_at, compatible = [], {}, {}, {}, {}
    for side, e in (("left", s.a), ("right", s.b)):
        if not math.isfinite(e):
            continue
        try:
            fe = eval_expr(s.f, e)
            ge = eval_expr(s.g, e)
        except ExprDomainError as exc:
            errors.append(f"coefficients not evaluable at endpoint {e:g}: {exc}")
            continue
        f_at[e] = fe
        compatible[e] = fe >= -ZERO_TOL if side == "left" else fe <= ZERO_TOL
        if abs(ge) <= ZERO_TOL:
            zeros.append(e)
            try:
                gpe = eval_expr(gp, e)
            except ExprDomainError as exc:
                errors.append(f"g' not evaluable at endpoint {e:g}: {exc}")
                continue
            gprime_at[e] = gpe
            gprime_nonzero[e] = abs(gpe) > ZERO_TOL

    # a non-degenerate finite endpoint is an exit: the drift sign there is moot
    met = (not errors and g_ok and all(gprime_nonzero.values())
           and all(compatible[e] for e in zeros))
    return ValidationReport(g_ok, g_min, g_min_at, tuple(errors), tuple(zeros),
                            gprime_at, gprime_nonzero, f_at, compatible, met)
