"""Formal Ito <-> Stratonovich drift change and the trivial-solution audit.

For ``dX = f dt + sqrt(2 g) dW`` the correction is ``g'/2``: the Stratonovich
form of an Ito equation has drift ``f - g'/2`` and the Ito form of a
Stratonovich equation has drift ``f + g'/2``.  A point where ``f = g = 0`` is a
constant (trivial) solution; wherever ``g' != 0`` there the transformed drift no
longer vanishes and the constant solution is lost.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .coefficients import (
    ZERO_TOL, DiffusionSpec, Interpretation, validation_grid,
)
from .expr import (
    BinOp, Expr, ExprDomainError, Num, compile_expr, eval_expr, simplify,
    to_string,
)

__all__ = [
    "TransformReport", "ito_to_stratonovich", "stratonovich_to_ito",
    "absorbing_state_audit", "fixed_points", "AuditWarning",
]


class AuditWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TransformReport:
    source: DiffusionSpec
    target: DiffusionSpec
    correction: Expr
    fixed_points_source: tuple[float, ...]
    fixed_points_target: tuple[float, ...]
    destroyed: tuple[float, ...]
    created: tuple[float, ...]
    degenerate: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
            "correction": to_string(self.correction),
            "fixed_points_source": list(self.fixed_points_source),
            "fixed_points_target": list(self.fixed_points_target),
            "destroyed": list(self.destroyed),
            "created": list(self.created),
            "degenerate": list(self.degenerate),
        }


def _bisect(fn, lo, hi):
    flo = fn(lo)
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = fn(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo if abs(flo) <= abs(fn(hi)) else hi


def fixed_points(f: Expr, g: Expr, domain) -> list[float]:
    """Isolated points of the domain where ``f = g = 0``.

    Candidates are grid nodes where ``max(|f|, |g|)`` vanishes, sign changes of
    ``f`` or ``g`` (refined by bisection to machine precision) and strict local
    minima of ``max(|f|, |g|)`` (refined by bounded minimisation).  A candidate
    is kept when both ``|f|`` and ``|g|`` are at most 1e-12 there.
    """
    grid = validation_grid(domain)
    a, b = grid[0], grid[-1]
    try:
        fv = compile_expr(f)(grid)
        gv = compile_expr(g)(grid)
    except ExprDomainError:
        fv = np.array([_safe(f, x) for x in grid])
        gv = np.array([_safe(g, x) for x in grid])
    h = np.maximum(np.abs(fv), np.abs(gv))

    def feval(e):
        return lambda x: _safe(e, x)

    cands = list(grid[h == 0])
    for vals, expr in ((fv, f), (gv, g)):
        s = np.sign(vals)
        idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
        for i in idx:
            cands.append(_bisect(feval(expr), grid[i], grid[i + 1]))
    interior = np.nonzero((h[1:-1] < h[:-2]) & (h[1:-1] <= h[2:]))[0] + 1
    hfun = lambda x: max(abs(_safe(f, x)), abs(_safe(g, x)))  # noqa: E731
    for i in interior:
        res = minimize_scalar(hfun, bounds=(grid[i - 1], grid[i + 1]),
                              method="bounded", options={"xatol": 1e-13})
        cands.append(float(res.x))

    out: list[float] = []
    for x in sorted(cands):
        x = float(min(max(x, a), b))
        if abs(_safe(f, x)) <= ZERO_TOL and abs(_safe(g, x)) <= ZERO_TOL:
            if not out or x - out[-1] > 1e-9:
                out.append(x)
    return out


def _safe(e: Expr, x: float) -> float:
    try:
        return eval_expr(e, x)
    except ExprDomainError:
        return math.inf


def absorbing_state_audit(source: DiffusionSpec, target: DiffusionSpec):
    """Return ``(destroyed, created, degenerate)`` trivial points.

    ``degenerate`` lists common roots where ``g' = 0``; the drift change says
    nothing about them, so they are left out of the other two lists and an
    :class:`AuditWarning` is issued.
    """
    if source.g != target.g or source.domain != target.domain:
        raise ValueError("source and target must share g and the domain")
    fp_s = fixed_points(source.f, source.g, source.domain)
    fp_t = fixed_points(target.f, target.g, target.domain)
    gp = source.gprime
    degenerate = sorted({x for x in fp_s + fp_t if abs(_safe(gp, x)) <= ZERO_TOL})
    if degenerate:
        warnings.warn(f"g' vanishes at common roots {degenerate}; excluded from audit",
                      AuditWarning, stacklevel=2)

    def near(x, pts):
        return any(abs(x - p) <= 1e-9 for p in pts)

    destroyed = [x for x in fp_s if not near(x, fp_t) and not near(x, degenerate)]
    created = [x for x in fp_t if not near(x, fp_s) and not near(x, degenerate)]
    return destroyed, created, degenerate


def _transform(s: DiffusionSpec, sign: str, target_interp) -> TransformReport:
    half_gp = simplify(BinOp("*", Num(0.5), s.gprime))
    correction = simplify(BinOp("*", Num(-0.5 if sign == "-" else 0.5), s.gprime))
    target = s.with_drift(simplify(BinOp(sign, s.f, half_gp)), target_interp)
    fp_s = fixed_points(s.f, s.g, s.domain)
    fp_t = fixed_points(target.f, target.g, target.domain)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AuditWarning)
        destroyed, created, degenerate = absorbing_state_audit(s, target)
    for w in caught:
        warnings.warn(w.message, w.category, stacklevel=3)
    return TransformReport(s, target, correction, tuple(fp_s), tuple(fp_t),
                           tuple(destroyed), tuple(created), tuple(degenerate))


def ito_to_stratonovich(s: DiffusionSpec) -> TransformReport:
    """Stratonovich equation with drift ``f - g'/2``; same ``g`` and domain.

    >>> r = ito_to_stratonovich(DiffusionSpec.from_strings("0", "x"))
    >>> to_string(r.target.f), r.destroyed
    ('-0.5', (0.0,))
    """
    if s.interpretation is not Interpretation.ITO:
        raise ValueError("ito_to_stratonovich needs an Ito source spec")
    return _transform(s, "-", Interpretation.STRATONOVICH)


def stratonovich_to_ito(s: DiffusionSpec) -> TransformReport:
    """Ito equation with drift ``f + g'/2``; same ``g`` and domain."""
    if s.interpretation is not Interpretation.STRATONOVICH:
        raise ValueError("stratonovich_to_ito needs a Stratonovich source spec")
    return _transform(s, "+", Interpretation.ITO)
