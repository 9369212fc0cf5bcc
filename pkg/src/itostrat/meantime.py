"""Mean absorption time ``T(x0)``: finite differences and closed-form oracles.

``T`` solves ``g T'' + f T' = -1`` on ``(a, b)``.  Boundary rows:

* absorbing degenerate endpoint or non-degenerate endpoint (exit): ``T = 0``;
* accessible reflecting degenerate endpoint: the equation itself degenerates
  to ``f(a) T'(a) = -1`` there, which is the condition that the flux in
  natural scale vanishes (``T'(a) = 0`` would force the singular
  ``(x - a)^(-f(a)/g'(a))`` mode into the solution); it is imposed with a
  one-sided second-order difference.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import solve_banded

from .boundary import BoundaryClass, classify_boundary
from .coefficients import DiffusionSpec, Interpretation
from .expr import compile_expr, eval_expr

__all__ = [
    "BoundaryCondition", "MeanTimeSolution", "solve_mean_absorption_time",
    "logistic_mean_time", "drifted_logistic_mean_time", "feller_exit_time",
]


class BoundaryCondition(str, enum.Enum):
    DIRICHLET0 = "Dirichlet0"
    NEUMANN_REFLECTING = "NeumannReflecting"


@dataclass(frozen=True)
class MeanTimeSolution:
    grid: np.ndarray
    values: np.ndarray
    boundary_conditions: dict
    residual_norm: float

    def __call__(self, x0):
        """Linear interpolation of ``T`` at ``x0``."""
        return np.interp(x0, self.grid, self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,T\n")
        for x, t in zip(self.grid, self.values):
            buf.write(f"{float(x)!r},{float(t)!r}\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "boundary_conditions": {k: v.value for k, v in self.boundary_conditions.items()},
            "residual_norm": self.residual_norm,
        }


def _endpoint_bc(s: DiffusionSpec, e: float) -> BoundaryCondition:
    if not s.is_degenerate(e):
        return BoundaryCondition.DIRICHLET0
    cls = classify_boundary(s, e)
    if cls is BoundaryClass.ACCESSIBLE_ABSORBING:
        return BoundaryCondition.DIRICHLET0
    if cls is BoundaryClass.ACCESSIBLE_REFLECTING:
        return BoundaryCondition.NEUMANN_REFLECTING
    raise ValueError(f"endpoint {e:g} is inaccessible; mean absorption time undefined")


_GL_T, _GL_W = np.polynomial.legendre.leggauss(8)


def _hat_averages(q, x: np.ndarray, h: float) -> np.ndarray:
    """``(1/h) int phi_j q dx`` for every interior node, ``phi_j`` the unit hat.

    8-point Gauss-Legendre on each half-cell; no node touches a grid point, so
    ``q`` may have a ``1/(x - a)`` singularity at a degenerate endpoint (the
    hat weight cancels it).
    """
    xi = 0.5 * (_GL_T + 1.0)
    w = 0.5 * _GL_W
    left = q(x[:-2, None] + h * xi[None, :])
    right = q(x[1:-1, None] + h * xi[None, :])
    return left @ (w * xi) + right @ (w * (1.0 - xi))


def solve_mean_absorption_time(s: DiffusionSpec, n: int = 999,
                               bcs: dict | None = None,
                               scheme: str = "hat") -> MeanTimeSolution:
    """Three-point central differences on ``n`` interior nodes of a uniform grid.

    Interior rows discretise ``T'' + (f/g) T' = -1/g``.  With ``scheme="hat"``
    (default) the coefficients ``1/g`` and ``f/g`` are replaced by their
    hat-function averages over ``[x_{j-1}, x_{j+1}]``; since
    ``(T_{j+1} - 2 T_j + T_{j-1}) / h`` equals ``int phi_j T''`` exactly, this is
    exact at the nodes when ``f = 0`` and stays second order near the
    ``1/g`` singularities of degenerate endpoints.  ``scheme="pointwise"``
    uses plain nodal values (``g T'' + f T' = -1``), which is only first-order
    accurate when the solution has a logarithmic endpoint singularity.

    ``bcs`` maps ``"left"``/``"right"`` to a :class:`BoundaryCondition`; by
    default each endpoint is classified.  Both endpoints reflecting leaves no
    absorbing state and is rejected.
    """
    if s.interpretation is not Interpretation.ITO:
        raise ValueError("the mean-time equation is for Ito specs")
    if not math.isfinite(s.b):
        raise ValueError("both endpoints must be finite")
    if n < 3:
        raise ValueError("n must be at least 3")
    if scheme not in ("hat", "pointwise"):
        raise ValueError(f"unknown scheme {scheme!r}")
    a, b = s.domain
    bcs = dict(bcs or {})
    bcs.setdefault("left", _endpoint_bc(s, a))
    bcs.setdefault("right", _endpoint_bc(s, b))
    bcs = {k: BoundaryCondition(v) for k, v in bcs.items()}
    if all(v is BoundaryCondition.NEUMANN_REFLECTING for v in bcs.values()):
        raise ValueError("both endpoints reflecting: no absorption, system singular")

    m = n + 2
    x = np.linspace(a, b, m)
    h = (b - a) / (n + 1)
    f, g = compile_expr(s.f), compile_expr(s.g)
    if scheme == "hat":
        inv_g = _hat_averages(lambda z: 1.0 / g(z), x, h)
        drift = _hat_averages(lambda z: f(z) / g(z), x, h)
    else:
        gi = g(x[1:-1])
        inv_g, drift = 1.0 / gi, f(x[1:-1]) / gi

    # rows scaled to read  g_eff T'' + f_eff T' = -1  with g_eff = 1/inv_g
    g_eff = 1.0 / inv_g
    f_eff = drift * g_eff
    lower = np.zeros(m)
    diag = np.ones(m)
    upper = np.zeros(m)
    rhs = np.zeros(m)
    lower[1:-1] = g_eff / h**2 - f_eff / (2 * h)
    diag[1:-1] = -2 * g_eff / h**2
    upper[1:-1] = g_eff / h**2 + f_eff / (2 * h)
    rhs[1:-1] = -1.0

    for side, i, nb in (("left", 0, 1), ("right", m - 1, m - 2)):
        if bcs[side] is BoundaryCondition.DIRICHLET0:
            continue
        # g(e) = 0 so the equation reads f(e) T'(e) = -1; one-sided second order
        fe = eval_expr(s.f, x[i])
        sgn = 1.0 if side == "left" else -1.0
        c0, c1, c2 = sgn * fe * np.array([-3.0, 4.0, -1.0]) / (2 * h)
        # eliminate the third point with the neighbouring interior row
        far = upper[nb] if side == "left" else lower[nb]
        near = lower[nb] if side == "left" else upper[nb]
        k = -c2 / far
        diag[i] = c0 + k * near
        off = c1 + k * diag[nb]
        rhs[i] = -1.0 + k * rhs[nb]
        if side == "left":
            upper[i] = off
        else:
            lower[i] = off

    # Dirichlet values are zero, so only the remaining rows are solved
    lo = 1 if bcs["left"] is BoundaryCondition.DIRICHLET0 else 0
    hi = m - 1 if bcs["right"] is BoundaryCondition.DIRICHLET0 else m
    size = hi - lo
    # banded storage: ab[0, j+1] = upper[j], ab[1, j] = diag[j], ab[2, j-1] = lower[j]
    ab = np.zeros((3, size))
    ab[0, 1:] = upper[lo:hi - 1]
    ab[1] = diag[lo:hi]
    ab[2, :-1] = lower[lo + 1:hi]
    T = np.zeros(m)
    T[lo:hi] = solve_banded((1, 1), ab, rhs[lo:hi])

    res = (lower[1:-1] * T[:-2] + diag[1:-1] * T[1:-1] + upper[1:-1] * T[2:]
           - rhs[1:-1])
    return MeanTimeSolution(x, T, bcs, float(np.max(np.abs(res))))


def logistic_mean_time(x0: float) -> float:
    """``-(1 - x0) log(1 - x0) - x0 log x0`` for ``dX = sqrt(2 X (1 - X)) dW``."""
    if not 0.0 <= x0 <= 1.0:
        raise ValueError("x0 must lie in [0, 1]")
    return -_xlogx(1.0 - x0) - _xlogx(x0)


def _xlogx(x: float) -> float:
    return 0.0 if x == 0.0 else x * math.log(x)


def _logit_weight(y: float) -> float:
    return math.exp(y) * math.log((1.0 - y) / y)


def _int_logit(lo: float, hi: float) -> float:
    # log singularities sit at 0 and 1 only; split there so each piece has one
    if hi <= lo:
        return 0.0
    total = 0.0
    for p, q in ((lo, min(hi, 0.5)), (max(lo, 0.5), hi)):
        if q > p:
            total += quad(_logit_weight, p, q, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    return total


def drifted_logistic_mean_time(x0: float) -> float:
    """Mean absorption time of ``dX = X(1-X) dt + sqrt(2 X(1-X)) dW``.

    ``T(x0) = (e^{-x0} - 1)/(e - 1) J(1) + e^{-x0} J(x0)`` with
    ``J(x) = int_0^x e^y log((1-y)/y) dy``, evaluated by adaptive quadrature.
    """
    if not 0.0 <= x0 <= 1.0:
        raise ValueError("x0 must lie in [0, 1]")
    j1 = _int_logit(0.0, 1.0)
    return (math.exp(-x0) - 1.0) / (math.e - 1.0) * j1 + math.exp(-x0) * _int_logit(0.0, x0)


def feller_exit_time(x0: float, M: float) -> float:
    """Mean exit time of ``dX = sqrt(2X) dW`` from ``(0, M)``: ``x0 log(M / x0)``.

    Grows without bound as ``M -> inf``: the Feller diffusion on ``[0, inf)``
    has infinite mean absorption time.
    """
    if not 0.0 < x0 <= M:
        raise ValueError("need 0 < x0 <= M")
    return x0 * math.log(M / x0)
